#pragma once

// Minimal differentiable stack of affine layers with analytic gradients.
// No external ML dependency; everything the reward model needs is here.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pbrl/errors.hpp"
#include "pbrl/rng.hpp"

namespace pbrl {

enum class Nonlinearity { identity, tanh, relu };

inline const char* to_string(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::identity: return "identity";
    case Nonlinearity::tanh: return "tanh";
    case Nonlinearity::relu: return "relu";
  }
  return "?";
}

inline Nonlinearity nonlinearity_from_string(const std::string& s) {
  if (s == "identity") return Nonlinearity::identity;
  if (s == "tanh") return Nonlinearity::tanh;
  if (s == "relu") return Nonlinearity::relu;
  throw ConfigError("unknown nonlinearity: " + s);
}

struct LayerSpec {
  int input_width = 0;
  int output_width = 0;
  Nonlinearity nonlinearity = Nonlinearity::identity;
};

using NetSpec = std::vector<LayerSpec>;

inline void validate_spec(const NetSpec& spec) {
  if (spec.empty()) throw DimensionError("empty layer spec");
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec[i].input_width <= 0 || spec[i].output_width <= 0)
      throw DimensionError("layer " + std::to_string(i) + " has non-positive width");
    if (i > 0 && spec[i].input_width != spec[i - 1].output_width)
      throw DimensionError("layer " + std::to_string(i) + " input width " +
                           std::to_string(spec[i].input_width) + " does not chain with previous output width " +
                           std::to_string(spec[i - 1].output_width));
  }
}

// Flat parameter layout: for each layer, weights row-major (output_width x
// input_width) followed by biases (output_width). The layout is stable; it is
// what checkpoints serialize.
inline std::size_t layer_param_count(const LayerSpec& l) {
  return static_cast<std::size_t>(l.input_width) * l.output_width + l.output_width;
}

inline std::size_t param_count(const NetSpec& spec) {
  std::size_t n = 0;
  for (const auto& l : spec) n += layer_param_count(l);
  return n;
}

inline std::vector<std::size_t> layer_offsets(const NetSpec& spec) {
  std::vector<std::size_t> off(spec.size());
  std::size_t n = 0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    off[i] = n;
    n += layer_param_count(spec[i]);
  }
  return off;
}

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] for weights and biases.
inline std::vector<double> init_params(const NetSpec& spec, Rng& rng) {
  validate_spec(spec);
  std::vector<double> p(param_count(spec));
  std::size_t k = 0;
  for (const auto& l : spec) {
    const double s = 1.0 / std::sqrt(static_cast<double>(l.input_width));
    const std::size_t n = layer_param_count(l);
    for (std::size_t i = 0; i < n; ++i) p[k++] = rng.uniform(-s, s);
  }
  return p;
}

inline double apply_nonlinearity(Nonlinearity n, double z) {
  switch (n) {
    case Nonlinearity::identity: return z;
    case Nonlinearity::tanh: return std::tanh(z);
    case Nonlinearity::relu: return z > 0.0 ? z : 0.0;
  }
  return z;
}

// Derivative expressed through the activation value a = f(z).
// relu'(0) is defined as 0.
inline double nonlinearity_grad(Nonlinearity n, double a) {
  switch (n) {
    case Nonlinearity::identity: return 1.0;
    case Nonlinearity::tanh: return 1.0 - a * a;
    case Nonlinearity::relu: return a > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

// Per-layer activations for one input. pre_activations are kept so backward
// can run without re-deriving anything; buffers are reused across calls.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<std::vector<double>> activations;  // a_l = f(W_l a_{l-1} + b_l)
  std::vector<int> widths;                       // output widths, used to detect stale traces

  const std::vector<double>& output() const {
    if (activations.empty()) throw InvalidStateError("trace has no activations");
    return activations.back();
  }

  // Activation feeding the final layer; the input itself for a 1-layer net.
  const std::vector<double>& penultimate() const {
    if (activations.empty()) throw InvalidStateError("trace has no activations");
    if (activations.size() == 1) return input;
    return activations[activations.size() - 2];
  }

  bool matches(const NetSpec& spec) const {
    if (widths.size() != spec.size()) return false;
    for (std::size_t i = 0; i < spec.size(); ++i)
      if (widths[i] != spec[i].output_width) return false;
    return true;
  }
};

inline void forward(std::span<const double> params, const NetSpec& spec,
                    std::span<const double> input, ForwardTrace& trace) {
  validate_spec(spec);
  if (static_cast<int>(input.size()) != spec.front().input_width)
    throw DimensionError("forward: input width " + std::to_string(input.size()) +
                         " != " + std::to_string(spec.front().input_width));
  if (params.size() != param_count(spec))
    throw DimensionError("forward: parameter vector has wrong length");

  trace.input.assign(input.begin(), input.end());
  trace.activations.resize(spec.size());
  trace.widths.resize(spec.size());

  const double* cur = trace.input.data();
  std::size_t cur_n = input.size();
  std::size_t k = 0;
  for (std::size_t l = 0; l < spec.size(); ++l) {
    const int in_w = spec[l].input_width;
    const int out_w = spec[l].output_width;
    auto& act = trace.activations[l];
    act.resize(out_w);
    const double* w = params.data() + k;
    const double* b = params.data() + k + static_cast<std::size_t>(in_w) * out_w;
    for (int o = 0; o < out_w; ++o) {
      const double* row = w + static_cast<std::size_t>(o) * in_w;
      double z = b[o];
      for (int i = 0; i < in_w; ++i) z += row[i] * cur[i];
      act[o] = apply_nonlinearity(spec[l].nonlinearity, z);
    }
    trace.widths[l] = out_w;
    k += layer_param_count(spec[l]);
    cur = act.data();
    cur_n = act.size();
  }
  (void)cur_n;
}

// Backpropagation starting from a gradient injected at the activation of
// layer `start_layer` (the last layer for ordinary output gradients).
// Accumulates scale * dLoss/dparam into grad_accum; layers above start_layer
// receive no gradient. Optionally returns the gradient w.r.t. the input.
inline void backward_from_layer(std::span<const double> params, const NetSpec& spec,
                                const ForwardTrace& trace, std::size_t start_layer,
                                std::span<const double> activation_gradient,
                                std::span<double> grad_accum, double scale = 1.0,
                                std::vector<double>* input_gradient = nullptr) {
  if (!trace.matches(spec))
    throw InvalidStateError("backward: trace does not match the layer spec (stale trace?)");
  if (start_layer >= spec.size())
    throw DimensionError("backward: start layer out of range");
  if (static_cast<int>(activation_gradient.size()) != spec[start_layer].output_width)
    throw DimensionError("backward: gradient width mismatch at start layer");
  if (params.size() != param_count(spec) || grad_accum.size() != param_count(spec))
    throw DimensionError("backward: parameter/gradient length mismatch");

  const auto offsets = layer_offsets(spec);

  // delta = dL/dz at the current layer.
  static thread_local std::vector<double> delta, delta_prev;
  delta.resize(spec[start_layer].output_width);
  for (int o = 0; o < spec[start_layer].output_width; ++o)
    delta[o] = activation_gradient[o] *
               nonlinearity_grad(spec[start_layer].nonlinearity, trace.activations[start_layer][o]);

  for (std::size_t li = start_layer + 1; li-- > 0;) {
    const int in_w = spec[li].input_width;
    const int out_w = spec[li].output_width;
    const double* below = (li == 0) ? trace.input.data() : trace.activations[li - 1].data();
    double* gw = grad_accum.data() + offsets[li];
    double* gb = gw + static_cast<std::size_t>(in_w) * out_w;
    for (int o = 0; o < out_w; ++o) {
      const double d = scale * delta[o];
      double* grow = gw + static_cast<std::size_t>(o) * in_w;
      for (int i = 0; i < in_w; ++i) grow[i] += d * below[i];
      gb[o] += d;
    }
    if (li == 0) {
      if (input_gradient != nullptr) {
        input_gradient->assign(in_w, 0.0);
        const double* w = params.data() + offsets[0];
        for (int o = 0; o < out_w; ++o) {
          const double* row = w + static_cast<std::size_t>(o) * in_w;
          for (int i = 0; i < in_w; ++i) (*input_gradient)[i] += scale * delta[o] * row[i];
        }
      }
      break;
    }
    // Propagate to the layer below: delta_prev = (W^T delta) .* f'(a_below).
    delta_prev.assign(in_w, 0.0);
    const double* w = params.data() + offsets[li];
    for (int o = 0; o < out_w; ++o) {
      const double d = delta[o];
      const double* row = w + static_cast<std::size_t>(o) * in_w;
      for (int i = 0; i < in_w; ++i) delta_prev[i] += d * row[i];
    }
    for (int i = 0; i < in_w; ++i)
      delta_prev[i] *= nonlinearity_grad(spec[li - 1].nonlinearity, trace.activations[li - 1][i]);
    std::swap(delta, delta_prev);
  }
}

inline void backward(std::span<const double> params, const NetSpec& spec, const ForwardTrace& trace,
                     std::span<const double> output_gradient, std::span<double> grad_accum,
                     double scale = 1.0, std::vector<double>* input_gradient = nullptr) {
  backward_from_layer(params, spec, trace, spec.size() - 1, output_gradient, grad_accum, scale,
                      input_gradient);
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check.
// ---------------------------------------------------------------------------

struct LossEval {
  double value = 0.0;
  std::vector<double> gradient;
};

// Central differences against the analytic gradient of `loss`. Every
// parameter is perturbed by +/- epsilon; the worst relative error is
// returned, with denominator max(|analytic|, |numeric|, 1e-8).
inline double fd_check(std::span<const double> params,
                       const std::function<double(std::span<const double>)>& loss_value,
                       const std::function<LossEval(std::span<const double>)>& loss_with_grad,
                       double epsilon = 1e-5) {
  LossEval center = loss_with_grad(params);
  if (center.gradient.size() != params.size())
    throw DimensionError("fd_check: analytic gradient has wrong length");
  std::vector<double> p(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + epsilon;
    const double lp = loss_value(p);
    p[i] = saved - epsilon;
    const double lm = loss_value(p);
    p[i] = saved;
    const double numeric = (lp - lm) / (2.0 * epsilon);
    const double analytic = center.gradient[i];
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    worst = std::max(worst, std::fabs(analytic - numeric) / denom);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Optimizers: SGD with momentum and Adam with decoupled weight decay.
// ---------------------------------------------------------------------------

enum class OptimizerKind { sgd, adam };

inline const char* to_string(OptimizerKind k) {
  return k == OptimizerKind::sgd ? "sgd" : "adam";
}

inline OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer: " + s);
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double momentum = 0.9;      // sgd
  double beta1 = 0.9;         // adam
  double beta2 = 0.999;       // adam
  double epsilon = 1e-8;      // adam
  double weight_decay = 0.0;  // decoupled; applied as p -= lr * wd * p
};

class Optimizer {
public:
  Optimizer() = default;
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

  const OptimizerConfig& config() const { return cfg_; }

  void reset(std::size_t n) {
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
    t_ = 0;
  }

  // One update step; throws NonFiniteError on any non-finite gradient entry.
  void step(std::vector<double>& params, std::span<const double> grad) {
    if (grad.size() != params.size())
      throw DimensionError("optimizer: gradient length mismatch");
    for (std::size_t i = 0; i < grad.size(); ++i)
      if (!std::isfinite(grad[i]))
        throw NonFiniteError("optimizer: non-finite gradient at index " + std::to_string(i) +
                             " (value " + std::to_string(grad[i]) + ")");
    if (m_.size() != params.size()) reset(params.size());

    const double lr = cfg_.learning_rate;
    if (cfg_.kind == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = cfg_.momentum * m_[i] + grad[i];
        params[i] -= lr * m_[i];
      }
    } else {
      ++t_;
      const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
      const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
      for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
        const double mh = m_[i] / bc1;
        const double vh = v_[i] / bc2;
        params[i] -= lr * mh / (std::sqrt(vh) + cfg_.epsilon);
      }
    }
    if (cfg_.weight_decay > 0.0)
      for (auto& p : params) p -= lr * cfg_.weight_decay * p;
  }

private:
  OptimizerConfig cfg_{};
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
};

// Convenience wrapper matching the flat sgd_step contract: params <- params -
// lr * (momentum-smoothed gradient). The state vector persists across calls.
inline void sgd_step(std::vector<double>& params, std::span<const double> grad,
                     double learning_rate, double momentum, std::vector<double>& momentum_state) {
  if (grad.size() != params.size()) throw DimensionError("sgd_step: gradient length mismatch");
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i])) throw NonFiniteError("sgd_step: non-finite gradient entry");
  if (momentum_state.size() != params.size()) momentum_state.assign(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    momentum_state[i] = momentum * momentum_state[i] + grad[i];
    params[i] -= learning_rate * momentum_state[i];
  }
}

}  // namespace pbrl
