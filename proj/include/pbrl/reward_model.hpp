#pragma once

// Learned reward function R_psi: Bradley-Terry preference probability,
// cross-entropy loss over labeled pairs, the triplet loss that treats
// unlabeled trajectories as optimistically preferred, and the action-distance
// loss shaping the penultimate-layer embedding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "pbrl/approximator.hpp"
#include "pbrl/env.hpp"
#include "pbrl/errors.hpp"

namespace pbrl {

enum class PreferenceLabel { prefer0, prefer1 };

struct PreferenceTuple {
  Trajectory tau0;
  Trajectory tau1;
  PreferenceLabel label = PreferenceLabel::prefer0;

  const Trajectory& preferred() const { return label == PreferenceLabel::prefer0 ? tau0 : tau1; }
  const Trajectory& dispreferred() const { return label == PreferenceLabel::prefer0 ? tau1 : tau0; }
};

// Labeled dataset D_h. Append-only; a non-zero cap enforces the feedback
// budget at the type level.
class PreferenceDataset {
public:
  PreferenceDataset() = default;
  explicit PreferenceDataset(std::size_t max_size) : max_size_(max_size) {}

  void append(PreferenceTuple t) {
    if (max_size_ != 0 && tuples_.size() >= max_size_)
      throw BudgetExhaustedError("preference dataset is at its feedback budget (" +
                                 std::to_string(max_size_) + ")");
    tuples_.push_back(std::move(t));
  }

  std::size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }
  std::size_t max_size() const { return max_size_; }
  const PreferenceTuple& at(std::size_t i) const { return tuples_.at(i); }
  const std::vector<PreferenceTuple>& tuples() const { return tuples_; }

private:
  std::vector<PreferenceTuple> tuples_;
  std::size_t max_size_ = 0;
};

// Element of D_p. d_y = j - i is kept raw; provenance fields let tests verify
// the window/offset contract exhaustively.
struct ActionDistancePair {
  std::vector<double> s_i;
  int a_i = 0;
  std::vector<double> s_j;
  int a_j = 0;
  int d_y = 0;
  std::int64_t source_trajectory_id = 0;
  int index_i = 0;
  int index_j = 0;
};

using ActionDistanceDataset = std::vector<ActionDistancePair>;

enum class TripletMode { symmetric_squared, literal_eq3 };

inline const char* to_string(TripletMode m) {
  return m == TripletMode::symmetric_squared ? "symmetric_squared" : "literal_eq3";
}

inline TripletMode triplet_mode_from_string(const std::string& s) {
  if (s == "symmetric_squared") return TripletMode::symmetric_squared;
  if (s == "literal_eq3") return TripletMode::literal_eq3;
  throw ConfigError("unknown triplet mode: " + s);
}

// ---------------------------------------------------------------------------
// Vector-level loss arithmetic (model-free; unit-testable in isolation).
// ---------------------------------------------------------------------------

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("squared_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Hinge term of the triplet loss for one (anchor, positive, negative) triple
// expressed through the two distances. symmetric_squared uses ||.||^2 for
// both; literal_eq3 uses ||.||^2 for the positive and ||.|| for the negative,
// exactly as printed.
inline double triplet_hinge(double d_pos_sq, double d_neg_sq, double margin, TripletMode mode) {
  const double neg = mode == TripletMode::symmetric_squared ? d_neg_sq : std::sqrt(d_neg_sq);
  return std::max(0.0, d_pos_sq - neg + margin);
}

inline double ad_residual(double embed_dist_sq, double target) {
  const double r = embed_dist_sq - target;
  return r * r;
}

// Numerically safe sigmoid and softplus.
inline double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// ---------------------------------------------------------------------------
// Reward model.
// ---------------------------------------------------------------------------

struct RewardModelConfig {
  int state_dim = 2;
  int n_actions = kGridActions;
  std::vector<int> hidden_widths{32, 32};
  Nonlinearity hidden_nonlinearity = Nonlinearity::tanh;
  // Reward is output_bound * tanh(z). A non-positive bound switches the final
  // layer to identity (unbounded; used by tests that need exact values).
  double output_bound = 1.0;
  // Initial value of the final-layer bias. The preference losses are
  // invariant to a constant reward shift, so the overall level is free; a
  // negative level keeps episode termination from acting as an implicit
  // penalty when the policy maximizes the learned reward.
  double final_bias_init = -1.0;

  int input_width() const { return state_dim + n_actions; }

  NetSpec make_spec() const {
    NetSpec spec;
    int in = input_width();
    for (int w : hidden_widths) {
      spec.push_back({in, w, hidden_nonlinearity});
      in = w;
    }
    spec.push_back({in, 1, output_bound > 0.0 ? Nonlinearity::tanh : Nonlinearity::identity});
    return spec;
  }
};

struct LossComponents {
  double ce = 0.0;
  double triplet = 0.0;
  double ad = 0.0;
  double combined(double lambda_ce, double lambda_t, double lambda_a) const {
    return lambda_ce * ce + lambda_t * triplet + lambda_a * ad;
  }
};

class RewardModel {
public:
  explicit RewardModel(RewardModelConfig cfg = {}, std::uint64_t seed = 0)
      : cfg_(cfg), spec_(cfg.make_spec()) {
    Rng rng(seed);
    params_ = init_params(spec_, rng);
    set_final_bias(cfg_.final_bias_init);
  }

  const RewardModelConfig& config() const { return cfg_; }
  const NetSpec& spec() const { return spec_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  int input_width() const { return cfg_.input_width(); }
  int embedding_width() const {
    return spec_.size() >= 2 ? spec_[spec_.size() - 2].output_width : spec_.front().input_width;
  }

  // Re-draws all parameters (used by trainers that retrain from scratch).
  void reinitialize(Rng& rng) {
    params_ = init_params(spec_, rng);
    set_final_bias(cfg_.final_bias_init);
  }

  void encode(std::span<const double> state, int action, std::vector<double>& out) const {
    if (static_cast<int>(state.size()) != cfg_.state_dim)
      throw DimensionError("reward model: state width " + std::to_string(state.size()) +
                           " != configured " + std::to_string(cfg_.state_dim));
    if (action < 0 || action >= cfg_.n_actions)
      throw DimensionError("reward model: action id out of range");
    out.assign(cfg_.input_width(), 0.0);
    std::copy(state.begin(), state.end(), out.begin());
    out[cfg_.state_dim + action] = 1.0;
  }

  double reward(std::span<const double> state, int action) const {
    thread_local std::vector<double> input;
    thread_local ForwardTrace trace;
    encode(state, action, input);
    forward(params_, spec_, input, trace);
    return scale() * trace.output()[0];
  }

  std::vector<double> reward_vector(const Trajectory& traj) const {
    std::vector<double> r(traj.transitions.size());
    for (std::size_t t = 0; t < traj.transitions.size(); ++t)
      r[t] = reward(traj.transitions[t].state, traj.transitions[t].action);
    return r;
  }

  std::vector<double> embed(std::span<const double> state, int action) const {
    thread_local std::vector<double> input;
    thread_local ForwardTrace trace;
    encode(state, action, input);
    forward(params_, spec_, input, trace);
    return trace.penultimate();
  }

  // P[a > b] under the Bradley-Terry model over summed rewards, computed in
  // log space.
  double preference_probability(const Trajectory& a, const Trajectory& b) const {
    double sa = 0.0, sb = 0.0;
    for (const auto& tr : a.transitions) sa += reward(tr.state, tr.action);
    for (const auto& tr : b.transitions) sb += reward(tr.state, tr.action);
    return stable_sigmoid(sa - sb);
  }

  // -------------------------------------------------------------------------
  // Losses. Each returns the (unweighted) mean loss value and, when
  // grad_accum is non-null, adds scale * dLoss/dparams to it.
  // -------------------------------------------------------------------------

  double ce_loss(std::span<const PreferenceTuple> batch, std::vector<double>* grad_accum = nullptr,
                 double scale = 1.0) const {
    if (batch.empty()) throw EmptyBatchError("ce_loss: empty batch");
    BatchEvaluator ev(*this);
    const double v = accumulate_ce(ev, batch, scale);
    if (grad_accum != nullptr) ev.flush(*grad_accum);
    return v;
  }

  double triplet_loss(const Trajectory& anchor, std::span<const PreferenceTuple> tuples,
                      TripletMode mode, double margin, std::vector<double>* grad_accum = nullptr,
                      double scale = 1.0) const {
    if (tuples.empty()) throw EmptyBatchError("triplet_loss: empty labeled set");
    BatchEvaluator ev(*this);
    const Trajectory* one[1] = {&anchor};
    const double v = accumulate_triplet(ev, {one, 1}, tuples, mode, margin, scale);
    if (grad_accum != nullptr) ev.flush(*grad_accum);
    return v;
  }

  double ad_loss(std::span<const ActionDistancePair> batch, std::vector<double>* grad_accum = nullptr,
                 double scale = 1.0, double distance_scale = 1.0) const {
    if (batch.empty()) throw EmptyBatchError("ad_loss: empty batch");
    return accumulate_ad(batch, grad_accum, scale, distance_scale);
  }

  // Eq.-5 style linear combination. Anchor and D_p batches may be empty;
  // their terms drop out (this is what the loss ablations rely on).
  LossComponents combined_loss(std::span<const PreferenceTuple> dh_batch,
                               std::span<const Trajectory* const> anchors,
                               std::span<const ActionDistancePair> dp_batch, double lambda_ce,
                               double lambda_t, double lambda_a, TripletMode mode, double margin,
                               double distance_scale, std::vector<double>* grad_accum = nullptr) const {
    if (dh_batch.empty() && anchors.empty() && dp_batch.empty())
      throw EmptyBatchError("combined_loss: nothing to average over");
    LossComponents out;
    BatchEvaluator ev(*this);
    if (!dh_batch.empty()) out.ce = accumulate_ce(ev, dh_batch, lambda_ce);
    if (!anchors.empty() && !dh_batch.empty())
      out.triplet = accumulate_triplet(ev, anchors, dh_batch, mode, margin, lambda_t);
    if (grad_accum != nullptr) ev.flush(*grad_accum);
    if (!dp_batch.empty()) out.ad = accumulate_ad(dp_batch, grad_accum, lambda_a, distance_scale);
    return out;
  }

private:
  double scale() const { return cfg_.output_bound > 0.0 ? cfg_.output_bound : 1.0; }

  void set_final_bias(double v) {
    // last parameter in the layout is the final layer's bias
    params_.back() = v;
  }

  // Caches reward vectors per trajectory id within one loss evaluation and
  // accumulates per-step dLoss/dreward coefficients; flush() then runs one
  // forward/backward per (trajectory, step) with the summed coefficient.
  class BatchEvaluator {
  public:
    explicit BatchEvaluator(const RewardModel& m) : m_(m) {}

    // Keyed by object identity: distinct objects are never aliased even when
    // they carry equal ids (hand-built test trajectories often do).
    std::size_t intern(const Trajectory& traj) {
      auto it = index_.find(&traj);
      if (it != index_.end()) return it->second;
      Entry e;
      e.traj = &traj;
      e.rewards = m_.reward_vector(traj);
      e.coeff.assign(e.rewards.size(), 0.0);
      entries_.push_back(std::move(e));
      index_.emplace(&traj, entries_.size() - 1);
      return entries_.size() - 1;
    }

    const std::vector<double>& rewards(std::size_t idx) const { return entries_[idx].rewards; }
    double sum(std::size_t idx) const {
      double s = 0.0;
      for (double r : entries_[idx].rewards) s += r;
      return s;
    }
    void add_coeff(std::size_t idx, std::size_t t, double c) { entries_[idx].coeff[t] += c; }
    void add_coeff_all(std::size_t idx, double c) {
      for (auto& v : entries_[idx].coeff) v += c;
    }

    void flush(std::vector<double>& grad_accum) {
      if (grad_accum.size() != m_.params_.size()) grad_accum.resize(m_.params_.size(), 0.0);
      thread_local std::vector<double> input;
      thread_local ForwardTrace trace;
      const double out_scale = m_.scale();
      std::vector<double> out_grad(1);
      for (const auto& e : entries_) {
        for (std::size_t t = 0; t < e.coeff.size(); ++t) {
          if (e.coeff[t] == 0.0) continue;
          const auto& tr = e.traj->transitions[t];
          m_.encode(tr.state, tr.action, input);
          forward(m_.params_, m_.spec_, input, trace);
          out_grad[0] = e.coeff[t] * out_scale;
          backward(m_.params_, m_.spec_, trace, out_grad, grad_accum);
        }
      }
    }

  private:
    struct Entry {
      const Trajectory* traj;
      std::vector<double> rewards;
      std::vector<double> coeff;
    };
    const RewardModel& m_;
    std::vector<Entry> entries_;
    std::unordered_map<const Trajectory*, std::size_t> index_;
  };

  double accumulate_ce(BatchEvaluator& ev, std::span<const PreferenceTuple> batch,
                       double weight) const {
    double value = 0.0;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (const auto& tup : batch) {
      if (tup.tau0.length() != tup.tau1.length())
        throw DimensionError("ce_loss: trajectories in a tuple differ in length");
      const std::size_t i0 = ev.intern(tup.tau0);
      const std::size_t i1 = ev.intern(tup.tau1);
      const double s0 = ev.sum(i0);
      const double s1 = ev.sum(i1);
      const double p0 = stable_sigmoid(s0 - s1);
      double d0;  // dL/dS0 for this tuple
      if (tup.label == PreferenceLabel::prefer0) {
        value += softplus(s1 - s0);
        d0 = p0 - 1.0;
      } else {
        value += softplus(s0 - s1);
        d0 = p0;
      }
      ev.add_coeff_all(i0, weight * inv * d0);
      ev.add_coeff_all(i1, weight * inv * -d0);
    }
    return value * inv;
  }

  double accumulate_triplet(BatchEvaluator& ev, std::span<const Trajectory* const> anchors,
                            std::span<const PreferenceTuple> tuples, TripletMode mode, double margin,
                            double weight) const {
    double value = 0.0;
    const double inv = 1.0 / static_cast<double>(anchors.size() * tuples.size());
    for (const Trajectory* anchor : anchors) {
      const std::size_t ia = ev.intern(*anchor);
      for (const auto& tup : tuples) {
        const std::size_t ig = ev.intern(tup.preferred());
        const std::size_t ib = ev.intern(tup.dispreferred());
        const auto& ra = ev.rewards(ia);
        const auto& rg = ev.rewards(ig);
        const auto& rb = ev.rewards(ib);
        if (ra.size() != rg.size() || ra.size() != rb.size())
          throw DimensionError("triplet_loss: trajectory length mismatch");
        const double dpos = squared_distance(ra, rg);
        const double dneg_sq = squared_distance(ra, rb);
        const double hinge = triplet_hinge(dpos, dneg_sq, margin, mode);
        if (hinge <= 0.0) continue;
        value += hinge;
        // Active hinge: d/dR(tau) [dpos - neg(dneg_sq) + m].
        double neg_factor;  // d neg / d dneg_sq
        if (mode == TripletMode::symmetric_squared) {
          neg_factor = 1.0;
        } else {
          // d sqrt(x)/dx = 1/(2 sqrt(x)); undefined at 0, subgradient 0 there
          neg_factor = dneg_sq > 0.0 ? 0.5 / std::sqrt(dneg_sq) : 0.0;
        }
        const double w = weight * inv;
        for (std::size_t t = 0; t < ra.size(); ++t) {
          const double ga = 2.0 * (ra[t] - rg[t]);
          const double gb = 2.0 * (ra[t] - rb[t]);
          ev.add_coeff(ia, t, w * (ga - neg_factor * gb));
          ev.add_coeff(ig, t, w * -ga);
          ev.add_coeff(ib, t, w * neg_factor * gb);
        }
      }
    }
    return value * inv;
  }

  double accumulate_ad(std::span<const ActionDistancePair> batch, std::vector<double>* grad_accum,
                       double weight, double distance_scale) const {
    if (grad_accum != nullptr && grad_accum->size() != params_.size())
      grad_accum->resize(params_.size(), 0.0);
    thread_local std::vector<double> input_i, input_j;
    thread_local ForwardTrace trace_i, trace_j;
    double value = 0.0;
    const double inv = 1.0 / static_cast<double>(batch.size());
    const std::size_t pen_layer = spec_.size() >= 2 ? spec_.size() - 2 : 0;
    std::vector<double> pen_grad;
    for (const auto& pair : batch) {
      encode(pair.s_i, pair.a_i, input_i);
      encode(pair.s_j, pair.a_j, input_j);
      forward(params_, spec_, input_i, trace_i);
      forward(params_, spec_, input_j, trace_j);
      const auto& ei = trace_i.penultimate();
      const auto& ej = trace_j.penultimate();
      const double dist_sq = squared_distance(ei, ej);
      const double target = static_cast<double>(pair.d_y) / distance_scale;
      const double resid = dist_sq - target;
      value += resid * resid;
      if (grad_accum == nullptr || spec_.size() < 2) continue;
      // dL/d ei = 2 resid * 2 (ei - ej); opposite sign for ej.
      pen_grad.resize(ei.size());
      const double c = weight * inv * 4.0 * resid;
      for (std::size_t k = 0; k < ei.size(); ++k) pen_grad[k] = c * (ei[k] - ej[k]);
      backward_from_layer(params_, spec_, trace_i, pen_layer, pen_grad, *grad_accum);
      for (auto& g : pen_grad) g = -g;
      backward_from_layer(params_, spec_, trace_j, pen_layer, pen_grad, *grad_accum);
    }
    return value * inv;
  }

  RewardModelConfig cfg_;
  NetSpec spec_;
  std::vector<double> params_;
};

}  // namespace pbrl
