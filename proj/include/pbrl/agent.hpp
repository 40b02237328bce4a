#pragma once

// Policy learner and trajectory bank. The policy is a tabular soft
// Q-learner over discretized grid cells with Boltzmann exploration; it only
// ever sees LearnerTransition views, which carry the relabeled model reward
// and not the hidden true reward.

#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "pbrl/env.hpp"
#include "pbrl/errors.hpp"
#include "pbrl/reward_model.hpp"
#include "pbrl/rng.hpp"

namespace pbrl {

// What the policy update is allowed to read.
struct LearnerTransition {
  std::span<const double> state;
  int action = 0;
  std::span<const double> next_state;
  double reward = 0.0;  // relabeled model reward (or wired true reward in the upper baseline)
  bool done = false;
};

inline LearnerTransition learner_view(const Transition& t) {
  return LearnerTransition{t.state, t.action, t.next_state, t.learner_reward, t.done};
}

// Insertion-ordered replay bank D_tau; evicts the oldest beyond capacity.
class TrajectoryBank {
public:
  explicit TrajectoryBank(std::size_t capacity) : capacity_(capacity) {}

  void add(Trajectory traj) {
    total_transitions_ += traj.length();
    trajectories_.push_back(std::move(traj));
    if (trajectories_.size() > capacity_) {
      total_transitions_ -= trajectories_.front().length();
      trajectories_.pop_front();
    }
  }

  std::size_t size() const { return trajectories_.size(); }
  bool empty() const { return trajectories_.empty(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t transition_count() const { return total_transitions_; }

  const Trajectory& at(std::size_t i) const { return trajectories_.at(i); }
  Trajectory& at(std::size_t i) { return trajectories_.at(i); }

  // The k most recently added trajectories, oldest of the window first.
  std::vector<const Trajectory*> last_k(std::size_t k) const {
    const std::size_t n = std::min(k, trajectories_.size());
    std::vector<const Trajectory*> out;
    out.reserve(n);
    for (std::size_t i = trajectories_.size() - n; i < trajectories_.size(); ++i)
      out.push_back(&trajectories_[i]);
    return out;
  }

  // Uniform transition lookup by flat index (for replay sampling).
  const Transition& transition(std::size_t flat) const {
    for (const auto& t : trajectories_) {
      if (flat < t.length()) return t.transitions[flat];
      flat -= t.length();
    }
    throw DimensionError("transition index out of range");
  }

private:
  std::size_t capacity_;
  std::deque<Trajectory> trajectories_;
  std::size_t total_transitions_ = 0;
};

// Rewrites every stored transition's learner-facing reward under the current
// model. Returns the number of transitions touched.
inline std::size_t relabel(TrajectoryBank& bank, const RewardModel& model) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    for (auto& tr : bank.at(i).transitions) {
      tr.learner_reward = model.reward(tr.state, tr.action);
      ++n;
    }
  }
  return n;
}

struct SoftQConfig {
  int width = 10;
  int height = 10;
  int n_actions = kGridActions;
  double gamma = 0.99;
  double alpha = 0.1;
  double temperature = 1.0;
};

// Tabular soft Q-learning. The backup subtracts the uniform-policy constant
// T*log|A| from the soft value so that an all-zero table has value zero; with
// sparse rewards the raw logsumexp bonus otherwise swamps the signal during
// the transient.
class SoftQPolicy {
public:
  explicit SoftQPolicy(SoftQConfig cfg = {})
      : cfg_(cfg), q_(static_cast<std::size_t>(cfg.width) * cfg.height * cfg.n_actions, 0.0) {}

  const SoftQConfig& config() const { return cfg_; }
  double temperature() const { return cfg_.temperature; }
  void set_temperature(double t) {
    if (t <= 0.0) throw ConfigError("temperature must be positive");
    cfg_.temperature = t;
  }

  int state_index(std::span<const double> state) const {
    const int x = static_cast<int>(std::lround(state[0] * cfg_.width));
    const int y = static_cast<int>(std::lround(state[1] * cfg_.height));
    if (x < 0 || x >= cfg_.width || y < 0 || y >= cfg_.height)
      throw DimensionError("observation outside the grid");
    return y * cfg_.width + x;
  }

  double q(int state, int action) const { return q_[static_cast<std::size_t>(state) * cfg_.n_actions + action]; }
  double& q(int state, int action) { return q_[static_cast<std::size_t>(state) * cfg_.n_actions + action]; }
  const std::vector<double>& table() const { return q_; }
  std::vector<double>& table() { return q_; }

  // Boltzmann sample proportional to exp(Q/T).
  int act(std::span<const double> state, Rng& rng) const {
    const int s = state_index(state);
    const int n = cfg_.n_actions;
    double mx = q(s, 0);
    for (int a = 1; a < n; ++a) mx = std::max(mx, q(s, a));
    double z = 0.0;
    thread_local std::vector<double> w;
    w.resize(n);
    for (int a = 0; a < n; ++a) {
      w[a] = std::exp((q(s, a) - mx) / cfg_.temperature);
      z += w[a];
    }
    double u = rng.uniform() * z;
    for (int a = 0; a < n; ++a) {
      u -= w[a];
      if (u <= 0.0) return a;
    }
    return n - 1;
  }

  // Greedy action with deterministic lowest-index tie breaking (evaluation).
  int act_greedy(std::span<const double> state) const {
    const int s = state_index(state);
    int best = 0;
    for (int a = 1; a < cfg_.n_actions; ++a)
      if (q(s, a) > q(s, best)) best = a;
    return best;
  }

  // Soft value of a state under the current temperature, measured relative to
  // the uniform policy: T * (logsumexp(Q/T) - log n).
  double soft_value(int state) const {
    const int n = cfg_.n_actions;
    double mx = q(state, 0);
    for (int a = 1; a < n; ++a) mx = std::max(mx, q(state, a));
    double acc = 0.0;
    for (int a = 0; a < n; ++a) acc += std::exp((q(state, a) - mx) / cfg_.temperature);
    return cfg_.temperature * (mx / cfg_.temperature + std::log(acc) - std::log(static_cast<double>(n)));
  }

  void update(const LearnerTransition& t) {
    const int s = state_index(t.state);
    double target = t.reward;
    if (!t.done) target += cfg_.gamma * soft_value(state_index(t.next_state));
    if (!std::isfinite(target))
      throw NonFiniteError("soft-Q update produced a non-finite target (reward " +
                           std::to_string(t.reward) + ")");
    double& qa = q(s, t.action);
    qa += cfg_.alpha * (target - qa);
  }

private:
  SoftQConfig cfg_;
  std::vector<double> q_;
};

}  // namespace pbrl
