#pragma once

// Environment contract plus a deterministic gridworld. The hidden true reward
// travels in Transition::true_reward; learner-side code only ever receives
// LearnerTransition views (see agent.hpp), which do not carry it.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbrl/errors.hpp"
#include "pbrl/rng.hpp"

namespace pbrl {

enum class RewardMode { sparse, shaped };

inline const char* to_string(RewardMode m) { return m == RewardMode::sparse ? "sparse" : "shaped"; }

inline RewardMode reward_mode_from_string(const std::string& s) {
  if (s == "sparse") return RewardMode::sparse;
  if (s == "shaped") return RewardMode::shaped;
  throw ConfigError("unknown reward mode: " + s);
}

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

struct GridWorldConfig {
  int width = 10;
  int height = 10;
  Cell start{0, 0};
  Cell goal{9, 9};
  RewardMode reward_mode = RewardMode::sparse;
  int episode_cap = 50;
  double slip_probability = 0.1;

  void validate() const {
    if (width <= 0 || height <= 0) throw ConfigError("grid dimensions must be positive");
    if (start == goal) throw ConfigError("start must differ from goal");
    if (episode_cap <= 0) throw ConfigError("episode_cap must be positive");
    if (slip_probability < 0.0 || slip_probability >= 1.0)
      throw ConfigError("slip_probability must lie in [0, 1)");
  }
};

struct Transition {
  std::vector<double> state;
  int action = 0;
  std::vector<double> next_state;
  double true_reward = 0.0;  // oracle/evaluator channel; never read by the learner
  bool done = false;
  double learner_reward = 0.0;  // written by relabel(); what the policy trains on
};

struct Trajectory {
  std::vector<Transition> transitions;
  std::int64_t id = 0;
  std::int64_t policy_stamp = 0;  // global step at collection time

  std::size_t length() const { return transitions.size(); }
};

// Sum of the hidden rewards. Oracle/evaluator use only.
inline double true_return(const Trajectory& t) {
  double s = 0.0;
  for (const auto& tr : t.transitions) s += tr.true_reward;
  return s;
}

// Actions: 0=right(+x) 1=up(+y) 2=left(-x) 3=down(-y).
inline constexpr int kGridActions = 4;
inline constexpr int kDx[kGridActions] = {1, 0, -1, 0};
inline constexpr int kDy[kGridActions] = {0, 1, 0, -1};

class GridWorld {
public:
  GridWorld(GridWorldConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
    cfg_.validate();
    reset();
  }

  const GridWorldConfig& config() const { return cfg_; }
  int action_count() const { return kGridActions; }
  int observation_width() const { return 2; }

  // Observation: (x/width, y/height).
  std::vector<double> observe() const {
    return {static_cast<double>(pos_.x) / cfg_.width, static_cast<double>(pos_.y) / cfg_.height};
  }

  std::vector<double> reset() {
    pos_ = cfg_.start;
    steps_ = 0;
    done_ = false;
    return observe();
  }

  bool episode_done() const { return done_; }
  Cell agent_cell() const { return pos_; }
  int episode_steps() const { return steps_; }

  Transition step(int action) {
    if (done_) throw InvalidStateError("step() called on a finished episode; reset() first");
    if (action < 0 || action >= kGridActions)
      throw DimensionError("action id out of range: " + std::to_string(action));

    Transition tr;
    tr.state = observe();
    tr.action = action;

    int a = action;
    if (cfg_.slip_probability > 0.0 && rng_.bernoulli(cfg_.slip_probability)) {
      // slip to a uniformly random perpendicular direction
      a = rng_.bernoulli(0.5) ? (action + 1) % 4 : (action + 3) % 4;
    }
    Cell next{pos_.x + kDx[a], pos_.y + kDy[a]};
    if (next.x < 0) next.x = 0;
    if (next.x >= cfg_.width) next.x = cfg_.width - 1;
    if (next.y < 0) next.y = 0;
    if (next.y >= cfg_.height) next.y = cfg_.height - 1;
    pos_ = next;
    ++steps_;

    if (cfg_.reward_mode == RewardMode::sparse) {
      tr.true_reward = (pos_ == cfg_.goal) ? 1.0 : 0.0;
    } else {
      const int dist = std::abs(pos_.x - cfg_.goal.x) + std::abs(pos_.y - cfg_.goal.y);
      tr.true_reward = -static_cast<double>(dist) / (cfg_.width + cfg_.height);
    }
    done_ = (pos_ == cfg_.goal) || (steps_ >= cfg_.episode_cap);
    tr.next_state = observe();
    tr.done = done_;
    return tr;
  }

private:
  GridWorldConfig cfg_;
  Rng rng_;
  Cell pos_{};
  int steps_ = 0;
  bool done_ = true;
};

// Collects exactly `horizon` transitions under `policy`, resetting whenever an
// episode finishes so a stored trajectory always has full length. Segments
// continue across resets; a terminal transition is recorded and the next one
// starts from the fresh reset state.
inline Trajectory rollout(GridWorld& env, const std::function<int(const std::vector<double>&)>& policy,
                          int horizon, std::int64_t id, std::int64_t policy_stamp) {
  Trajectory traj;
  traj.id = id;
  traj.policy_stamp = policy_stamp;
  traj.transitions.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    if (env.episode_done()) env.reset();
    const int a = policy(env.observe());
    traj.transitions.push_back(env.step(a));
  }
  return traj;
}

// Render payload for the label UI: {id, cells: [{x, y, action}]}. Cells are
// the source cells of each transition, denormalized to grid coordinates.
inline nlohmann::json to_render_json(const Trajectory& traj, const GridWorldConfig& cfg) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& tr : traj.transitions) {
    const int x = static_cast<int>(std::lround(tr.state.at(0) * cfg.width));
    const int y = static_cast<int>(std::lround(tr.state.at(1) * cfg.height));
    cells.push_back({{"x", x}, {"y", y}, {"action", tr.action}});
  }
  return nlohmann::json{{"id", traj.id}, {"cells", cells}};
}

}  // namespace pbrl
