#pragma once

// Run configuration: every tunable in one place, a dotted key-value text
// format for config files, and an exact resolved-config snapshot so any run
// can be reproduced from its out directory.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pbrl/agent.hpp"
#include "pbrl/approximator.hpp"
#include "pbrl/env.hpp"
#include "pbrl/errors.hpp"
#include "pbrl/reward_model.hpp"

namespace pbrl {

enum class LossArm { ce_only, ce_triplet, ce_ad, combined, true_reward };

inline const char* to_string(LossArm a) {
  switch (a) {
    case LossArm::ce_only: return "ce";
    case LossArm::ce_triplet: return "ce,triplet";
    case LossArm::ce_ad: return "ce,ad";
    case LossArm::combined: return "ce,triplet,ad";
    case LossArm::true_reward: return "true-reward";
  }
  return "?";
}

// Short names used in file paths and run ids.
inline const char* arm_slug(LossArm a) {
  switch (a) {
    case LossArm::ce_only: return "ce";
    case LossArm::ce_triplet: return "ce-triplet";
    case LossArm::ce_ad: return "ce-ad";
    case LossArm::combined: return "combined";
    case LossArm::true_reward: return "true-reward";
  }
  return "?";
}

inline LossArm loss_arm_from_string(const std::string& s) {
  if (s == "ce") return LossArm::ce_only;
  if (s == "ce,triplet" || s == "ce-triplet") return LossArm::ce_triplet;
  if (s == "ce,ad" || s == "ce-ad") return LossArm::ce_ad;
  if (s == "ce,triplet,ad" || s == "combined") return LossArm::combined;
  if (s == "true-reward") return LossArm::true_reward;
  throw ConfigError("unknown loss arm: '" + s +
                    "' (expected ce | ce,triplet | ce,ad | ce,triplet,ad | true-reward)");
}

enum class QuerySampler { uniform, disagreement };

inline const char* to_string(QuerySampler s) {
  return s == QuerySampler::uniform ? "uniform" : "disagreement";
}

inline QuerySampler sampler_from_string(const std::string& s) {
  if (s == "uniform") return QuerySampler::uniform;
  if (s == "disagreement") return QuerySampler::disagreement;
  throw ConfigError("unknown sampler: " + s);
}

enum class OracleKind { synthetic, human };

inline const char* to_string(OracleKind k) { return k == OracleKind::synthetic ? "synthetic" : "human"; }

inline OracleKind oracle_from_string(const std::string& s) {
  if (s == "synthetic") return OracleKind::synthetic;
  if (s == "human") return OracleKind::human;
  throw ConfigError("unknown oracle kind: " + s);
}

struct TrainerConfig {
  int max_feedback = 200;
  int queries_per_session = 10;
  int reward_update_epochs = 40;
  int reward_batch_size = 16;
  int steps_between_sessions = 500;
  int k_window = 10;
  int pairs_per_trajectory = 20;
  double lambda_ce = 1.0;
  double lambda_t = 0.5;
  double lambda_a = 3.0;
  double margin = 0.5;
  QuerySampler sampler = QuerySampler::uniform;
  int warmup_steps = 4000;
  int total_steps = 30000;
  int segment_length = 50;  // H, the query segment length
  TripletMode triplet_mode = TripletMode::symmetric_squared;
  // Anchors for the triplet term: sampled per epoch from the most recent
  // trajectories, held back until a few labels exist.
  int anchors_per_epoch = 8;
  int anchor_window = 20;
  int anchor_min_labels = 8;
  int ad_batch_size = 64;
  // Target of the action-distance regression is d_y / distance_scale;
  // 0 means "use segment_length".
  double distance_scale = 0.0;
  bool reward_reset_per_session = true;
  int replay_updates_per_step = 4;
  int relabel_burst = 2000;
  int eval_episodes = 10;
  int spearman_samples = 512;
  int spearman_window = 20;
  int bank_capacity = 2000;
  double temperature_start = 4.0;
  double temperature_end = 0.05;
  int checkpoint_every = 10;  // in sessions; 0 disables periodic checkpoints
  int ensemble_size = 3;      // reward models kept when sampler = disagreement

  double resolved_distance_scale() const {
    return distance_scale > 0.0 ? distance_scale : static_cast<double>(segment_length);
  }

  void validate() const {
    if (max_feedback < 0) throw ConfigError("max_feedback must be >= 0");
    if (queries_per_session <= 0) throw ConfigError("queries_per_session must be positive");
    if (reward_update_epochs <= 0) throw ConfigError("reward_update_epochs must be positive");
    if (reward_batch_size <= 0) throw ConfigError("reward_batch_size must be positive");
    if (steps_between_sessions <= 0) throw ConfigError("steps_between_sessions must be positive");
    if (k_window <= 0) throw ConfigError("k_window must be positive");
    if (pairs_per_trajectory <= 0) throw ConfigError("pairs_per_trajectory must be positive");
    if (lambda_ce < 0 || lambda_t < 0 || lambda_a < 0) throw ConfigError("lambdas must be >= 0");
    if (segment_length < 2) throw ConfigError("segment_length must be at least 2");
    if (total_steps <= 0) throw ConfigError("total_steps must be positive");
    if (temperature_start <= 0 || temperature_end <= 0) throw ConfigError("temperatures must be positive");
    if (ensemble_size < 2) throw ConfigError("ensemble_size must be >= 2");
  }
};

struct OracleSettings {
  OracleKind kind = OracleKind::synthetic;
  double flip_probability = 0.0;
  int queue_capacity = 64;
};

struct PolicySettings {
  double gamma = 0.99;
  double alpha = 0.1;
};

struct RunConfig {
  std::string run_id;  // defaults to "<arm>-s<seed>" when empty
  std::uint64_t seed = 1;
  LossArm losses = LossArm::combined;
  std::string out_dir = "out";
  GridWorldConfig grid;
  RewardModelConfig reward;
  OptimizerConfig optimizer{OptimizerKind::adam, 1e-3, 0.9, 0.9, 0.999, 1e-8, 1e-4};
  PolicySettings policy;
  TrainerConfig trainer;
  OracleSettings oracle;

  std::string resolved_run_id() const {
    if (!run_id.empty()) return run_id;
    return std::string(arm_slug(losses)) + "-s" + std::to_string(seed);
  }

  void validate() const {
    grid.validate();
    trainer.validate();
    if (grid.episode_cap < trainer.segment_length)
      throw ConfigError("episode_cap must be >= segment_length");
    if (reward.state_dim != 2 || reward.n_actions != kGridActions)
      throw ConfigError("reward model input must match the gridworld observation/action space");
  }
};

// ---------------------------------------------------------------------------
// Dotted key-value text format. Lines are `key = value`; '#' starts a
// comment. Unknown keys are errors so typos cannot silently change a run.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

inline std::string int_list_to_string(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace detail

// Shortest decimal form that round-trips to the same double, so a resolved
// config reproduces the run bit-exactly.
inline std::string format_config_double(double v) {
  char buf[64];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::stod(buf) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Every key in canonical order; serialization and parsing share this table.
inline std::map<std::string, std::string> to_key_values(const RunConfig& c) {
  std::map<std::string, std::string> kv;
  kv["run.id"] = c.run_id;
  kv["run.seed"] = std::to_string(c.seed);
  kv["run.losses"] = to_string(c.losses);
  kv["run.out_dir"] = c.out_dir;
  kv["env.width"] = std::to_string(c.grid.width);
  kv["env.height"] = std::to_string(c.grid.height);
  kv["env.start_x"] = std::to_string(c.grid.start.x);
  kv["env.start_y"] = std::to_string(c.grid.start.y);
  kv["env.goal_x"] = std::to_string(c.grid.goal.x);
  kv["env.goal_y"] = std::to_string(c.grid.goal.y);
  kv["env.reward_mode"] = to_string(c.grid.reward_mode);
  kv["env.episode_cap"] = std::to_string(c.grid.episode_cap);
  kv["env.slip_probability"] = format_config_double(c.grid.slip_probability);
  kv["reward.hidden_widths"] = detail::int_list_to_string(c.reward.hidden_widths);
  kv["reward.hidden_nonlinearity"] = to_string(c.reward.hidden_nonlinearity);
  kv["reward.output_bound"] = format_config_double(c.reward.output_bound);
  kv["reward.final_bias_init"] = format_config_double(c.reward.final_bias_init);
  kv["optimizer.kind"] = to_string(c.optimizer.kind);
  kv["optimizer.learning_rate"] = format_config_double(c.optimizer.learning_rate);
  kv["optimizer.momentum"] = format_config_double(c.optimizer.momentum);
  kv["optimizer.weight_decay"] = format_config_double(c.optimizer.weight_decay);
  kv["policy.gamma"] = format_config_double(c.policy.gamma);
  kv["policy.alpha"] = format_config_double(c.policy.alpha);
  kv["trainer.max_feedback"] = std::to_string(c.trainer.max_feedback);
  kv["trainer.queries_per_session"] = std::to_string(c.trainer.queries_per_session);
  kv["trainer.reward_update_epochs"] = std::to_string(c.trainer.reward_update_epochs);
  kv["trainer.reward_batch_size"] = std::to_string(c.trainer.reward_batch_size);
  kv["trainer.steps_between_sessions"] = std::to_string(c.trainer.steps_between_sessions);
  kv["trainer.k_window"] = std::to_string(c.trainer.k_window);
  kv["trainer.pairs_per_trajectory"] = std::to_string(c.trainer.pairs_per_trajectory);
  kv["trainer.lambda_ce"] = format_config_double(c.trainer.lambda_ce);
  kv["trainer.lambda_t"] = format_config_double(c.trainer.lambda_t);
  kv["trainer.lambda_a"] = format_config_double(c.trainer.lambda_a);
  kv["trainer.margin"] = format_config_double(c.trainer.margin);
  kv["trainer.sampler"] = to_string(c.trainer.sampler);
  kv["trainer.warmup_steps"] = std::to_string(c.trainer.warmup_steps);
  kv["trainer.total_steps"] = std::to_string(c.trainer.total_steps);
  kv["trainer.segment_length"] = std::to_string(c.trainer.segment_length);
  kv["trainer.triplet_mode"] = to_string(c.trainer.triplet_mode);
  kv["trainer.anchors_per_epoch"] = std::to_string(c.trainer.anchors_per_epoch);
  kv["trainer.anchor_window"] = std::to_string(c.trainer.anchor_window);
  kv["trainer.anchor_min_labels"] = std::to_string(c.trainer.anchor_min_labels);
  kv["trainer.ad_batch_size"] = std::to_string(c.trainer.ad_batch_size);
  kv["trainer.distance_scale"] = format_config_double(c.trainer.distance_scale);
  kv["trainer.reward_reset_per_session"] = c.trainer.reward_reset_per_session ? "true" : "false";
  kv["trainer.replay_updates_per_step"] = std::to_string(c.trainer.replay_updates_per_step);
  kv["trainer.relabel_burst"] = std::to_string(c.trainer.relabel_burst);
  kv["trainer.eval_episodes"] = std::to_string(c.trainer.eval_episodes);
  kv["trainer.spearman_samples"] = std::to_string(c.trainer.spearman_samples);
  kv["trainer.spearman_window"] = std::to_string(c.trainer.spearman_window);
  kv["trainer.bank_capacity"] = std::to_string(c.trainer.bank_capacity);
  kv["trainer.temperature_start"] = format_config_double(c.trainer.temperature_start);
  kv["trainer.temperature_end"] = format_config_double(c.trainer.temperature_end);
  kv["trainer.checkpoint_every"] = std::to_string(c.trainer.checkpoint_every);
  kv["trainer.ensemble_size"] = std::to_string(c.trainer.ensemble_size);
  kv["oracle.kind"] = to_string(c.oracle.kind);
  kv["oracle.flip_probability"] = format_config_double(c.oracle.flip_probability);
  kv["oracle.queue_capacity"] = std::to_string(c.oracle.queue_capacity);
  return kv;
}

inline void apply_key_value(RunConfig& c, const std::string& key, const std::string& value) {
  try {
    if (key == "run.id") c.run_id = value;
    else if (key == "run.seed") c.seed = std::stoull(value);
    else if (key == "run.losses") c.losses = loss_arm_from_string(value);
    else if (key == "run.out_dir") c.out_dir = value;
    else if (key == "env.width") c.grid.width = std::stoi(value);
    else if (key == "env.height") c.grid.height = std::stoi(value);
    else if (key == "env.start_x") c.grid.start.x = std::stoi(value);
    else if (key == "env.start_y") c.grid.start.y = std::stoi(value);
    else if (key == "env.goal_x") c.grid.goal.x = std::stoi(value);
    else if (key == "env.goal_y") c.grid.goal.y = std::stoi(value);
    else if (key == "env.reward_mode") c.grid.reward_mode = reward_mode_from_string(value);
    else if (key == "env.episode_cap") c.grid.episode_cap = std::stoi(value);
    else if (key == "env.slip_probability") c.grid.slip_probability = std::stod(value);
    else if (key == "reward.hidden_widths") c.reward.hidden_widths = detail::parse_int_list(value);
    else if (key == "reward.hidden_nonlinearity") c.reward.hidden_nonlinearity = nonlinearity_from_string(value);
    else if (key == "reward.output_bound") c.reward.output_bound = std::stod(value);
    else if (key == "reward.final_bias_init") c.reward.final_bias_init = std::stod(value);
    else if (key == "optimizer.kind") c.optimizer.kind = optimizer_from_string(value);
    else if (key == "optimizer.learning_rate") c.optimizer.learning_rate = std::stod(value);
    else if (key == "optimizer.momentum") c.optimizer.momentum = std::stod(value);
    else if (key == "optimizer.weight_decay") c.optimizer.weight_decay = std::stod(value);
    else if (key == "policy.gamma") c.policy.gamma = std::stod(value);
    else if (key == "policy.alpha") c.policy.alpha = std::stod(value);
    else if (key == "trainer.max_feedback") c.trainer.max_feedback = std::stoi(value);
    else if (key == "trainer.queries_per_session") c.trainer.queries_per_session = std::stoi(value);
    else if (key == "trainer.reward_update_epochs") c.trainer.reward_update_epochs = std::stoi(value);
    else if (key == "trainer.reward_batch_size") c.trainer.reward_batch_size = std::stoi(value);
    else if (key == "trainer.steps_between_sessions") c.trainer.steps_between_sessions = std::stoi(value);
    else if (key == "trainer.k_window") c.trainer.k_window = std::stoi(value);
    else if (key == "trainer.pairs_per_trajectory") c.trainer.pairs_per_trajectory = std::stoi(value);
    else if (key == "trainer.lambda_ce") c.trainer.lambda_ce = std::stod(value);
    else if (key == "trainer.lambda_t") c.trainer.lambda_t = std::stod(value);
    else if (key == "trainer.lambda_a") c.trainer.lambda_a = std::stod(value);
    else if (key == "trainer.margin") c.trainer.margin = std::stod(value);
    else if (key == "trainer.sampler") c.trainer.sampler = sampler_from_string(value);
    else if (key == "trainer.warmup_steps") c.trainer.warmup_steps = std::stoi(value);
    else if (key == "trainer.total_steps") c.trainer.total_steps = std::stoi(value);
    else if (key == "trainer.segment_length") c.trainer.segment_length = std::stoi(value);
    else if (key == "trainer.triplet_mode") c.trainer.triplet_mode = triplet_mode_from_string(value);
    else if (key == "trainer.anchors_per_epoch") c.trainer.anchors_per_epoch = std::stoi(value);
    else if (key == "trainer.anchor_window") c.trainer.anchor_window = std::stoi(value);
    else if (key == "trainer.anchor_min_labels") c.trainer.anchor_min_labels = std::stoi(value);
    else if (key == "trainer.ad_batch_size") c.trainer.ad_batch_size = std::stoi(value);
    else if (key == "trainer.distance_scale") c.trainer.distance_scale = std::stod(value);
    else if (key == "trainer.reward_reset_per_session") c.trainer.reward_reset_per_session = (value == "true" || value == "1");
    else if (key == "trainer.replay_updates_per_step") c.trainer.replay_updates_per_step = std::stoi(value);
    else if (key == "trainer.relabel_burst") c.trainer.relabel_burst = std::stoi(value);
    else if (key == "trainer.eval_episodes") c.trainer.eval_episodes = std::stoi(value);
    else if (key == "trainer.spearman_samples") c.trainer.spearman_samples = std::stoi(value);
    else if (key == "trainer.spearman_window") c.trainer.spearman_window = std::stoi(value);
    else if (key == "trainer.bank_capacity") c.trainer.bank_capacity = std::stoi(value);
    else if (key == "trainer.temperature_start") c.trainer.temperature_start = std::stod(value);
    else if (key == "trainer.temperature_end") c.trainer.temperature_end = std::stod(value);
    else if (key == "trainer.checkpoint_every") c.trainer.checkpoint_every = std::stoi(value);
    else if (key == "trainer.ensemble_size") c.trainer.ensemble_size = std::stoi(value);
    else if (key == "oracle.kind") c.oracle.kind = oracle_from_string(value);
    else if (key == "oracle.flip_probability") c.oracle.flip_probability = std::stod(value);
    else if (key == "oracle.queue_capacity") c.oracle.queue_capacity = std::stoi(value);
    else throw ConfigError("unknown config key: " + key);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("bad value for " + key + ": '" + value + "' (" + e.what() + ")");
  }
}

inline void apply_config_text(RunConfig& c, std::istream& in, const std::string& origin) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    apply_key_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
}

inline void load_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  apply_config_text(c, in, path);
}

// Full snapshot; loading it back reproduces the run exactly.
inline std::string resolved_config_text(const RunConfig& c) {
  std::ostringstream os;
  for (const auto& [k, v] : to_key_values(c)) os << k << " = " << v << '\n';
  return os.str();
}

inline void write_resolved_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write resolved config: " + path);
  out << resolved_config_text(c);
}

// Environment presets selectable via --env.
inline void apply_env_preset(RunConfig& c, const std::string& name) {
  if (name == "gridworld") {
    c.grid = GridWorldConfig{};
  } else if (name == "gridworld-shaped") {
    c.grid = GridWorldConfig{};
    c.grid.reward_mode = RewardMode::shaped;
  } else {
    throw ConfigError("unknown env preset: " + name + " (gridworld | gridworld-shaped)");
  }
}

}  // namespace pbrl
