#pragma once

// Checkpoints: reward parameters as a flat little-endian binary file with a
// JSON sidecar describing the layer spec, plus policy table, D_h, and RNG
// streams. Enough to resume a run (the trajectory bank is rebuilt by
// collection, not persisted).

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbrl/agent.hpp"
#include "pbrl/approximator.hpp"
#include "pbrl/errors.hpp"
#include "pbrl/reward_model.hpp"

namespace pbrl {

inline void write_u64_le(std::ofstream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline std::uint64_t read_u64_le(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw ConfigError("checkpoint: unexpected end of parameter file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

// <prefix>.bin holds count then raw IEEE-754 doubles, little-endian; the
// round trip is bit-exact (NaN payloads included).
inline void save_params(const std::string& prefix, std::span<const double> params,
                        const NetSpec& spec) {
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("cannot write " + prefix + ".bin");
  write_u64_le(bin, params.size());
  for (double d : params) write_u64_le(bin, std::bit_cast<std::uint64_t>(d));

  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec)
    layers.push_back({{"input_width", l.input_width},
                      {"output_width", l.output_width},
                      {"nonlinearity", to_string(l.nonlinearity)}});
  nlohmann::json side{{"format", "pbrl-params-v1"},
                      {"parameter_count", params.size()},
                      {"layers", layers}};
  std::ofstream js(prefix + ".json");
  if (!js) throw ConfigError("cannot write " + prefix + ".json");
  js << side.dump(2) << '\n';
}

inline std::pair<std::vector<double>, NetSpec> load_params(const std::string& prefix) {
  std::ifstream js(prefix + ".json");
  if (!js) throw ConfigError("cannot open " + prefix + ".json");
  nlohmann::json side = nlohmann::json::parse(js);
  NetSpec spec;
  for (const auto& l : side.at("layers"))
    spec.push_back({l.at("input_width").get<int>(), l.at("output_width").get<int>(),
                    nonlinearity_from_string(l.at("nonlinearity").get<std::string>())});
  validate_spec(spec);

  std::ifstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("cannot open " + prefix + ".bin");
  const std::uint64_t n = read_u64_le(bin);
  if (n != param_count(spec))
    throw ConfigError("checkpoint: parameter count does not match the sidecar spec");
  std::vector<double> params(n);
  for (auto& d : params) d = std::bit_cast<double>(read_u64_le(bin));
  return {std::move(params), std::move(spec)};
}

struct TrainerCheckpoint {
  std::vector<double> reward_params;
  NetSpec reward_spec;
  std::vector<double> policy_table;
  std::vector<PreferenceTuple> dh;
  std::int64_t global_step = 0;
  std::int64_t session = 0;
  int feedback_used = 0;
  std::int64_t next_trajectory_id = 0;
  std::map<std::string, std::string> rng_states;
};

inline nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json trs = nlohmann::json::array();
  for (const auto& tr : t.transitions)
    trs.push_back({{"state", tr.state},
                   {"action", tr.action},
                   {"next_state", tr.next_state},
                   {"true_reward", tr.true_reward},
                   {"done", tr.done},
                   {"learner_reward", tr.learner_reward}});
  return {{"id", t.id}, {"policy_stamp", t.policy_stamp}, {"transitions", trs}};
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory t;
  t.id = j.at("id").get<std::int64_t>();
  t.policy_stamp = j.at("policy_stamp").get<std::int64_t>();
  for (const auto& tr : j.at("transitions")) {
    Transition x;
    x.state = tr.at("state").get<std::vector<double>>();
    x.action = tr.at("action").get<int>();
    x.next_state = tr.at("next_state").get<std::vector<double>>();
    x.true_reward = tr.at("true_reward").get<double>();
    x.done = tr.at("done").get<bool>();
    x.learner_reward = tr.at("learner_reward").get<double>();
    t.transitions.push_back(std::move(x));
  }
  return t;
}

inline void save_checkpoint(const std::string& dir, const TrainerCheckpoint& ck) {
  std::filesystem::create_directories(dir);
  save_params(dir + "/reward", ck.reward_params, ck.reward_spec);

  nlohmann::json dh = nlohmann::json::array();
  for (const auto& t : ck.dh)
    dh.push_back({{"label", t.label == PreferenceLabel::prefer0 ? 0 : 1},
                  {"tau0", trajectory_to_json(t.tau0)},
                  {"tau1", trajectory_to_json(t.tau1)}});
  nlohmann::json rng = nlohmann::json::object();
  for (const auto& [k, v] : ck.rng_states) rng[k] = v;
  nlohmann::json state{{"format", "pbrl-checkpoint-v1"},
                       {"global_step", ck.global_step},
                       {"session", ck.session},
                       {"feedback_used", ck.feedback_used},
                       {"next_trajectory_id", ck.next_trajectory_id},
                       {"policy_table", ck.policy_table},
                       {"dh", dh},
                       {"rng", rng}};
  std::ofstream out(dir + "/state.json");
  if (!out) throw ConfigError("cannot write checkpoint state: " + dir);
  out << state.dump() << '\n';
}

inline TrainerCheckpoint load_checkpoint(const std::string& dir) {
  TrainerCheckpoint ck;
  auto [params, spec] = load_params(dir + "/reward");
  ck.reward_params = std::move(params);
  ck.reward_spec = std::move(spec);
  std::ifstream in(dir + "/state.json");
  if (!in) throw ConfigError("cannot open checkpoint state: " + dir);
  nlohmann::json state = nlohmann::json::parse(in);
  ck.global_step = state.at("global_step").get<std::int64_t>();
  ck.session = state.at("session").get<std::int64_t>();
  ck.feedback_used = state.at("feedback_used").get<int>();
  ck.next_trajectory_id = state.at("next_trajectory_id").get<std::int64_t>();
  ck.policy_table = state.at("policy_table").get<std::vector<double>>();
  for (const auto& t : state.at("dh")) {
    PreferenceTuple tup;
    tup.label = t.at("label").get<int>() == 0 ? PreferenceLabel::prefer0 : PreferenceLabel::prefer1;
    tup.tau0 = trajectory_from_json(t.at("tau0"));
    tup.tau1 = trajectory_from_json(t.at("tau1"));
    ck.dh.push_back(std::move(tup));
  }
  for (const auto& [k, v] : state.at("rng").items()) ck.rng_states[k] = v.get<std::string>();
  return ck;
}

}  // namespace pbrl
