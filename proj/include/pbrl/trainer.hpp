#pragma once

// The PbRL outer loop: collect rollouts, query under the feedback budget,
// retrain the reward model on the combined objective, rebuild the windowed
// D_p, relabel the bank, and keep the soft-Q policy chasing the latest
// reward.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pbrl/agent.hpp"
#include "pbrl/checkpoint.hpp"
#include "pbrl/config.hpp"
#include "pbrl/env.hpp"
#include "pbrl/errors.hpp"
#include "pbrl/metrics.hpp"
#include "pbrl/oracle.hpp"
#include "pbrl/reward_model.hpp"
#include "pbrl/rng.hpp"

namespace pbrl {

// ---------------------------------------------------------------------------
// D_p construction. For each of the last k trajectories, samples
// pairs_per_trajectory index pairs (i, j), j > i, uniformly; pairs whose
// index range crosses an episode reset are re-drawn (the action distance
// d_y = j - i is only meaningful within one episode).
// ---------------------------------------------------------------------------
inline ActionDistanceDataset build_dp(const TrajectoryBank& bank, int k_window,
                                      int pairs_per_trajectory, Rng& rng) {
  ActionDistanceDataset out;
  if (bank.empty()) return out;
  const auto window = bank.last_k(static_cast<std::size_t>(k_window));
  for (const Trajectory* traj : window) {
    const int h = static_cast<int>(traj->length());
    if (h < 2) continue;
    for (int p = 0; p < pairs_per_trajectory; ++p) {
      int i = 0, j = 0;
      bool ok = false;
      for (int attempt = 0; attempt < 20 && !ok; ++attempt) {
        i = rng.below_int(h - 1);
        j = i + 1 + rng.below_int(h - 1 - i);
        ok = true;
        for (int q = i; q < j; ++q) {
          if (traj->transitions[q].done) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) continue;
      ActionDistancePair pair;
      pair.s_i = traj->transitions[i].state;
      pair.a_i = traj->transitions[i].action;
      pair.s_j = traj->transitions[j].state;
      pair.a_j = traj->transitions[j].action;
      pair.d_y = j - i;
      pair.source_trajectory_id = traj->id;
      pair.index_i = i;
      pair.index_j = j;
      out.push_back(std::move(pair));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Query pair sampling.
// ---------------------------------------------------------------------------
inline std::vector<std::pair<std::size_t, std::size_t>> sample_uniform_pairs(std::size_t bank_size,
                                                                             std::size_t n, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  const std::size_t max_pairs = bank_size * (bank_size - 1) / 2;
  const std::size_t want = std::min(n, max_pairs);
  while (out.size() < want) {
    std::size_t i = rng.below(bank_size);
    std::size_t j = rng.below(bank_size);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (!seen.insert({i, j}).second) continue;
    out.emplace_back(i, j);
  }
  return out;
}

// Uniform: n distinct unordered pairs, without replacement within the
// session. Disagreement: among 10n candidates, the n with the highest
// across-ensemble standard deviation of the preference probability (ties
// broken by candidate index).
inline std::vector<std::pair<std::size_t, std::size_t>> sample_queries(
    const TrajectoryBank& bank, std::size_t n, QuerySampler sampler,
    std::span<const RewardModel* const> models, Rng& rng) {
  if (bank.size() < 2) throw EmptyBatchError("sample_queries: bank has fewer than 2 trajectories");
  if (sampler == QuerySampler::uniform || models.size() < 2)
    return sample_uniform_pairs(bank.size(), n, rng);

  auto candidates = sample_uniform_pairs(bank.size(), 10 * n, rng);
  std::vector<std::pair<double, std::size_t>> scored;  // (-std, index) for stable ordering
  scored.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto& [i, j] = candidates[c];
    double mean = 0.0, m2 = 0.0;
    std::size_t cnt = 0;
    for (const RewardModel* m : models) {
      const double p = m->preference_probability(bank.at(i), bank.at(j));
      ++cnt;
      const double d = p - mean;
      mean += d / static_cast<double>(cnt);
      m2 += d * (p - mean);
    }
    const double stdev = std::sqrt(m2 / static_cast<double>(cnt));
    scored.emplace_back(-stdev, c);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k = 0; k < std::min(n, scored.size()); ++k)
    out.push_back(candidates[scored[k].second]);
  return out;
}

// ---------------------------------------------------------------------------
// Reward update session: reward_update_epochs passes over D_h minibatches,
// one optimizer step per minibatch on the combined objective. Triplet
// anchors come from the most recent trajectories and are held back until
// anchor_min_labels labels exist; D_p is built once per session. Terms whose
// lambda is zero never sample anything, so a (0, 0) run consumes exactly the
// RNG stream of the CE-only path.
// ---------------------------------------------------------------------------
struct RewardUpdateResult {
  std::vector<LossComponents> epoch_means;
  LossComponents last() const { return epoch_means.empty() ? LossComponents{} : epoch_means.back(); }
};

inline RewardUpdateResult reward_update_session(std::span<RewardModel* const> models,
                                                std::span<Optimizer* const> optimizers,
                                                const PreferenceDataset& dh,
                                                const TrajectoryBank& bank, const TrainerConfig& cfg,
                                                Rng& rng) {
  if (dh.empty()) throw EmptyBatchError("reward_update_session: empty preference dataset");
  RewardUpdateResult result;

  const bool use_triplet = cfg.lambda_t > 0.0 &&
                           dh.size() >= static_cast<std::size_t>(cfg.anchor_min_labels) &&
                           !bank.empty() && cfg.anchors_per_epoch > 0;
  const bool use_ad = cfg.lambda_a > 0.0 && !bank.empty();

  ActionDistanceDataset dp;
  if (use_ad) dp = build_dp(bank, cfg.k_window, cfg.pairs_per_trajectory, rng);
  const double dist_scale = cfg.resolved_distance_scale();

  std::vector<std::size_t> order(dh.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.reward_update_epochs; ++epoch) {
    // Fisher-Yates with the trainer stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng.below(i);
      std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_batches =
        (dh.size() + cfg.reward_batch_size - 1) / static_cast<std::size_t>(cfg.reward_batch_size);

    // Anchors for this epoch, spread across minibatches.
    std::vector<const Trajectory*> anchors;
    if (use_triplet) {
      const auto pool = bank.last_k(static_cast<std::size_t>(cfg.anchor_window));
      const std::size_t n_anchors =
          std::min<std::size_t>(cfg.anchors_per_epoch, dh.size());
      for (std::size_t a = 0; a < n_anchors; ++a)
        anchors.push_back(pool[rng.below(pool.size())]);
    }

    LossComponents epoch_sum;
    std::size_t epoch_batches = 0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      const std::size_t lo = b * cfg.reward_batch_size;
      const std::size_t hi = std::min(dh.size(), lo + cfg.reward_batch_size);
      std::vector<PreferenceTuple> batch;
      batch.reserve(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) batch.push_back(dh.at(order[i]));

      std::span<const Trajectory* const> batch_anchors;
      if (!anchors.empty()) {
        const std::size_t alo = b * anchors.size() / n_batches;
        const std::size_t ahi = (b + 1) * anchors.size() / n_batches;
        batch_anchors = std::span<const Trajectory* const>(anchors.data() + alo, ahi - alo);
      }

      std::vector<ActionDistancePair> ad_batch;
      if (use_ad && !dp.empty()) {
        const std::size_t want = std::min<std::size_t>(cfg.ad_batch_size, dp.size());
        ad_batch.reserve(want);
        for (std::size_t k = 0; k < want; ++k) ad_batch.push_back(dp[rng.below(dp.size())]);
      }

      LossComponents comp;
      for (std::size_t m = 0; m < models.size(); ++m) {
        std::vector<double> grad(models[m]->parameter_count(), 0.0);
        comp = models[m]->combined_loss(batch, batch_anchors, ad_batch, cfg.lambda_ce, cfg.lambda_t,
                                        cfg.lambda_a, cfg.triplet_mode, cfg.margin, dist_scale, &grad);
        optimizers[m]->step(models[m]->params(), grad);
      }
      epoch_sum.ce += comp.ce;
      epoch_sum.triplet += comp.triplet;
      epoch_sum.ad += comp.ad;
      ++epoch_batches;
    }
    if (epoch_batches > 0) {
      epoch_sum.ce /= static_cast<double>(epoch_batches);
      epoch_sum.triplet /= static_cast<double>(epoch_batches);
      epoch_sum.ad /= static_cast<double>(epoch_batches);
    }
    result.epoch_means.push_back(epoch_sum);
  }
  return result;
}

// Dedicated CE-only path (used by the `ce` arm). Bit-identical parameter
// trajectories to reward_update_session with lambda_t = lambda_a = 0 is a
// tested invariant; no hidden coupling to the unlabeled-data machinery.
inline RewardUpdateResult ce_only_update_session(RewardModel& model, Optimizer& opt,
                                                 const PreferenceDataset& dh,
                                                 const TrainerConfig& cfg, Rng& rng) {
  if (dh.empty()) throw EmptyBatchError("ce_only_update_session: empty preference dataset");
  RewardUpdateResult result;
  std::vector<std::size_t> order(dh.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.reward_update_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng.below(i);
      std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_batches =
        (dh.size() + cfg.reward_batch_size - 1) / static_cast<std::size_t>(cfg.reward_batch_size);
    LossComponents epoch_sum;
    for (std::size_t b = 0; b < n_batches; ++b) {
      const std::size_t lo = b * cfg.reward_batch_size;
      const std::size_t hi = std::min(dh.size(), lo + cfg.reward_batch_size);
      std::vector<PreferenceTuple> batch;
      batch.reserve(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) batch.push_back(dh.at(order[i]));
      std::vector<double> grad(model.parameter_count(), 0.0);
      epoch_sum.ce += model.ce_loss(batch, &grad, cfg.lambda_ce);
      opt.step(model.params(), grad);
    }
    epoch_sum.ce /= static_cast<double>(n_batches);
    result.epoch_means.push_back(epoch_sum);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Trainer.
// ---------------------------------------------------------------------------

struct TrainerStatus {
  std::atomic<std::int64_t> global_step{0};
  std::atomic<int> feedback_used{0};
  std::atomic<bool> finished{false};
};

class Trainer {
public:
  Trainer(RunConfig cfg, QueryQueue* queue = nullptr)
      : cfg_(std::move(cfg)),
        env_(cfg_.grid, derive_seed(cfg_.seed, 1)),
        act_rng_(derive_seed(cfg_.seed, 2)),
        trainer_rng_(derive_seed(cfg_.seed, 3)),
        replay_rng_(derive_seed(cfg_.seed, 4)),
        init_rng_(derive_seed(cfg_.seed, 6)),
        oracle_(cfg_.oracle.flip_probability, derive_seed(cfg_.seed, 5)),
        bank_(cfg_.trainer.bank_capacity),
        dh_(static_cast<std::size_t>(cfg_.trainer.max_feedback)),
        queue_(queue) {
    cfg_.validate();
    if (cfg_.oracle.kind == OracleKind::human && queue_ == nullptr)
      throw ConfigError("human oracle requires a query queue");

    const std::size_t n_models =
        cfg_.trainer.sampler == QuerySampler::disagreement ? cfg_.trainer.ensemble_size : 1;
    for (std::size_t m = 0; m < n_models; ++m) {
      models_.push_back(std::make_unique<RewardModel>(cfg_.reward, derive_seed(cfg_.seed, 100 + m)));
      optimizers_.push_back(std::make_unique<Optimizer>(cfg_.optimizer));
    }

    SoftQConfig qc;
    qc.width = cfg_.grid.width;
    qc.height = cfg_.grid.height;
    qc.n_actions = kGridActions;
    qc.gamma = cfg_.policy.gamma;
    qc.alpha = cfg_.policy.alpha;
    qc.temperature = cfg_.trainer.temperature_start;
    policy_ = SoftQPolicy(qc);
  }

  const RunConfig& config() const { return cfg_; }
  RewardModel& model() { return *models_.front(); }
  const RewardModel& model() const { return *models_.front(); }
  SoftQPolicy& policy() { return policy_; }
  const TrajectoryBank& bank() const { return bank_; }
  const PreferenceDataset& dh() const { return dh_; }
  TrainerStatus& status() { return status_; }
  std::int64_t session() const { return session_; }

  void set_metrics_sink(std::function<void(const MetricsRow&)> sink) { sink_ = std::move(sink); }
  void set_checkpoint_dir(std::string dir) { checkpoint_dir_ = std::move(dir); }

  // Restores reward params, policy table, D_h, counters, and RNG streams from
  // a checkpoint. Collection state (bank, current partial segment) restarts
  // empty.
  void resume_from(const std::string& dir) {
    TrainerCheckpoint ck = load_checkpoint(dir);
    if (ck.reward_spec.size() != model().spec().size() ||
        ck.reward_params.size() != model().parameter_count())
      throw ConfigError("checkpoint reward network does not match the configured architecture");
    model().params() = ck.reward_params;
    if (ck.policy_table.size() != policy_.table().size())
      throw ConfigError("checkpoint policy table does not match the configured grid");
    policy_.table() = ck.policy_table;
    for (auto& t : ck.dh) dh_.append(std::move(t));
    last_dh_size_ = dh_.size();
    global_step_ = ck.global_step;
    session_ = ck.session;
    feedback_used_ = ck.feedback_used;
    next_traj_id_ = ck.next_trajectory_id;
    auto restore = [&](const char* key, Rng& rng) {
      auto it = ck.rng_states.find(key);
      if (it != ck.rng_states.end()) rng.restore(it->second);
    };
    restore("act", act_rng_);
    restore("trainer", trainer_rng_);
    restore("replay", replay_rng_);
    restore("init", init_rng_);
  }

  std::vector<MetricsRow> run() {
    std::vector<MetricsRow> rows;
    try {
      while (global_step_ < cfg_.trainer.total_steps) {
        collect_steps(std::min<std::int64_t>(cfg_.trainer.steps_between_sessions,
                                             cfg_.trainer.total_steps - global_step_));
        query_session();
        const bool updated = maybe_update_reward();
        if (updated) {
          relabel(bank_, model());
          replay_burst(cfg_.trainer.relabel_burst);
        }
        rows.push_back(evaluate());
        if (sink_) sink_(rows.back());
        ++session_;
        if (!checkpoint_dir_.empty() && cfg_.trainer.checkpoint_every > 0 &&
            session_ % cfg_.trainer.checkpoint_every == 0)
          write_checkpoint();
      }
      if (!checkpoint_dir_.empty()) write_checkpoint();
    } catch (...) {
      // Preserve run state for postmortem/resume before surfacing the error.
      if (!checkpoint_dir_.empty()) write_checkpoint();
      status_.finished.store(true);
      throw;
    }
    status_.finished.store(true);
    return rows;
  }

  void write_checkpoint() {
    TrainerCheckpoint ck;
    ck.reward_params = model().params();
    ck.reward_spec = model().spec();
    ck.policy_table = policy_.table();
    ck.dh = dh_.tuples();
    ck.global_step = global_step_;
    ck.session = session_;
    ck.feedback_used = feedback_used_;
    ck.next_trajectory_id = next_traj_id_;
    ck.rng_states["act"] = act_rng_.state();
    ck.rng_states["trainer"] = trainer_rng_.state();
    ck.rng_states["replay"] = replay_rng_.state();
    ck.rng_states["init"] = init_rng_.state();
    save_checkpoint(checkpoint_dir_, ck);
  }

private:
  bool trains_reward() const { return cfg_.losses != LossArm::true_reward; }

  double annealed_temperature() const {
    const double f = static_cast<double>(global_step_) / cfg_.trainer.total_steps;
    return cfg_.trainer.temperature_start +
           (cfg_.trainer.temperature_end - cfg_.trainer.temperature_start) * f;
  }

  // Effective lambdas for the configured arm.
  double lambda_t() const {
    return (cfg_.losses == LossArm::ce_triplet || cfg_.losses == LossArm::combined)
               ? cfg_.trainer.lambda_t
               : 0.0;
  }
  double lambda_a() const {
    return (cfg_.losses == LossArm::ce_ad || cfg_.losses == LossArm::combined) ? cfg_.trainer.lambda_a
                                                                               : 0.0;
  }

  void collect_steps(std::int64_t n) {
    for (std::int64_t k = 0; k < n; ++k) {
      if (env_.episode_done()) env_.reset();
      policy_.set_temperature(annealed_temperature());
      const bool warmup = global_step_ < cfg_.trainer.warmup_steps;
      const auto obs = env_.observe();
      const int action = warmup ? act_rng_.below_int(kGridActions) : policy_.act(obs, act_rng_);
      Transition tr = env_.step(action);
      tr.learner_reward = cfg_.losses == LossArm::true_reward
                              ? tr.true_reward
                              : model().reward(tr.state, tr.action);
      if (!warmup) {
        policy_.update(learner_view(tr));
        for (int r = 0; r < cfg_.trainer.replay_updates_per_step; ++r) replay_update();
      }
      current_.transitions.push_back(std::move(tr));
      if (static_cast<int>(current_.transitions.size()) == cfg_.trainer.segment_length) {
        current_.id = next_traj_id_++;
        current_.policy_stamp = global_step_;
        bank_.add(std::move(current_));
        current_ = Trajectory{};
      }
      ++global_step_;
      status_.global_step.store(global_step_);
    }
  }

  void replay_update() {
    if (bank_.transition_count() == 0) return;
    const auto& tr = bank_.transition(replay_rng_.below(bank_.transition_count()));
    policy_.update(learner_view(tr));
  }

  void replay_burst(int n) {
    for (int i = 0; i < n; ++i) replay_update();
  }

  void query_session() {
    if (!trains_reward()) return;
    if (queue_ != nullptr) {
      // Human oracle: enqueue new pairs while budget remains, then fold in
      // whatever labels arrived since the last boundary. Never blocks.
      if (static_cast<int>(queue_->labels_accepted()) < cfg_.trainer.max_feedback &&
          bank_.size() >= 2) {
        std::vector<const RewardModel*> mv;
        for (auto& m : models_) mv.push_back(m.get());
        auto pairs =
            sample_queries(bank_, cfg_.trainer.queries_per_session, cfg_.trainer.sampler, mv,
                           trainer_rng_);
        for (const auto& [i, j] : pairs) {
          try {
            queue_->enqueue(bank_.at(i), bank_.at(j));
          } catch (const QueueFullError&) {
            break;  // backpressure; retry at the next session
          }
        }
      }
      for (auto& tuple : queue_->drain_completed()) {
        dh_.append(std::move(tuple));
        ++feedback_used_;
      }
      status_.feedback_used.store(feedback_used_);
      return;
    }
    // Synthetic oracle: immediate labels.
    if (feedback_used_ >= cfg_.trainer.max_feedback || bank_.size() < 2) return;
    std::vector<const RewardModel*> mv;
    for (auto& m : models_) mv.push_back(m.get());
    auto pairs = sample_queries(bank_, cfg_.trainer.queries_per_session, cfg_.trainer.sampler, mv,
                                trainer_rng_);
    for (const auto& [i, j] : pairs) {
      if (feedback_used_ >= cfg_.trainer.max_feedback) break;
      const OracleLabel label = oracle_.label(bank_.at(i), bank_.at(j));
      if (label == OracleLabel::abstain) continue;  // discarded, no budget cost
      PreferenceTuple tuple{bank_.at(i), bank_.at(j),
                            label == OracleLabel::prefer0 ? PreferenceLabel::prefer0
                                                          : PreferenceLabel::prefer1};
      dh_.append(std::move(tuple));
      ++feedback_used_;
    }
    status_.feedback_used.store(feedback_used_);
  }

  // Retrains when new labels arrived this session. Returns true if the model
  // changed (and the bank therefore needs relabeling).
  bool maybe_update_reward() {
    if (!trains_reward() || dh_.empty() || dh_.size() == last_dh_size_) return false;
    last_dh_size_ = dh_.size();
    if (cfg_.trainer.reward_reset_per_session) {
      for (std::size_t m = 0; m < models_.size(); ++m) {
        models_[m]->reinitialize(init_rng_);
        optimizers_[m]->reset(models_[m]->parameter_count());
      }
    }
    if (cfg_.losses == LossArm::ce_only) {
      const auto res = ce_only_update_session(model(), *optimizers_.front(), dh_, cfg_.trainer,
                                              trainer_rng_);
      last_losses_ = res.last();
      return true;
    }
    TrainerConfig tc = cfg_.trainer;
    tc.lambda_t = lambda_t();
    tc.lambda_a = lambda_a();
    std::vector<RewardModel*> mv;
    std::vector<Optimizer*> ov;
    for (std::size_t m = 0; m < models_.size(); ++m) {
      mv.push_back(models_[m].get());
      ov.push_back(optimizers_[m].get());
    }
    const auto res = reward_update_session(mv, ov, dh_, bank_, tc, trainer_rng_);
    last_losses_ = res.last();
    return true;
  }

  MetricsRow evaluate() {
    MetricsRow row;
    row.run_id = cfg_.resolved_run_id();
    row.seed = cfg_.seed;
    row.global_step = global_step_;
    row.feedback_used = feedback_used_;
    row.loss_ce = last_losses_.ce;
    row.loss_t = last_losses_.triplet;
    row.loss_a = last_losses_.ad;

    GridWorld eval_env(cfg_.grid, derive_seed(cfg_.seed, 0xE7A1000 + session_));
    double ret_sum = 0.0;
    int successes = 0;
    for (int e = 0; e < cfg_.trainer.eval_episodes; ++e) {
      eval_env.reset();
      double ret = 0.0;
      bool success = false;
      while (!eval_env.episode_done()) {
        const Transition tr = eval_env.step(policy_.act_greedy(eval_env.observe()));
        ret += tr.true_reward;
        if (eval_env.agent_cell() == cfg_.grid.goal) success = true;
      }
      ret_sum += ret;
      if (success) ++successes;
    }
    row.eval_true_return = ret_sum / cfg_.trainer.eval_episodes;
    row.eval_success_rate = static_cast<double>(successes) / cfg_.trainer.eval_episodes;
    row.reward_spearman = compute_reward_spearman(derive_seed(cfg_.seed, 0x5EED000 + session_));
    return row;
  }

  double compute_reward_spearman(std::uint64_t seed) {
    if (bank_.empty()) return 0.0;
    Rng rng(seed);
    const auto recent = bank_.last_k(static_cast<std::size_t>(cfg_.trainer.spearman_window));
    std::size_t total = 0;
    for (const auto* t : recent) total += t->length();
    if (total == 0) return 0.0;
    std::vector<double> learned, truth;
    learned.reserve(cfg_.trainer.spearman_samples);
    truth.reserve(cfg_.trainer.spearman_samples);
    for (int k = 0; k < cfg_.trainer.spearman_samples; ++k) {
      std::size_t flat = rng.below(total);
      const Transition* tr = nullptr;
      for (const auto* t : recent) {
        if (flat < t->length()) {
          tr = &t->transitions[flat];
          break;
        }
        flat -= t->length();
      }
      learned.push_back(model().reward(tr->state, tr->action));
      truth.push_back(tr->true_reward);
    }
    return spearman(learned, truth).value;  // degenerate cases pin to 0
  }

  RunConfig cfg_;
  GridWorld env_;
  Rng act_rng_, trainer_rng_, replay_rng_, init_rng_;
  SyntheticOracle oracle_;
  std::vector<std::unique_ptr<RewardModel>> models_;
  std::vector<std::unique_ptr<Optimizer>> optimizers_;
  SoftQPolicy policy_{};
  TrajectoryBank bank_;
  PreferenceDataset dh_;
  QueryQueue* queue_ = nullptr;
  Trajectory current_;
  std::int64_t global_step_ = 0;
  std::int64_t session_ = 0;
  int feedback_used_ = 0;
  std::size_t last_dh_size_ = 0;
  std::int64_t next_traj_id_ = 1;
  LossComponents last_losses_;
  std::function<void(const MetricsRow&)> sink_;
  std::string checkpoint_dir_;
  TrainerStatus status_;
};

}  // namespace pbrl
