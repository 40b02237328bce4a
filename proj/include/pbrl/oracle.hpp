#pragma once

// Feedback providers: the synthetic oracle comparing hidden true returns, and
// the query queue that bridges the trainer to a human labeler over HTTP.

#include <chrono>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "pbrl/env.hpp"
#include "pbrl/errors.hpp"
#include "pbrl/reward_model.hpp"
#include "pbrl/rng.hpp"

namespace pbrl {

enum class OracleLabel { prefer0, prefer1, abstain };

// Ground-truth comparison of summed hidden rewards. Exactly equal returns
// abstain; the pair is discarded and costs no budget.
inline OracleLabel synthetic_label(const Trajectory& tau0, const Trajectory& tau1) {
  const double r0 = true_return(tau0);
  const double r1 = true_return(tau1);
  if (r0 > r1) return OracleLabel::prefer0;
  if (r0 < r1) return OracleLabel::prefer1;
  return OracleLabel::abstain;
}

// Noiseless by default; flip_probability > 0 inverts non-abstain labels for
// robustness experiments.
class SyntheticOracle {
public:
  SyntheticOracle() = default;
  SyntheticOracle(double flip_probability, std::uint64_t seed)
      : flip_probability_(flip_probability), rng_(seed) {}

  OracleLabel label(const Trajectory& tau0, const Trajectory& tau1) {
    OracleLabel l = synthetic_label(tau0, tau1);
    if (l != OracleLabel::abstain && flip_probability_ > 0.0 && rng_.bernoulli(flip_probability_))
      l = (l == OracleLabel::prefer0) ? OracleLabel::prefer1 : OracleLabel::prefer0;
    return l;
  }

private:
  double flip_probability_ = 0.0;
  Rng rng_;
};

enum class QueryStatus { pending, labeled, skipped };

enum class PreferenceChoice { prefer0, prefer1, skip };

inline std::optional<PreferenceChoice> choice_from_string(const std::string& s) {
  if (s == "prefer0") return PreferenceChoice::prefer0;
  if (s == "prefer1") return PreferenceChoice::prefer1;
  if (s == "skip") return PreferenceChoice::skip;
  return std::nullopt;
}

struct QueryRecord {
  std::int64_t id = 0;
  Trajectory tau0;
  Trajectory tau1;
  QueryStatus status = QueryStatus::pending;
  std::optional<PreferenceLabel> label;
  std::int64_t created_at = 0;  // unix seconds
  std::int64_t labeled_at = 0;
};

// The one piece of state shared between the trainer loop and the HTTP
// handlers. All operations take the mutex; submissions on the same id are
// linearized so exactly one wins.
class QueryQueue {
public:
  QueryQueue(std::size_t capacity, std::size_t max_feedback)
      : capacity_(capacity), max_feedback_(max_feedback) {}

  // Enqueue a pair for labeling; throws QueueFullError when `capacity`
  // queries are already pending (backpressure: the trainer retries later).
  std::int64_t enqueue(Trajectory tau0, Trajectory tau1) {
    std::lock_guard<std::mutex> lock(mu_);
    if (pending_order_.size() >= capacity_)
      throw QueueFullError("query queue at capacity (" + std::to_string(capacity_) + ")");
    QueryRecord rec;
    rec.id = next_id_++;
    rec.tau0 = std::move(tau0);
    rec.tau1 = std::move(tau1);
    rec.created_at = now();
    pending_order_.push_back(rec.id);
    records_.emplace(rec.id, std::move(rec));
    return next_id_ - 1;
  }

  // Oldest pending record, if any (copy; renderable by the HTTP layer).
  std::optional<QueryRecord> next_pending() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (pending_order_.empty()) return std::nullopt;
    return records_.at(pending_order_.front());
  }

  // Resolve a pending record. A label appends to the completed list (drained
  // by the trainer at the next session boundary) and consumes budget; a skip
  // consumes nothing. Unknown ids and double submissions are rejected.
  std::optional<PreferenceTuple> submit(std::int64_t id, PreferenceChoice choice) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = records_.find(id);
    if (it == records_.end()) throw UnknownIdError("no query with id " + std::to_string(id));
    QueryRecord& rec = it->second;
    if (rec.status != QueryStatus::pending)
      throw IdempotencyError("query " + std::to_string(id) + " was already resolved");
    if (choice == PreferenceChoice::skip) {
      rec.status = QueryStatus::skipped;
      rec.labeled_at = now();
      erase_pending(id);
      return std::nullopt;
    }
    if (labels_accepted_ >= max_feedback_)
      throw BudgetExhaustedError("feedback budget exhausted (" + std::to_string(max_feedback_) + ")");
    rec.status = QueryStatus::labeled;
    rec.label = (choice == PreferenceChoice::prefer0) ? PreferenceLabel::prefer0 : PreferenceLabel::prefer1;
    rec.labeled_at = now();
    erase_pending(id);
    ++labels_accepted_;
    PreferenceTuple tuple{rec.tau0, rec.tau1, *rec.label};
    completed_.push_back(tuple);
    return tuple;
  }

  // Labeled tuples not yet consumed by the trainer.
  std::vector<PreferenceTuple> drain_completed() {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<PreferenceTuple> out(std::move(completed_));
    completed_.clear();
    return out;
  }

  std::size_t pending_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return pending_order_.size();
  }
  std::size_t labels_accepted() const {
    std::lock_guard<std::mutex> lock(mu_);
    return labels_accepted_;
  }
  std::size_t capacity() const { return capacity_; }
  std::size_t max_feedback() const { return max_feedback_; }

private:
  static std::int64_t now() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  void erase_pending(std::int64_t id) {
    for (auto it = pending_order_.begin(); it != pending_order_.end(); ++it) {
      if (*it == id) {
        pending_order_.erase(it);
        return;
      }
    }
  }

  mutable std::mutex mu_;
  std::size_t capacity_;
  std::size_t max_feedback_;
  std::int64_t next_id_ = 1;
  std::unordered_map<std::int64_t, QueryRecord> records_;
  std::deque<std::int64_t> pending_order_;
  std::vector<PreferenceTuple> completed_;
  std::size_t labels_accepted_ = 0;
};

}  // namespace pbrl
