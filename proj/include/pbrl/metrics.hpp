#pragma once

// Per-evaluation metrics records, the fixed CSV schema, and the Spearman
// rank-correlation evaluator (midrank Pearson, so heavy ties are handled).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pbrl/errors.hpp"

namespace pbrl {

struct MetricsRow {
  std::string run_id;
  std::uint64_t seed = 0;
  std::int64_t global_step = 0;
  int feedback_used = 0;
  double eval_true_return = 0.0;
  double eval_success_rate = 0.0;
  double reward_spearman = 0.0;
  double loss_ce = 0.0;
  double loss_t = 0.0;
  double loss_a = 0.0;
};

inline const char* metrics_csv_header() {
  return "run_id,seed,global_step,feedback_used,eval_true_return,eval_success_rate,"
         "reward_spearman,loss_ce,loss_t,loss_a";
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string to_csv(const MetricsRow& r) {
  std::ostringstream os;
  os << r.run_id << ',' << r.seed << ',' << r.global_step << ',' << r.feedback_used << ','
     << format_double(r.eval_true_return) << ',' << format_double(r.eval_success_rate) << ','
     << format_double(r.reward_spearman) << ',' << format_double(r.loss_ce) << ','
     << format_double(r.loss_t) << ',' << format_double(r.loss_a);
  return os.str();
}

inline MetricsRow metrics_row_from_csv(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  f.push_back(cur);
  if (f.size() != 10) throw ConfigError("metrics row has " + std::to_string(f.size()) + " fields");
  MetricsRow r;
  r.run_id = f[0];
  r.seed = std::stoull(f[1]);
  r.global_step = std::stoll(f[2]);
  r.feedback_used = std::stoi(f[3]);
  r.eval_true_return = std::stod(f[4]);
  r.eval_success_rate = std::stod(f[5]);
  r.reward_spearman = std::stod(f[6]);
  r.loss_ce = std::stod(f[7]);
  r.loss_t = std::stod(f[8]);
  r.loss_a = std::stod(f[9]);
  return r;
}

inline std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open metrics file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty metrics file: " + path);
  if (line != metrics_csv_header()) throw ConfigError("unexpected metrics header in " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(metrics_row_from_csv(line));
  }
  return rows;
}

// Appends rows as they are produced; flushes after every row so a crashed run
// leaves a readable file.
class MetricsWriter {
public:
  explicit MetricsWriter(const std::string& path) : out_(path) {
    if (!out_) throw ConfigError("cannot open metrics file for writing: " + path);
    out_ << metrics_csv_header() << '\n';
    out_.flush();
  }
  void append(const MetricsRow& r) {
    out_ << to_csv(r) << '\n';
    out_.flush();
  }

private:
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Spearman rank correlation.
// ---------------------------------------------------------------------------

struct SpearmanResult {
  double value = 0.0;
  bool degenerate = false;  // one side constant; value pinned to 0
};

inline std::vector<double> midranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("spearman: length mismatch");
  if (x.size() < 2) return {0.0, true};
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return {0.0, true};
  return {sxy / std::sqrt(sxx * syy), false};
}

// Quantile with linear interpolation (type 7); input need not be sorted.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw DimensionError("quantile of empty set");
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline double interquartile_range(std::vector<double> v) {
  const double q1 = quantile(v, 0.25);
  const double q3 = quantile(std::move(v), 0.75);
  return q3 - q1;
}

}  // namespace pbrl
