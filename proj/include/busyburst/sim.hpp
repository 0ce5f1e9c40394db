#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "busyburst/ldp.hpp"
#include "busyburst/model.hpp"

namespace busyburst {

/// One busy cycle of S_k = X_1 + ... + X_k, stopped at tau = min{k >= 1 : S_k <= 0}.
/// area = S_1 + ... + S_tau (the terminal S_tau included), max_height = max_{k <= tau} S_k.
/// A truncated cycle hit max_steps first and carries partial sums.
struct BusyPeriodOutcome {
  std::uint64_t tau;
  double area;
  double max_height;
  bool truncated;
};

/// Walks increments pulled from `next` until the stopping rule fires. When
/// `increments` is non-null every consumed increment is appended to it.
template <class Next>
BusyPeriodOutcome walk_busy_period(Next&& next, std::uint64_t max_steps, std::vector<double>* increments = nullptr) {
  double level = 0.0;
  double area = 0.0;
  double peak = 0.0;
  for (std::uint64_t k = 1; k <= max_steps; ++k) {
    const double x = next();
    if (increments) increments->push_back(x);
    level += x;
    area += level;
    if (k == 1 || level > peak) peak = level;
    if (level <= 0.0) return {k, area, peak, false};
  }
  return {max_steps, area, peak, true};
}

BusyPeriodOutcome run_busy_period(const ValidatedModel& model, std::uint64_t seed, std::uint64_t stream_id,
                                  std::uint64_t max_steps, std::vector<double>* increments = nullptr);

/// Replays a fixed increment sequence; truncated if it runs out first.
BusyPeriodOutcome run_busy_period(std::span<const double> increments);

/// Partial sums 0, S_1, ..., S_n of an increment sequence, on times 0..n.
SampledPath path_from_increments(std::span<const double> increments);

/// counts[j] = number of non-truncated cycles with area >= thresholds[j].
struct TailTable {
  std::vector<double> thresholds;
  std::vector<std::uint64_t> counts;
  std::uint64_t n_paths = 0;
  std::uint64_t n_truncated = 0;
};

struct ExtremePath {
  SampledPath path;
  double value;  // area B or height H
  std::uint64_t path_index;
  std::uint64_t tau;
};

struct ExtremeRecords {
  ExtremePath max_area;
  ExtremePath max_height;
};

struct CampaignConfig {
  std::uint64_t n_paths = 1;
  std::uint64_t base_seed = 0;
  std::uint64_t max_steps = 100'000'000;
  std::vector<double> thresholds;  // empty: default_thresholds()
  unsigned workers = 1;            // 0: hardware concurrency
  bool record_extremes = true;
};

struct CampaignSummary {
  std::uint64_t n_paths = 0;
  std::uint64_t n_truncated = 0;
  std::uint64_t n_positive_area = 0;
  double mean_tau = 0.0;
  double mean_positive_area = 0.0;
};

struct CampaignResult {
  TailTable tail;
  std::optional<ExtremeRecords> extremes;
  CampaignSummary summary;
};

/// 40 geometric thresholds from 1 to the b at which n_paths exp(-K sqrt(b)) = 10.
std::vector<double> default_thresholds(const LdpSummary& s, std::uint64_t n_paths);

/// Runs config.n_paths busy cycles. Cycle j uses stream (base_seed, j), and
/// per-chunk partial results are merged in chunk order, so the output does
/// not depend on the number of workers. Throws ExcessiveTruncation when more
/// than a 1e-6 fraction of cycles hit max_steps.
CampaignResult simulate_campaign(const ValidatedModel& model, const CampaignConfig& config);

struct TailPoint {
  double b;
  std::uint64_t count;
  double log_p;  // natural log of count / n_paths
};

/// Rows with a zero count are omitted. Throws EmptyTable for a table without
/// paths or thresholds.
std::vector<TailPoint> empirical_log_tail(const TailTable& table);

/// Offset kappa in log p ~ -K sqrt(b) + kappa: mean of log p + K sqrt(b) over
/// points with count >= min_count. Needs at least three such points.
double fit_offset_kappa(std::span<const TailPoint> points, double K, std::uint64_t min_count = 100);

/// Weighted least squares of log p on sqrt(b), weights count / (1 - p)
/// (inverse binomial variance of log p), over points with count >= min_count.
struct TailSlopeFit {
  double slope;
  double intercept;
  std::size_t points;
};
TailSlopeFit fit_tail_slope(std::span<const TailPoint> points, std::uint64_t n_paths, std::uint64_t min_count = 100);

}  // namespace busyburst
