#include "busyburst/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "busyburst/error.hpp"

namespace busyburst {

namespace {

constexpr std::uint64_t kChunkSize = 4096;
constexpr double kMaxTruncatedFraction = 1e-6;
constexpr std::size_t kDefaultThresholdCount = 40;

struct Record {
  double value = -std::numeric_limits<double>::infinity();
  std::uint64_t index = 0;
  std::uint64_t tau = 0;
  bool set = false;

  void offer(double v, std::uint64_t i, std::uint64_t t) {
    if (!set || v > value) {
      value = v;
      index = i;
      tau = t;
      set = true;
    }
  }
  // Earlier chunks are merged first, so ties resolve to the lowest path index.
  void merge(const Record& other) {
    if (other.set) offer(other.value, other.index, other.tau);
  }
};

struct ChunkResult {
  std::vector<std::uint64_t> histogram;  // index k: number of thresholds <= area
  std::uint64_t n_truncated = 0;
  std::uint64_t tau_sum = 0;
  std::uint64_t n_positive = 0;
  double positive_area_sum = 0.0;
  Record area;
  Record height;
};

ChunkResult run_chunk(const ValidatedModel& model, const CampaignConfig& config, std::uint64_t begin,
                      std::uint64_t end) {
  ChunkResult out;
  const auto& thresholds = config.thresholds;
  out.histogram.assign(thresholds.size() + 1, 0);
  for (std::uint64_t j = begin; j < end; ++j) {
    IncrementStream stream(model, config.base_seed, j);
    const auto outcome = walk_busy_period([&] { return stream.next(); }, config.max_steps);
    if (outcome.truncated) {
      ++out.n_truncated;
      continue;
    }
    const auto k = std::upper_bound(thresholds.begin(), thresholds.end(), outcome.area) - thresholds.begin();
    ++out.histogram[static_cast<std::size_t>(k)];
    out.tau_sum += outcome.tau;
    if (outcome.area > 0.0) {
      ++out.n_positive;
      out.positive_area_sum += outcome.area;
    }
    out.area.offer(outcome.area, j, outcome.tau);
    out.height.offer(outcome.max_height, j, outcome.tau);
  }
  return out;
}

ExtremePath replay(const ValidatedModel& model, const CampaignConfig& config, const Record& record,
                   bool is_area) {
  std::vector<double> increments;
  const auto outcome = run_busy_period(model, config.base_seed, record.index, config.max_steps, &increments);
  const double value = is_area ? outcome.area : outcome.max_height;
  if (value != record.value || outcome.tau != record.tau) {
    throw Error(ErrorCode::NonConvergence, "replayed extreme path does not reproduce its record");
  }
  auto path = path_from_increments(increments);
  path.label = PathLabel::simulated;
  return {std::move(path), value, record.index, record.tau};
}

}  // namespace

BusyPeriodOutcome run_busy_period(const ValidatedModel& model, std::uint64_t seed, std::uint64_t stream_id,
                                  std::uint64_t max_steps, std::vector<double>* increments) {
  IncrementStream stream(model, seed, stream_id);
  return walk_busy_period([&] { return stream.next(); }, max_steps, increments);
}

BusyPeriodOutcome run_busy_period(std::span<const double> increments) {
  std::size_t pos = 0;
  if (increments.empty()) return {0, 0.0, 0.0, true};
  return walk_busy_period([&] { return increments[pos++]; }, increments.size());
}

SampledPath path_from_increments(std::span<const double> increments) {
  SampledPath path{{}, {}, PathLabel::simulated};
  path.times.reserve(increments.size() + 1);
  path.values.reserve(increments.size() + 1);
  path.times.push_back(0.0);
  path.values.push_back(0.0);
  double level = 0.0;
  for (std::size_t i = 0; i < increments.size(); ++i) {
    level += increments[i];
    path.times.push_back(static_cast<double>(i + 1));
    path.values.push_back(level);
  }
  return path;
}

std::vector<double> default_thresholds(const LdpSummary& s, std::uint64_t n_paths) {
  const double b_min = 1.0;
  const double log_ratio = std::log(static_cast<double>(n_paths) / 10.0);
  double b_max = log_ratio > 0.0 ? std::pow(log_ratio / s.K, 2) : 0.0;
  b_max = std::max(b_max, 10.0 * b_min);
  std::vector<double> out(kDefaultThresholdCount);
  for (std::size_t i = 0; i < kDefaultThresholdCount; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(kDefaultThresholdCount - 1);
    out[i] = b_min * std::pow(b_max / b_min, frac);
  }
  out.front() = b_min;
  out.back() = b_max;
  return out;
}

CampaignResult simulate_campaign(const ValidatedModel& model, const CampaignConfig& input) {
  if (input.n_paths < 1) throw Error(ErrorCode::InvalidArgument, "n_paths must be at least 1");
  if (input.max_steps < 1) throw Error(ErrorCode::InvalidArgument, "max_steps must be at least 1");
  CampaignConfig config = input;
  if (config.thresholds.empty()) {
    config.thresholds = default_thresholds(busy_exponent_K(model), config.n_paths);
  }
  for (std::size_t i = 0; i < config.thresholds.size(); ++i) {
    if (!(config.thresholds[i] > 0.0) || (i > 0 && !(config.thresholds[i] > config.thresholds[i - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "thresholds must be positive and strictly ascending");
    }
  }

  const std::uint64_t n_chunks = (config.n_paths + kChunkSize - 1) / kChunkSize;
  std::vector<ChunkResult> chunks(n_chunks);
  std::atomic<std::uint64_t> next_chunk{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next_chunk.fetch_add(1, std::memory_order_relaxed);
      if (c >= n_chunks) return;
      const std::uint64_t begin = c * kChunkSize;
      chunks[c] = run_chunk(model, config, begin, std::min(begin + kChunkSize, config.n_paths));
    }
  };
  unsigned workers = config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.workers;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_chunks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<std::uint64_t> histogram(config.thresholds.size() + 1, 0);
  CampaignSummary summary;
  summary.n_paths = config.n_paths;
  std::uint64_t tau_sum = 0;
  double positive_area_sum = 0.0;
  Record area, height;
  for (const auto& c : chunks) {
    for (std::size_t k = 0; k < histogram.size(); ++k) histogram[k] += c.histogram[k];
    summary.n_truncated += c.n_truncated;
    summary.n_positive_area += c.n_positive;
    tau_sum += c.tau_sum;
    positive_area_sum += c.positive_area_sum;
    area.merge(c.area);
    height.merge(c.height);
  }

  if (static_cast<double>(summary.n_truncated) > kMaxTruncatedFraction * static_cast<double>(config.n_paths)) {
    std::ostringstream msg;
    msg << summary.n_truncated << " of " << config.n_paths << " busy cycles exceeded max_steps = " << config.max_steps;
    throw Error(ErrorCode::ExcessiveTruncation, msg.str());
  }

  const std::uint64_t completed = config.n_paths - summary.n_truncated;
  summary.mean_tau = completed > 0 ? static_cast<double>(tau_sum) / static_cast<double>(completed) : 0.0;
  summary.mean_positive_area =
      summary.n_positive_area > 0 ? positive_area_sum / static_cast<double>(summary.n_positive_area) : 0.0;

  CampaignResult result;
  result.tail.thresholds = config.thresholds;
  result.tail.counts.assign(config.thresholds.size(), 0);
  result.tail.n_paths = config.n_paths;
  result.tail.n_truncated = summary.n_truncated;
  std::uint64_t above = 0;
  for (std::size_t j = config.thresholds.size(); j-- > 0;) {
    above += histogram[j + 1];
    result.tail.counts[j] = above;
  }
  result.summary = summary;
  if (config.record_extremes && area.set) {
    result.extremes = ExtremeRecords{replay(model, config, area, true), replay(model, config, height, false)};
  }
  return result;
}

std::vector<TailPoint> empirical_log_tail(const TailTable& table) {
  if (table.n_paths == 0 || table.thresholds.empty()) {
    throw Error(ErrorCode::EmptyTable, "tail table has no paths or no thresholds");
  }
  std::vector<TailPoint> out;
  for (std::size_t j = 0; j < table.thresholds.size(); ++j) {
    if (table.counts[j] == 0) continue;
    out.push_back({table.thresholds[j], table.counts[j],
                   std::log(static_cast<double>(table.counts[j]) / static_cast<double>(table.n_paths))});
  }
  return out;
}

double fit_offset_kappa(std::span<const TailPoint> points, double K, std::uint64_t min_count) {
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& p : points) {
    if (p.count < min_count) continue;
    sum += p.log_p + K * std::sqrt(p.b);
    ++used;
  }
  if (used < 3) {
    throw Error(ErrorCode::InsufficientData,
                "need at least 3 tail points with count >= " + std::to_string(min_count) + ", have " +
                    std::to_string(used));
  }
  return sum / static_cast<double>(used);
}

TailSlopeFit fit_tail_slope(std::span<const TailPoint> points, std::uint64_t n_paths, std::uint64_t min_count) {
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t used = 0;
  for (const auto& p : points) {
    if (p.count < min_count) continue;
    const double prob = static_cast<double>(p.count) / static_cast<double>(n_paths);
    const double w = prob < 1.0 ? static_cast<double>(p.count) / (1.0 - prob) : static_cast<double>(p.count);
    const double x = std::sqrt(p.b);
    sw += w;
    sx += w * x;
    sy += w * p.log_p;
    sxx += w * x * x;
    sxy += w * x * p.log_p;
    ++used;
  }
  if (used < 3) throw Error(ErrorCode::InsufficientData, "need at least 3 tail points for a slope fit");
  const double mx = sx / sw, my = sy / sw;
  const double slope = (sxy / sw - mx * my) / (sxx / sw - mx * mx);
  return {slope, my - slope * mx, used};
}

}  // namespace busyburst
