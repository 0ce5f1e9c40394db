#include "busyburst/est.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "busyburst/error.hpp"
#include "busyburst/ldp.hpp"
#include "busyburst/numerics.hpp"

namespace busyburst {

namespace {

constexpr double kExponentBudget = 700.0;

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::string_view to_string(SeriesKind kind) { return kind == SeriesKind::iid ? "iid" : "markov"; }

SeriesKind parse_series_kind(std::string_view text) {
  if (text == "iid") return SeriesKind::iid;
  if (text == "markov") return SeriesKind::markov;
  throw Error(ErrorCode::InvalidArgument, "kind must be iid or markov, got " + std::string(text));
}

double empirical_scgf_iid(const SampleSeries& series, double theta) {
  const auto& x = series.values;
  if (x.empty()) throw Error(ErrorCode::InsufficientData, "empty sample");
  double shift = -std::numeric_limits<double>::infinity();
  for (double v : x) shift = std::max(shift, theta * v);
  double sum = 0.0;
  for (double v : x) sum += std::exp(theta * v - shift);
  return shift + std::log(sum / static_cast<double>(x.size()));
}

MarkovEmpirical empirical_transition_matrix(const SampleSeries& series) {
  const auto& x = series.values;
  if (x.size() < 2) throw Error(ErrorCode::InsufficientData, "Markov estimation needs at least two observations");
  MarkovEmpirical emp;
  emp.states = x;
  std::sort(emp.states.begin(), emp.states.end());
  emp.states.erase(std::unique(emp.states.begin(), emp.states.end()), emp.states.end());
  if (emp.states.size() < 2) throw Error(ErrorCode::SingleState, "only one distinct value observed");

  const auto m = static_cast<Eigen::Index>(emp.states.size());
  auto state_of = [&](double v) {
    return static_cast<Eigen::Index>(std::lower_bound(emp.states.begin(), emp.states.end(), v) - emp.states.begin());
  };
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(m, m);
  Eigen::Index prev = state_of(x[0]);
  for (std::size_t k = 1; k < x.size(); ++k) {
    const Eigen::Index cur = state_of(x[k]);
    counts(prev, cur) += 1.0;
    prev = cur;
  }
  emp.transition = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double visits = counts.row(i).sum();
    if (visits > 0.0) emp.transition.row(i) = counts.row(i) / visits;
  }
  return emp;
}

double empirical_scgf_markov(const MarkovEmpirical& emp, double theta) {
  return numerics::log_tilted_spectral_radius(emp.transition, emp.states, theta);
}

EmpiricalScgf EmpiricalScgf::from_iid(std::span<const double> sample) {
  if (sample.empty()) throw Error(ErrorCode::InsufficientData, "empty sample");
  std::map<double, std::uint64_t> freq;
  for (double v : sample) ++freq[v];
  EmpiricalScgf out;
  out.kind_ = SeriesKind::iid;
  const double n = static_cast<double>(sample.size());
  for (const auto& [v, c] : freq) {
    out.values_.push_back(v);
    out.weights_.push_back(static_cast<double>(c) / n);
  }
  out.finish();
  return out;
}

EmpiricalScgf EmpiricalScgf::from_weighted(std::vector<double> values, std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size()) {
    throw Error(ErrorCode::InvalidArgument, "values and weights must be non-empty and of equal length");
  }
  EmpiricalScgf out;
  out.kind_ = SeriesKind::iid;
  out.values_ = std::move(values);
  out.weights_ = std::move(weights);
  out.finish();
  return out;
}

EmpiricalScgf EmpiricalScgf::from_markov(MarkovEmpirical emp) {
  EmpiricalScgf out;
  out.kind_ = SeriesKind::markov;
  out.values_ = std::move(emp.states);
  out.transition_ = std::move(emp.transition);
  if (out.transition_.rows() != static_cast<Eigen::Index>(out.values_.size()) ||
      out.transition_.cols() != out.transition_.rows()) {
    throw Error(ErrorCode::InvalidArgument, "transition matrix does not match the state values");
  }
  out.finish();
  return out;
}

void EmpiricalScgf::finish() {
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "sample contains a non-finite value");
  }
  const double m = max_abs(values_);
  theta_max_ = m > 0.0 ? kExponentBudget / m : kExponentBudget;
}

double EmpiricalScgf::operator()(double theta) const {
  if (kind_ == SeriesKind::iid) return numerics::log_sum_exp_weighted(values_, weights_, theta);
  return numerics::log_tilted_spectral_radius(transition_, values_, theta);
}

EstimateReport estimate(const EmpiricalScgf& scgf, std::uint64_t n, double drift_estimate) {
  if (!(drift_estimate < 0.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "sample mean " << drift_estimate << " is not strictly negative";
    throw Error(ErrorCode::NonNegativeSampleDrift, msg.str());
  }
  const auto f = [&scgf](double theta) { return scgf(theta); };
  const auto tilt = find_critical_tilt(f, scgf.theta_max());
  const double integral = integrate_scgf(f, tilt.root);
  const auto& values = scgf.values();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return EstimateReport{tilt.root,       exponent_from_integral(integral),
                        integral,        n,
                        scgf.kind(),     drift_estimate,
                        tilt.bracket_lo, tilt.bracket_hi,
                        scgf.theta_max(), values.size(),
                        *lo,             *hi};
}

EstimateReport estimate(const SampleSeries& series) {
  const auto& x = series.values;
  if (x.empty()) throw Error(ErrorCode::InsufficientData, "empty sample");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  if (!(mean < 0.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "sample mean " << mean << " is not strictly negative";
    throw Error(ErrorCode::NonNegativeSampleDrift, msg.str());
  }
  const auto scgf = series.kind == SeriesKind::iid ? EmpiricalScgf::from_iid(x)
                                                   : EmpiricalScgf::from_markov(empirical_transition_matrix(series));
  return estimate(scgf, x.size(), mean);
}

std::vector<double> parse_series_text(std::string_view text) {
  std::vector<double> out;
  std::size_t line_no = 0;
  bool first_data_line = true;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') {
      if (eol == text.size()) break;
      continue;
    }
    std::string_view field = line.substr(0, line.find(','));
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    const bool ok = ec == std::errc() && end == field.data() + field.size() && std::isfinite(value);
    if (!ok) {
      if (first_data_line) {
        first_data_line = false;
        continue;  // header
      }
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": cannot parse \"" + std::string(field) +
                                        "\" as a finite number");
    }
    first_data_line = false;
    out.push_back(value);
    if (eol == text.size()) break;
  }
  return out;
}

std::vector<double> read_series_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open data file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_series_text(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace busyburst
