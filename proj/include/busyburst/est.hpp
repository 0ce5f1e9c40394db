#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace busyburst {

enum class SeriesKind { iid, markov };
std::string_view to_string(SeriesKind kind);
SeriesKind parse_series_kind(std::string_view text);

struct SampleSeries {
  std::vector<double> values;
  SeriesKind kind = SeriesKind::iid;
};

/// Empirical chain: sorted distinct observed values and the matrix of
/// observed transition frequencies (rows of states never left are zero).
struct MarkovEmpirical {
  std::vector<double> states;
  Eigen::MatrixXd transition;
};

/// Lambda_n(theta) = log((1/n) sum_k exp(theta X_k)).
double empirical_scgf_iid(const SampleSeries& series, double theta);

/// (P_n)_{ij} = #{k : (X_{k-1}, X_k) = (f(i), f(j))} / #{k : X_{k-1} = f(i)}, 0/0 = 0.
/// Throws SingleState when fewer than two distinct values were observed.
MarkovEmpirical empirical_transition_matrix(const SampleSeries& series);

/// Lambda_n(theta) = log rho(P_n D_theta), D_theta = diag(exp(theta f(i))).
double empirical_scgf_markov(const MarkovEmpirical& emp, double theta);

/// Evaluator for Lambda_n. i.i.d. samples are stored as distinct values with
/// their frequencies; the sum over observations is unchanged by this.
class EmpiricalScgf {
 public:
  static EmpiricalScgf from_iid(std::span<const double> sample);
  /// Weighted form: Lambda(theta) = log sum_i w_i exp(theta x_i) with sum_i w_i = 1.
  static EmpiricalScgf from_weighted(std::vector<double> values, std::vector<double> weights);
  static EmpiricalScgf from_markov(MarkovEmpirical emp);

  double operator()(double theta) const;
  SeriesKind kind() const noexcept { return kind_; }
  /// 700 / max |value|: the tilt range searched for lambda*_n.
  double theta_max() const noexcept { return theta_max_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  EmpiricalScgf() = default;
  void finish();

  SeriesKind kind_ = SeriesKind::iid;
  std::vector<double> values_;
  std::vector<double> weights_;
  Eigen::MatrixXd transition_;
  double theta_max_ = 0.0;
};

struct EstimateReport {
  double lambda_star_hat;
  double K_hat;
  double integral_lambda;
  std::uint64_t n;
  SeriesKind kind;
  // diagnostics
  double drift_estimate;
  double bracket_lo;
  double bracket_hi;
  double theta_max;
  std::size_t distinct_values;
  double min_value;
  double max_value;
};

/// lambda*_n = sup{theta : Lambda_n(theta) <= 0}, K_n = 2 sqrt(-int_0^lambda*_n Lambda_n).
/// Throws NonNegativeSampleDrift or NoPositiveRoot.
EstimateReport estimate(const SampleSeries& series);

/// The same pipeline for an already built evaluator.
EstimateReport estimate(const EmpiricalScgf& scgf, std::uint64_t n, double drift_estimate);

/// One increment per line; for CSV input the first column is used and a
/// non-numeric first line is taken as a header. Blank lines and lines
/// starting with '#' are skipped.
std::vector<double> read_series_file(const std::string& path);
std::vector<double> parse_series_text(std::string_view text);

}  // namespace busyburst
