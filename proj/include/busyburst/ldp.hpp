#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "busyburst/model.hpp"
#include "busyburst/numerics.hpp"

namespace busyburst {

/// Constants governing the large deviations of the busy period.
///   delta           : minus the drift
///   lambda_star     : sup{theta : Lambda(theta) <= 0}, the positive zero of Lambda
///   x_star          : Lambda'(lambda_star), slope of the most likely climb
///   integral_lambda : int_0^lambda_star Lambda(theta) dtheta (negative)
///   K               : 2 sqrt(-integral_lambda); log P(B >= b) ~ -K sqrt(b)
struct LdpSummary {
  double delta;
  double x_star;
  double lambda_star;
  double K;
  double integral_lambda;
};

enum class PathLabel { psi_star, psi_star_b, varphi_star, simulated, scgf };
std::string_view to_string(PathLabel label);

struct SampledPath {
  std::vector<double> times;
  std::vector<double> values;
  PathLabel label;
};

/// Root bracket search shared by the model and the empirical estimators:
/// theta_hi doubles from 1 until Lambda(theta_hi) > 0 (capped at theta_max),
/// then bisection to 1e-12 relative width.
struct CriticalTilt {
  double root;
  double bracket_lo;
  double bracket_hi;
};
CriticalTilt find_critical_tilt(const numerics::ScalarFunction& scgf, double theta_max);

/// int_0^upper Lambda by adaptive Simpson at absolute tolerance 1e-11.
double integrate_scgf(const numerics::ScalarFunction& scgf, double upper);

/// K = 2 sqrt(-integral), clamped at zero for a (numerically) non-negative integral.
double exponent_from_integral(double integral_lambda);

double lambda_star(const ValidatedModel& model);
LdpSummary busy_exponent_K(const ValidatedModel& model);

/// Solves Lambda'(theta) = x; equals I'(x). Throws OutOfSupport when x lies
/// outside the closure of the range of Lambda'.
double conjugate_tilt(const ValidatedModel& model, double x);

/// Legendre transform I(x) = sup_theta (theta x - Lambda(theta)).
double rate_function(const ValidatedModel& model, double x);

/// Xi(r) = (I')^{-1}(r) = Lambda'(r).
double xi(const ValidatedModel& model, double r);

std::vector<double> uniform_grid(double t_end, std::size_t points = 1001);

/// psi*(t) = -Lambda(lambda*(1 - t)) / lambda* on [0, 1], (1 - t) delta beyond.
double psi_star_at(const ValidatedModel& model, const LdpSummary& s, double t);
SampledPath psi_star(const ValidatedModel& model, const LdpSummary& s, std::span<const double> grid);

/// The same path from its integral representation int_0^t Xi(lambda*(1-s)) ds.
double psi_star_by_quadrature(const ValidatedModel& model, const LdpSummary& s, double t);

/// The same path from the rate-function representation
/// I(Xi(lambda*(1-t))) / lambda* - Xi(lambda*(1-t)) (1-t).
double psi_star_by_rate_function(const ValidatedModel& model, const LdpSummary& s, double t);

/// int_0^1 psi* = -integral_lambda / lambda*^2 = (K / (2 lambda*))^2.
double psi_star_integral(const LdpSummary& s);

/// Most likely duration scale a = 2 lambda* sqrt(b) / K of a busy period of area b.
double most_likely_duration_a(const LdpSummary& s, double b);

/// psi*_b(t) = a psi*(t / a).
SampledPath psi_star_b(const ValidatedModel& model, const LdpSummary& s, double b, std::span<const double> grid);

/// Piecewise-linear most likely path to level h: slope x* until h / x*, then -delta.
double varphi_star_at(const LdpSummary& s, double h, double t);
SampledPath varphi_star(const LdpSummary& s, double h, std::span<const double> grid);

/// lim (1/n) log P(sup_k S_k >= n h) = -h lambda*.
double hit_level_exponent(const LdpSummary& s, double h);

/// Duration tau* = 2 lambda* sqrt(B) / K predicted for an observed area B.
double predicted_duration(const LdpSummary& s, double area);

/// S_i ~ tau* psi*(i / tau*) on i = 0..ceil(tau*).
SampledPath predicted_big_path(const ValidatedModel& model, const LdpSummary& s, double area);

/// S_i ~ varphi*(i) with h = H on i = 0..ceil(H/x* + H/delta).
SampledPath predicted_high_path(const LdpSummary& s, double height);

struct SymmetryReport {
  bool symmetric;
  double max_defect;          // max |Lambda(theta) - Lambda(lambda* - theta)| over 101 tilts
  double x_star_defect;       // |x* - delta|
  double lambda_star_defect;  // |lambda* - 2 I'(0)|
  bool identities_hold;       // both defects <= 1e-8 (meaningful only when symmetric)
};
SymmetryReport check_symmetry(const ValidatedModel& model, const LdpSummary& s);

}  // namespace busyburst
