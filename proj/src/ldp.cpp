#include "busyburst/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "busyburst/error.hpp"

namespace busyburst {

namespace {

constexpr double kRootRelTol = 1e-12;
constexpr double kQuadratureAbsTol = 1e-11;
constexpr int kQuadratureMaxDepth = 60;
constexpr double kSymmetryTol = 1e-9;
constexpr double kIdentityTol = 1e-8;
constexpr double kSupportClosureTol = 1e-9;

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive and finite");
  }
}

}  // namespace

std::string_view to_string(PathLabel label) {
  switch (label) {
    case PathLabel::psi_star: return "psi_star";
    case PathLabel::psi_star_b: return "psi_star_b";
    case PathLabel::varphi_star: return "varphi_star";
    case PathLabel::simulated: return "simulated";
    case PathLabel::scgf: return "scgf";
  }
  return "unknown";
}

CriticalTilt find_critical_tilt(const numerics::ScalarFunction& scgf, double theta_max) {
  if (!(theta_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta_max must be positive");
  double lo = 0.0;
  double hi = std::min(1.0, theta_max);
  while (!(scgf(hi) > 0.0)) {
    if (hi >= theta_max) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "Lambda(theta) <= 0 for all theta up to theta_max = " << theta_max;
      throw Error(ErrorCode::NoPositiveRoot, msg.str());
    }
    lo = hi;
    hi = std::min(2.0 * hi, theta_max);
  }
  const auto bracket_lo = lo;
  const auto bracket_hi = hi;
  const auto result = numerics::bisect(scgf, lo, hi, kRootRelTol);
  return {result.root, bracket_lo, bracket_hi};
}

double integrate_scgf(const numerics::ScalarFunction& scgf, double upper) {
  return numerics::adaptive_simpson(scgf, 0.0, upper, kQuadratureAbsTol, kQuadratureMaxDepth);
}

double exponent_from_integral(double integral_lambda) {
  return 2.0 * std::sqrt(std::max(0.0, -integral_lambda));
}

namespace {

numerics::ScalarFunction bind_scgf(const ValidatedModel& model) {
  return [&model](double theta) { return scgf(model, theta); };
}

}  // namespace

double lambda_star(const ValidatedModel& model) {
  return find_critical_tilt(bind_scgf(model), model.theta_max()).root;
}

LdpSummary busy_exponent_K(const ValidatedModel& model) {
  const auto f = bind_scgf(model);
  const double root = find_critical_tilt(f, model.theta_max()).root;
  const double integral = integrate_scgf(f, root);
  return LdpSummary{model.delta(), scgf_derivative(model, root), root, exponent_from_integral(integral), integral};
}

double conjugate_tilt(const ValidatedModel& model, double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::OutOfSupport, "x must be finite");
  const double at_zero = scgf_derivative(model, 0.0);
  if (x == at_zero) return 0.0;
  const double cap = model.theta_max();
  const double direction = x > at_zero ? 1.0 : -1.0;
  double near = 0.0;
  double far = std::min(1.0, cap);
  // Walk outwards until Lambda'(direction * far) passes x.
  while (direction * (scgf_derivative(model, direction * far) - x) < 0.0) {
    if (far >= cap) {
      const double edge = scgf_derivative(model, direction * cap);
      if (std::abs(edge - x) <= kSupportClosureTol * std::max(1.0, std::abs(x))) return direction * cap;
      std::ostringstream msg;
      msg.precision(17);
      msg << "x = " << x << " lies outside the range of Lambda' (edge value " << edge << ")";
      throw Error(ErrorCode::OutOfSupport, msg.str());
    }
    near = far;
    far = std::min(2.0 * far, cap);
  }
  const double lo = direction > 0 ? near : -far;
  const double hi = direction > 0 ? far : -near;
  return numerics::bisect([&](double theta) { return scgf_derivative(model, theta) - x; }, lo, hi, kRootRelTol)
      .root;
}

double rate_function(const ValidatedModel& model, double x) {
  const double theta = conjugate_tilt(model, x);
  return std::max(0.0, theta * x - scgf(model, theta));
}

double xi(const ValidatedModel& model, double r) { return scgf_derivative(model, r); }

std::vector<double> uniform_grid(double t_end, std::size_t points) {
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least two points");
  std::vector<double> grid(points);
  const double step = t_end / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = step * static_cast<double>(i);
  grid.back() = t_end;
  return grid;
}

double psi_star_at(const ValidatedModel& model, const LdpSummary& s, double t) {
  if (t > 1.0) return (1.0 - t) * s.delta;
  return -scgf(model, s.lambda_star * (1.0 - t)) / s.lambda_star;
}

SampledPath psi_star(const ValidatedModel& model, const LdpSummary& s, std::span<const double> grid) {
  SampledPath path{{grid.begin(), grid.end()}, {}, PathLabel::psi_star};
  path.values.reserve(grid.size());
  for (double t : grid) path.values.push_back(psi_star_at(model, s, t));
  return path;
}

double psi_star_by_quadrature(const ValidatedModel& model, const LdpSummary& s, double t) {
  const double upto = std::min(t, 1.0);
  const double head = numerics::adaptive_simpson(
      [&](double u) { return xi(model, s.lambda_star * (1.0 - u)); }, 0.0, upto, kQuadratureAbsTol,
      kQuadratureMaxDepth);
  return t > 1.0 ? head + (1.0 - t) * s.delta : head;
}

double psi_star_by_rate_function(const ValidatedModel& model, const LdpSummary& s, double t) {
  const double velocity = xi(model, s.lambda_star * (1.0 - t));
  return rate_function(model, velocity) / s.lambda_star - velocity * (1.0 - t);
}

double psi_star_integral(const LdpSummary& s) {
  return -s.integral_lambda / (s.lambda_star * s.lambda_star);
}

double most_likely_duration_a(const LdpSummary& s, double b) {
  require_positive(b, "b");
  return 2.0 * s.lambda_star * std::sqrt(b) / s.K;
}

SampledPath psi_star_b(const ValidatedModel& model, const LdpSummary& s, double b, std::span<const double> grid) {
  const double a = most_likely_duration_a(s, b);
  SampledPath path{{grid.begin(), grid.end()}, {}, PathLabel::psi_star_b};
  path.values.reserve(grid.size());
  for (double t : grid) path.values.push_back(a * psi_star_at(model, s, t / a));
  return path;
}

double varphi_star_at(const LdpSummary& s, double h, double t) {
  const double kink = h / s.x_star;
  return t < kink ? s.x_star * t : h - s.delta * (t - kink);
}

SampledPath varphi_star(const LdpSummary& s, double h, std::span<const double> grid) {
  require_positive(h, "h");
  SampledPath path{{grid.begin(), grid.end()}, {}, PathLabel::varphi_star};
  path.values.reserve(grid.size());
  for (double t : grid) path.values.push_back(varphi_star_at(s, h, t));
  return path;
}

double hit_level_exponent(const LdpSummary& s, double h) {
  if (h < 0.0) throw Error(ErrorCode::InvalidArgument, "h must be non-negative");
  return -h * s.lambda_star;
}

double predicted_duration(const LdpSummary& s, double area) {
  require_positive(area, "B");
  return 2.0 * s.lambda_star * std::sqrt(area) / s.K;
}

SampledPath predicted_big_path(const ValidatedModel& model, const LdpSummary& s, double area) {
  const double tau = predicted_duration(s, area);
  const auto last = static_cast<std::size_t>(std::ceil(tau));
  SampledPath path{{}, {}, PathLabel::psi_star_b};
  path.times.reserve(last + 1);
  path.values.reserve(last + 1);
  for (std::size_t i = 0; i <= last; ++i) {
    const double t = static_cast<double>(i);
    path.times.push_back(t);
    path.values.push_back(tau * psi_star_at(model, s, t / tau));
  }
  return path;
}

SampledPath predicted_high_path(const LdpSummary& s, double height) {
  require_positive(height, "H");
  const double end = height / s.x_star + height / s.delta;
  const auto last = static_cast<std::size_t>(std::ceil(end));
  SampledPath path{{}, {}, PathLabel::varphi_star};
  path.times.reserve(last + 1);
  path.values.reserve(last + 1);
  for (std::size_t i = 0; i <= last; ++i) {
    const double t = static_cast<double>(i);
    path.times.push_back(t);
    path.values.push_back(varphi_star_at(s, height, t));
  }
  return path;
}

SymmetryReport check_symmetry(const ValidatedModel& model, const LdpSummary& s) {
  SymmetryReport report{};
  for (int i = 0; i <= 100; ++i) {
    const double theta = s.lambda_star * static_cast<double>(i) / 100.0;
    report.max_defect =
        std::max(report.max_defect, std::abs(scgf(model, theta) - scgf(model, s.lambda_star - theta)));
  }
  report.symmetric = report.max_defect <= kSymmetryTol;
  report.x_star_defect = std::abs(s.x_star - s.delta);
  report.lambda_star_defect = std::abs(s.lambda_star - 2.0 * conjugate_tilt(model, 0.0));
  report.identities_hold = report.x_star_defect <= kIdentityTol && report.lambda_star_defect <= kIdentityTol;
  return report;
}

}  // namespace busyburst
