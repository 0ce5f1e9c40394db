#include "busyburst/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "busyburst/error.hpp"

namespace busyburst {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::NonNegativeDrift: return "NonNegativeDrift";
    case ErrorCode::ReducibleChain: return "ReducibleChain";
    case ErrorCode::DuplicateStateValue: return "DuplicateStateValue";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NoPositiveRoot: return "NoPositiveRoot";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::ExcessiveTruncation: return "ExcessiveTruncation";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::SingleState: return "SingleState";
    case ErrorCode::NonNegativeSampleDrift: return "NonNegativeSampleDrift";
  }
  return "Unknown";
}

namespace numerics {

BisectionResult bisect(const ScalarFunction& f, double lo, double hi, double rel_tol) {
  if (!(lo < hi)) {
    throw Error(ErrorCode::InvalidArgument, "bisect: empty bracket");
  }
  int iterations = 0;
  for (;;) {
    const double mid = lo + 0.5 * (hi - lo);
    if (hi - lo <= rel_tol * std::max(1.0, std::abs(mid))) break;
    if (mid <= lo || mid >= hi) break;
    const double value = f(mid);
    if (std::isnan(value)) {
      throw Error(ErrorCode::NonConvergence, "bisect: function returned NaN at " + std::to_string(mid));
    }
    if (value <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++iterations;
  }
  return {lo + 0.5 * (hi - lo), lo, hi, iterations};
}

namespace {

struct SimpsonState {
  const ScalarFunction& f;
  int max_depth;
  std::size_t max_evaluations;
  std::size_t evaluations = 0;

  double eval(double x) {
    if (++evaluations > max_evaluations) {
      throw Error(ErrorCode::NonConvergence, "adaptive_simpson: evaluation budget exhausted");
    }
    return f(x);
  }

  double recurse(double a, double fa, double b, double fb, double m, double fm, double whole,
                 double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= max_depth || std::abs(delta) <= 15.0 * tol) {
      return left + right + delta / 15.0;
    }
    return recurse(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
           recurse(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

double adaptive_simpson(const ScalarFunction& f, double a, double b, double abs_tol, int max_depth,
                        std::size_t max_evaluations) {
  if (a == b) return 0.0;
  SimpsonState state{f, max_depth, max_evaluations};
  const double m = 0.5 * (a + b);
  const double fa = state.eval(a);
  const double fb = state.eval(b);
  const double fm = state.eval(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return state.recurse(a, fa, b, fb, m, fm, whole, abs_tol, 0);
}

double perron_root_2x2(double a, double b, double c, double d) {
  const double diff = a - d;
  return 0.5 * (a + d + std::sqrt(diff * diff + 4.0 * b * c));
}

PerronPair perron_power_iteration(const Eigen::MatrixXd& a, double rel_tol, int max_iterations) {
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, "perron_power_iteration: matrix must be square and non-empty");
  }
  if (n == 1) {
    return {a(0, 0), Eigen::VectorXd::Ones(1), 0};
  }
  const double shift = a.rowwise().sum().maxCoeff();
  if (shift <= 0.0) {
    return {0.0, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), 0};
  }
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd y = a * x;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ratio = y(i) / x(i);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    if (hi - lo <= rel_tol * hi) {
      return {0.5 * (lo + hi), x, it};
    }
    x = y + shift * x;
    x /= x.sum();
  }
  throw Error(ErrorCode::NonConvergence,
              "power iteration did not converge in " + std::to_string(max_iterations) + " iterations");
}

std::vector<std::vector<int>> strongly_connected_components(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  std::vector<std::vector<int>> components;
  int counter = 0;

  std::function<void(int)> connect = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w = 0; w < n; ++w) {
      if (a(v, w) <= 0.0) continue;
      if (index[w] < 0) {
        connect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> component;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component.push_back(w);
      } while (w != v);
      std::sort(component.begin(), component.end());
      components.push_back(std::move(component));
    }
  };

  for (int v = 0; v < n; ++v) {
    if (index[v] < 0) connect(v);
  }
  return components;
}

bool is_irreducible(const Eigen::MatrixXd& a) {
  return strongly_connected_components(a).size() == 1;
}

namespace {

double block_radius(const Eigen::MatrixXd& a, const std::vector<int>& block) {
  const auto m = static_cast<Eigen::Index>(block.size());
  if (m == 1) return a(block[0], block[0]);
  if (m == 2) {
    return perron_root_2x2(a(block[0], block[0]), a(block[0], block[1]), a(block[1], block[0]),
                           a(block[1], block[1]));
  }
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = a(block[i], block[j]);
  }
  return perron_power_iteration(sub).root;
}

Eigen::MatrixXd tilted(const Eigen::MatrixXd& transition, std::span<const double> values,
                       double theta, double& shift) {
  const auto n = transition.rows();
  if (transition.cols() != n || static_cast<std::size_t>(n) != values.size()) {
    throw Error(ErrorCode::InvalidArgument, "tilted matrix: dimension mismatch");
  }
  shift = -std::numeric_limits<double>::infinity();
  for (double v : values) shift = std::max(shift, theta * v);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double e = std::exp(theta * values[j] - shift);
    a.col(j) = transition.col(j) * e;
  }
  return a;
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::InvalidArgument, "spectral_radius: matrix must be square");
  if (n == 0) return 0.0;
  if (n == 1) return a(0, 0);
  if (n == 2) return perron_root_2x2(a(0, 0), a(0, 1), a(1, 0), a(1, 1));
  double rho = 0.0;
  for (const auto& block : strongly_connected_components(a)) {
    rho = std::max(rho, block_radius(a, block));
  }
  return rho;
}

double log_tilted_spectral_radius(const Eigen::MatrixXd& transition, std::span<const double> values,
                                  double theta) {
  double shift = 0.0;
  const Eigen::MatrixXd a = tilted(transition, values, theta, shift);
  return shift + std::log(spectral_radius(a));
}

double log_tilted_spectral_radius_derivative(const Eigen::MatrixXd& transition,
                                             std::span<const double> values, double theta) {
  double shift = 0.0;
  const Eigen::MatrixXd a = tilted(transition, values, theta, shift);
  if (a.rows() == 1) return values[0];
  if (a.rows() == 2) {
    const double p = a(0, 0), q = a(0, 1), r = a(1, 0), s = a(1, 1);
    const double f0 = values[0], f1 = values[1];
    const double dp = f0 * p, dq = f1 * q, dr = f0 * r, ds = f1 * s;
    const double diff = p - s;
    const double root_disc = std::sqrt(diff * diff + 4.0 * q * r);
    const double rho = 0.5 * (p + s + root_disc);
    double drho = 0.5 * (dp + ds);
    if (root_disc > 0.0) {
      drho += 0.5 * (diff * (dp - ds) + 2.0 * (dq * r + q * dr)) / root_disc;
    }
    return drho / rho;
  }
  const PerronPair right = perron_power_iteration(a);
  const PerronPair left = perron_power_iteration(a.transpose());
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double w = left.vector(i) * right.vector(i);
    num += w * values[i];
    den += w;
  }
  return num / den;
}

double log_sum_exp_weighted(std::span<const double> values, std::span<const double> weights,
                            double theta) {
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] > 0.0) shift = std::max(shift, theta * values[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] > 0.0) sum += weights[i] * std::exp(theta * values[i] - shift);
  }
  return shift + std::log(sum);
}

double tilted_mean(std::span<const double> values, std::span<const double> weights, double theta) {
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] > 0.0) shift = std::max(shift, theta * values[i]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    const double w = weights[i] * std::exp(theta * values[i] - shift);
    num += w * values[i];
    den += w;
  }
  return num / den;
}

}  // namespace numerics
}  // namespace busyburst
