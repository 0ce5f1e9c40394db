#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace busyburst::numerics {

using ScalarFunction = std::function<double(double)>;

/// Bisection for a sign change of `f` on [lo, hi] with f(lo) <= 0 < f(hi).
/// The bracket is kept invariant, so for a convex f with f(0) = 0 started at
/// lo >= 0 the result approximates sup{x : f(x) <= 0}. Stops once
/// hi - lo <= rel_tol * max(1, |x|) or the bracket can no longer shrink.
struct BisectionResult {
  double root;
  double lo;
  double hi;
  int iterations;
};
BisectionResult bisect(const ScalarFunction& f, double lo, double hi, double rel_tol = 1e-12);

/// Adaptive Simpson quadrature with Richardson correction. `max_evaluations`
/// caps total work; exceeding it raises NonConvergence.
double adaptive_simpson(const ScalarFunction& f, double a, double b, double abs_tol = 1e-11,
                        int max_depth = 60, std::size_t max_evaluations = 20'000'000);

/// Largest eigenvalue of [[a, b], [c, d]] for nonnegative entries.
double perron_root_2x2(double a, double b, double c, double d);

struct PerronPair {
  double root;
  Eigen::VectorXd vector;  // positive, unit 1-norm
  int iterations;
};

/// Power iteration for an irreducible nonnegative matrix. Iterates the shifted
/// matrix A + sI (primitive for any s > 0) and stops when the Collatz-Wielandt
/// bounds min_i (Ax)_i/x_i <= rho <= max_i (Ax)_i/x_i agree to rel_tol.
PerronPair perron_power_iteration(const Eigen::MatrixXd& a, double rel_tol = 1e-13,
                                  int max_iterations = 100'000);

/// Strongly connected components of the directed graph with an edge i -> j
/// whenever a(i, j) > 0. Components are returned in reverse topological order.
std::vector<std::vector<int>> strongly_connected_components(const Eigen::MatrixXd& a);

bool is_irreducible(const Eigen::MatrixXd& a);

/// Spectral radius of a nonnegative square matrix of any size. Reducible
/// matrices are split into irreducible diagonal blocks; each block uses the
/// closed form when it is at most 2x2 and power iteration otherwise.
double spectral_radius(const Eigen::MatrixXd& a);

/// log rho(P diag(exp(theta * values))) evaluated with the exponentials
/// shifted by max_i theta * values[i] so the tilted matrix cannot overflow.
double log_tilted_spectral_radius(const Eigen::MatrixXd& transition,
                                  std::span<const double> values, double theta);

/// d/dtheta of log_tilted_spectral_radius for an irreducible transition
/// matrix: sum_i u_i f_i v_i / sum_i u_i v_i with u, v the left and right
/// Perron vectors of the tilted matrix.
double log_tilted_spectral_radius_derivative(const Eigen::MatrixXd& transition,
                                             std::span<const double> values, double theta);

/// log(sum_i w_i exp(theta * x_i)) with the maximum exponent factored out.
/// Weights are used as given, so pass probabilities or counts / n.
double log_sum_exp_weighted(std::span<const double> values, std::span<const double> weights,
                            double theta);

/// Tilted mean sum_i w_i x_i e^{theta x_i} / sum_i w_i e^{theta x_i}.
double tilted_mean(std::span<const double> values, std::span<const double> weights, double theta);

}  // namespace busyburst::numerics
