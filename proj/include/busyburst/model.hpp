#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "busyburst/philox.hpp"

namespace busyburst {

/// i.i.d. N(mean, variance) increments.
struct GaussianModel {
  double mean;
  double variance;
};

/// i.i.d. increments taking +up_value with probability up_prob and -1
/// otherwise.
struct TwoPointModel {
  double up_value;
  double up_prob;
};

/// i.i.d. increments on a finite set of atoms.
struct DiscreteModel {
  std::vector<double> values;
  std::vector<double> probs;
};

/// Increments f(Y_k) of a finite-state Markov chain Y with the given
/// row-stochastic transition matrix. An empty `initial` means "start from the
/// stationary distribution".
struct MarkovModel {
  std::vector<double> values;
  Eigen::MatrixXd transition;
  std::vector<double> initial;
};

using IncrementModel = std::variant<GaussianModel, TwoPointModel, DiscreteModel, MarkovModel>;

std::string_view kind_name(const IncrementModel& model);

/// An increment model that passed validation: negative drift, proper
/// probabilities and, for Markov chains, an irreducible transition matrix
/// with distinct state values. Immutable and safe to share across threads.
class ValidatedModel {
 public:
  const IncrementModel& spec() const noexcept { return spec_; }
  std::string_view kind() const { return kind_name(spec_); }

  /// Long-run mean increment, -delta < 0.
  double drift() const noexcept { return drift_; }
  double delta() const noexcept { return -drift_; }

  /// Largest |theta| at which the sCGF is evaluated by root brackets.
  double theta_max() const noexcept { return theta_max_; }

  /// Stationary distribution (Markov models only; empty otherwise).
  const std::vector<double>& stationary() const noexcept { return stationary_; }
  /// Distribution of the first increment's state (Markov models only).
  const std::vector<double>& initial() const noexcept { return initial_; }

 private:
  friend ValidatedModel validate(IncrementModel model);
  explicit ValidatedModel(IncrementModel spec) : spec_(std::move(spec)) {}

  IncrementModel spec_;
  double drift_ = 0.0;
  double theta_max_ = 0.0;
  std::vector<double> stationary_;
  std::vector<double> initial_;
};

/// Throws Error with NonNegativeDrift, InvalidProbability, InvalidParameter,
/// ReducibleChain or DuplicateStateValue.
ValidatedModel validate(IncrementModel model);

double drift(const ValidatedModel& model);

/// Scaled cumulant generating function Lambda(theta) = lim (1/k) log E e^{theta S_k}.
double scgf(const ValidatedModel& model, double theta);

/// Lambda'(theta). Closed forms for the i.i.d. kinds; Perron-vector
/// perturbation for Markov chains.
double scgf_derivative(const ValidatedModel& model, double theta);

/// Parses the JSON model description ({"kind": ..., parameters}). Errors are
/// reported as ErrorCode::Parse with line and column context.
IncrementModel parse_model_json(std::string_view text);
ValidatedModel load_model_file(const std::string& path);

/// Deterministic increment stream for (seed, stream_id). Holds a pointer to
/// the model, which must outlive the stream.
class IncrementStream {
 public:
  IncrementStream(const ValidatedModel& model, std::uint64_t seed, std::uint64_t stream_id);

  double next();

 private:
  std::size_t draw_index(std::span<const double> cumulative);

  const ValidatedModel* model_;
  PhiloxStream rng_;
  int kind_;
  double mean_ = 0.0;
  double stddev_ = 0.0;
  std::optional<double> spare_normal_;
  std::vector<double> atoms_;
  std::vector<double> cumulative_;                // i.i.d. kinds and Markov initial law
  std::vector<std::vector<double>> row_cumulative_;  // Markov transitions
  std::optional<std::size_t> state_;
};

IncrementStream sample_increments(const ValidatedModel& model, std::uint64_t seed, std::uint64_t stream_id);

}  // namespace busyburst
