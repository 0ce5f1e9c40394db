#include "busyburst/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "busyburst/error.hpp"
#include "busyburst/numerics.hpp"

namespace busyburst {

namespace {

constexpr double kProbabilitySumTolerance = 1e-12;
// exp(700) is still finite in double precision.
constexpr double kExponentBudget = 700.0;
constexpr double kGaussianThetaMax = 1e100;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::InvalidParameter, std::string(what) + " must be finite");
  }
}

void check_distribution(std::span<const double> probs, bool allow_zero, const char* what) {
  double sum = 0.0;
  for (double p : probs) {
    const bool ok = allow_zero ? (p >= 0.0 && p <= 1.0) : (p > 0.0 && p <= 1.0);
    if (!ok || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidProbability,
                  std::string(what) + ": probability " + std::to_string(p) + " outside " +
                      (allow_zero ? "[0,1]" : "(0,1]"));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": probabilities sum to " << sum << ", not 1";
    throw Error(ErrorCode::InvalidProbability, msg.str());
  }
}

void check_negative_drift(double drift) {
  if (!(drift < 0.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "drift " << drift << " is not strictly negative";
    throw Error(ErrorCode::NonNegativeDrift, msg.str());
  }
}

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> stationary_distribution(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  std::vector<double> out(pi.data(), pi.data() + n);
  for (double& x : out) x = std::max(x, 0.0);
  return out;
}

}  // namespace

std::string_view kind_name(const IncrementModel& model) {
  return std::visit(Overloaded{[](const GaussianModel&) { return std::string_view("gaussian"); },
                               [](const TwoPointModel&) { return std::string_view("two_point"); },
                               [](const DiscreteModel&) { return std::string_view("discrete"); },
                               [](const MarkovModel&) { return std::string_view("markov"); }},
                    model);
}

ValidatedModel validate(IncrementModel model) {
  ValidatedModel out(std::move(model));
  std::visit(
      Overloaded{
          [&](const GaussianModel& g) {
            require_finite(g.mean, "mean");
            require_finite(g.variance, "variance");
            if (!(g.variance > 0.0)) throw Error(ErrorCode::InvalidParameter, "variance must be positive");
            check_negative_drift(g.mean);
            out.drift_ = g.mean;
            out.theta_max_ = kGaussianThetaMax;
          },
          [&](const TwoPointModel& t) {
            require_finite(t.up_value, "up_value");
            if (!(t.up_value > 0.0)) throw Error(ErrorCode::InvalidParameter, "up_value must be positive");
            if (!(t.up_prob > 0.0 && t.up_prob < 1.0)) {
              throw Error(ErrorCode::InvalidProbability, "up_prob must lie in (0,1)");
            }
            const double drift = t.up_prob * t.up_value - (1.0 - t.up_prob);
            check_negative_drift(drift);
            out.drift_ = drift;
            out.theta_max_ = kExponentBudget / std::max(1.0, t.up_value);
          },
          [&](const DiscreteModel& d) {
            if (d.values.empty() || d.values.size() != d.probs.size()) {
              throw Error(ErrorCode::InvalidParameter, "values and probs must be non-empty and of equal length");
            }
            for (double v : d.values) require_finite(v, "value");
            check_distribution(d.probs, false, "probs");
            double drift = 0.0;
            for (std::size_t i = 0; i < d.values.size(); ++i) drift += d.probs[i] * d.values[i];
            check_negative_drift(drift);
            out.drift_ = drift;
            out.theta_max_ = kExponentBudget / std::max(1e-300, max_abs(d.values));
          },
          [&](const MarkovModel& m) {
            const auto n = static_cast<Eigen::Index>(m.values.size());
            if (n == 0 || m.transition.rows() != n || m.transition.cols() != n) {
              throw Error(ErrorCode::InvalidParameter, "transition must be an MxM matrix matching values");
            }
            for (double v : m.values) require_finite(v, "value");
            if (std::set<double>(m.values.begin(), m.values.end()).size() != m.values.size()) {
              throw Error(ErrorCode::DuplicateStateValue, "state values must be pairwise distinct");
            }
            for (Eigen::Index i = 0; i < n; ++i) {
              const Eigen::VectorXd row = m.transition.row(i).transpose();
              check_distribution(std::span<const double>(row.data(), row.size()), true,
                                 ("transition row " + std::to_string(i)).c_str());
            }
            if (!numerics::is_irreducible(m.transition)) {
              throw Error(ErrorCode::ReducibleChain, "transition matrix is not irreducible");
            }
            out.stationary_ = stationary_distribution(m.transition);
            if (m.initial.empty()) {
              out.initial_ = out.stationary_;
            } else {
              if (m.initial.size() != m.values.size()) {
                throw Error(ErrorCode::InvalidParameter, "initial must have one entry per state");
              }
              check_distribution(m.initial, true, "initial");
              out.initial_ = m.initial;
            }
            double drift = 0.0;
            for (std::size_t i = 0; i < m.values.size(); ++i) drift += out.stationary_[i] * m.values[i];
            check_negative_drift(drift);
            out.drift_ = drift;
            out.theta_max_ = kExponentBudget / std::max(1e-300, max_abs(m.values));
          }},
      out.spec_);
  return out;
}

double drift(const ValidatedModel& model) { return model.drift(); }

double scgf(const ValidatedModel& model, double theta) {
  return std::visit(
      Overloaded{[&](const GaussianModel& g) { return 0.5 * g.variance * theta * theta + g.mean * theta; },
                 [&](const TwoPointModel& t) {
                   const double values[2] = {-1.0, t.up_value};
                   const double probs[2] = {1.0 - t.up_prob, t.up_prob};
                   return numerics::log_sum_exp_weighted(values, probs, theta);
                 },
                 [&](const DiscreteModel& d) { return numerics::log_sum_exp_weighted(d.values, d.probs, theta); },
                 [&](const MarkovModel& m) {
                   return numerics::log_tilted_spectral_radius(m.transition, m.values, theta);
                 }},
      model.spec());
}

double scgf_derivative(const ValidatedModel& model, double theta) {
  return std::visit(
      Overloaded{[&](const GaussianModel& g) { return g.variance * theta + g.mean; },
                 [&](const TwoPointModel& t) {
                   const double values[2] = {-1.0, t.up_value};
                   const double probs[2] = {1.0 - t.up_prob, t.up_prob};
                   return numerics::tilted_mean(values, probs, theta);
                 },
                 [&](const DiscreteModel& d) { return numerics::tilted_mean(d.values, d.probs, theta); },
                 [&](const MarkovModel& m) {
                   return numerics::log_tilted_spectral_radius_derivative(m.transition, m.values, theta);
                 }},
      model.spec());
}

// ---------------------------------------------------------------------------
// JSON model files

namespace {

using nlohmann::json;

std::string position_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

void check_keys(const json& j, std::initializer_list<std::string_view> required,
                std::initializer_list<std::string_view> optional = {}) {
  for (auto key : required) {
    if (!j.contains(std::string(key))) {
      throw Error(ErrorCode::Parse, "model: missing field \"" + std::string(key) + "\"");
    }
  }
  for (const auto& [key, _] : j.items()) {
    if (key == "kind") continue;
    const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                       std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw Error(ErrorCode::Parse, "model: unknown field \"" + key + "\"");
  }
}

template <class T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Parse, std::string("model: field \"") + key + "\" has the wrong type");
  }
}

}  // namespace

IncrementModel parse_model_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, "malformed JSON at " + position_context(text, e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Parse, "model: top-level value must be an object");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorCode::Parse, "model: missing string field \"kind\"");
  }
  const auto kind = j["kind"].get<std::string>();
  if (kind == "gaussian") {
    check_keys(j, {"mean", "variance"});
    return GaussianModel{field<double>(j, "mean"), field<double>(j, "variance")};
  }
  if (kind == "two_point") {
    check_keys(j, {"up_value", "up_prob"});
    return TwoPointModel{field<double>(j, "up_value"), field<double>(j, "up_prob")};
  }
  if (kind == "discrete") {
    check_keys(j, {"values", "probs"});
    return DiscreteModel{field<std::vector<double>>(j, "values"), field<std::vector<double>>(j, "probs")};
  }
  if (kind == "markov") {
    check_keys(j, {"values", "transition"}, {"initial"});
    MarkovModel m;
    m.values = field<std::vector<double>>(j, "values");
    const auto rows = field<std::vector<std::vector<double>>>(j, "transition");
    const auto n = static_cast<Eigen::Index>(rows.size());
    m.transition.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != n) {
        throw Error(ErrorCode::Parse, "model: transition must be a square matrix");
      }
      for (Eigen::Index k = 0; k < n; ++k) m.transition(i, k) = rows[i][k];
    }
    if (j.contains("initial")) m.initial = field<std::vector<double>>(j, "initial");
    return m;
  }
  throw Error(ErrorCode::Parse, "model: unknown kind \"" + kind + "\"");
}

ValidatedModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open model file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return validate(parse_model_json(buffer.str()));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

std::vector<double> cumulative(std::span<const double> probs) {
  std::vector<double> cum(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) cum[i] = (acc += probs[i]);
  if (!cum.empty()) cum.back() = 1.0;
  return cum;
}

}  // namespace

IncrementStream::IncrementStream(const ValidatedModel& model, std::uint64_t seed, std::uint64_t stream_id)
    : model_(&model), rng_(seed, stream_id), kind_(static_cast<int>(model.spec().index())) {
  std::visit(Overloaded{[&](const GaussianModel& g) {
                          mean_ = g.mean;
                          stddev_ = std::sqrt(g.variance);
                        },
                        [&](const TwoPointModel& t) {
                          atoms_ = {-1.0, t.up_value};
                          const double probs[2] = {1.0 - t.up_prob, t.up_prob};
                          cumulative_ = cumulative(probs);
                        },
                        [&](const DiscreteModel& d) {
                          atoms_ = d.values;
                          cumulative_ = cumulative(d.probs);
                        },
                        [&](const MarkovModel& m) {
                          atoms_ = m.values;
                          cumulative_ = cumulative(model.initial());
                          row_cumulative_.reserve(m.values.size());
                          for (Eigen::Index i = 0; i < m.transition.rows(); ++i) {
                            const Eigen::VectorXd row = m.transition.row(i).transpose();
                            row_cumulative_.push_back(cumulative(std::span<const double>(row.data(), row.size())));
                          }
                        }},
             model.spec());
}

std::size_t IncrementStream::draw_index(std::span<const double> cum) {
  const double u = rng_.next_uniform();
  for (std::size_t i = 0; i + 1 < cum.size(); ++i) {
    if (u < cum[i]) return i;
  }
  return cum.size() - 1;
}

double IncrementStream::next() {
  switch (kind_) {
    case 0: {
      if (spare_normal_) {
        const double z = *spare_normal_;
        spare_normal_.reset();
        return mean_ + stddev_ * z;
      }
      // Box-Muller; both variates are used.
      const double u1 = rng_.next_uniform();
      const double u2 = rng_.next_uniform();
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      spare_normal_ = r * std::sin(angle);
      return mean_ + stddev_ * (r * std::cos(angle));
    }
    case 1:
    case 2:
      return atoms_[draw_index(cumulative_)];
    default: {
      state_ = state_ ? draw_index(row_cumulative_[*state_]) : draw_index(cumulative_);
      return atoms_[*state_];
    }
  }
}

IncrementStream sample_increments(const ValidatedModel& model, std::uint64_t seed, std::uint64_t stream_id) {
  return IncrementStream(model, seed, stream_id);
}

}  // namespace busyburst
