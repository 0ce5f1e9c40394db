#include <doctest.h>

#include <cmath>
#include <set>

#include "busyburst/error.hpp"
#include "busyburst/model.hpp"
#include "busyburst/numerics.hpp"
#include "test_helpers.hpp"

using namespace busyburst;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

double practical_theta_max(const ValidatedModel& m) { return std::min(m.theta_max(), 10.0); }

}  // namespace

TEST_CASE("validate: examples") {
  const auto g = validate(GaussianModel{-0.1, 1.0});
  CHECK(g.delta() == doctest::Approx(0.1));
  CHECK(code_of([] { validate(TwoPointModel{1.0, 0.5}); }) == ErrorCode::NonNegativeDrift);
  const auto m = validate(testing::two_state_markov(0.2, 0.3));
  CHECK(m.delta() == doctest::Approx((0.3 - 0.2) / (0.2 + 0.3)).epsilon(1e-14));
  REQUIRE(m.stationary().size() == 2);
  CHECK(m.stationary()[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(m.stationary()[1] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(m.initial() == m.stationary());
}

TEST_CASE("validate: error paths") {
  CHECK(code_of([] { validate(GaussianModel{0.0, 1.0}); }) == ErrorCode::NonNegativeDrift);
  CHECK(code_of([] { validate(GaussianModel{-0.1, 0.0}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { validate(TwoPointModel{1.0, 1.0}); }) == ErrorCode::InvalidProbability);
  CHECK(code_of([] { validate(TwoPointModel{-1.0, 0.2}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { validate(DiscreteModel{{-1, 2}, {0.5, 0.4}}); }) == ErrorCode::InvalidProbability);
  CHECK(code_of([] { validate(DiscreteModel{{-1, 2}, {1.0, 0.0}}); }) == ErrorCode::InvalidProbability);
  CHECK(code_of([] { validate(DiscreteModel{{-1, 2}, {0.5}}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { validate(DiscreteModel{{-1, 3}, {0.5, 0.5}}); }) == ErrorCode::NonNegativeDrift);

  Eigen::MatrixXd reducible(2, 2);
  reducible << 1.0, 0.0, 0.5, 0.5;
  CHECK(code_of([&] { validate(MarkovModel{{-1, 1}, reducible, {}}); }) == ErrorCode::ReducibleChain);
  Eigen::MatrixXd p(2, 2);
  p << 0.8, 0.2, 0.3, 0.7;
  CHECK(code_of([&] { validate(MarkovModel{{-1, -1}, p, {}}); }) == ErrorCode::DuplicateStateValue);
  Eigen::MatrixXd bad_row(2, 2);
  bad_row << 0.8, 0.3, 0.3, 0.7;
  CHECK(code_of([&] { validate(MarkovModel{{-1, 1}, bad_row, {}}); }) == ErrorCode::InvalidProbability);
  CHECK(code_of([&] { validate(MarkovModel{{-1, 1}, p, {0.5, 0.6}}); }) == ErrorCode::InvalidProbability);
  // alpha > beta: positive drift
  CHECK(code_of([] { validate(testing::two_state_markov(0.3, 0.2)); }) == ErrorCode::NonNegativeDrift);
}

TEST_CASE("drift: examples") {
  CHECK(drift(validate(GaussianModel{-0.1, 1.0})) == -0.1);
  CHECK(drift(validate(TwoPointModel{10.0, 0.04})) == doctest::Approx(-0.56).epsilon(1e-14));
  CHECK(drift(validate(testing::two_state_markov(0.2, 0.3))) == doctest::Approx(-0.2).epsilon(1e-14));
}

TEST_CASE("scgf: examples") {
  const auto g = validate(GaussianModel{-0.1, 1.0});
  CHECK(std::abs(scgf(g, 0.2)) <= 1e-16);
  for (const auto& [name, m] : testing::bundled_models()) {
    CAPTURE(name);
    CHECK(scgf(m, 0.0) == 0.0);
  }
  const auto mk = validate(testing::two_state_markov(0.2, 0.3));
  CHECK(std::abs(scgf(mk, std::log(8.0 / 7.0))) <= 1e-15);
}

TEST_CASE("scgf_derivative: examples") {
  const auto g = validate(GaussianModel{-0.1, 1.0});
  CHECK(scgf_derivative(g, 0.0) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(scgf_derivative(g, 0.2) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(scgf_derivative(validate(TwoPointModel{1.0, 0.4}), 0.0) == doctest::Approx(-0.2).epsilon(1e-15));
}

TEST_CASE("invariant: Lambda is convex (chord test)") {
  for (const auto& [name, m] : testing::bundled_models()) {
    CAPTURE(name);
    const double r = practical_theta_max(m);
    std::vector<double> grid(200), values(200);
    for (int i = 0; i < 200; ++i) {
      grid[i] = -r + 2 * r * i / 199.0;
      values[i] = scgf(m, grid[i]);
    }
    for (int i = 0; i + 2 < 200; ++i) {
      for (int k = i + 2; k < 200; k += 17) {
        for (int j = i + 1; j < k; j += 5) {
          const double w = (grid[j] - grid[i]) / (grid[k] - grid[i]);
          REQUIRE(values[j] <= (1 - w) * values[i] + w * values[k] + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("invariant: Lambda'(0) equals the drift") {
  for (const auto& [name, m] : testing::bundled_models()) {
    CAPTURE(name);
    const double h = 1e-5;
    const double fd = (scgf(m, h) - scgf(m, -h)) / (2 * h);
    CHECK(std::abs(fd - drift(m)) <= 1e-8);
    CHECK(std::abs(scgf_derivative(m, 0.0) - drift(m)) <= 1e-12);
  }
}

TEST_CASE("invariant: analytic derivative matches central differences") {
  for (const auto& [name, m] : testing::bundled_models()) {
    CAPTURE(name);
    for (double theta : {-0.7, -0.1, 0.05, 0.2, 0.6, 1.1}) {
      const double h = std::max(1e-6, 1e-6 * std::abs(theta));
      const double fd = (scgf(m, theta + h) - scgf(m, theta - h)) / (2 * h);
      CHECK(scgf_derivative(m, theta) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("invariant: discrete model reduced to two-point parameters agrees with the two-point branch") {
  for (double c : {1.0, 2.0, 3.0, 10.0}) {
    const double alpha = 0.9 / (c + 1.0) * 0.9;
    const auto tp = validate(TwoPointModel{c, alpha});
    const auto d = validate(DiscreteModel{{-1.0, c}, {1.0 - alpha, alpha}});
    for (double theta = -3.0; theta <= 3.0; theta += 0.25) {
      CHECK(std::abs(scgf(tp, theta) - scgf(d, theta)) <= 1e-14);
    }
  }
}

TEST_CASE("invariant: Markov 2x2 closed form agrees with power iteration") {
  const auto m = validate(testing::two_state_markov(0.2, 0.3));
  const auto& spec = std::get<MarkovModel>(m.spec());
  for (double theta = -2.0; theta <= 2.0; theta += 0.1) {
    Eigen::MatrixXd a = spec.transition * Eigen::Vector2d(std::exp(-theta), std::exp(theta)).asDiagonal();
    const double power = std::log(numerics::perron_power_iteration(a).root);
    CHECK(std::abs(scgf(m, theta) - power) <= 1e-11);
    CHECK(std::abs(scgf(m, theta) - testing::markov_scgf_closed(0.2, 0.3, theta)) <= 1e-13);
  }
}

TEST_CASE("sample_increments: determinism and support") {
  const auto tp = validate(TwoPointModel{1.0, 0.4});
  auto a = sample_increments(tp, 123, 9);
  auto b = sample_increments(tp, 123, 9);
  for (int i = 0; i < 10000; ++i) {
    const double x = a.next();
    REQUIRE(x == b.next());
    REQUIRE((x == -1.0 || x == 1.0));
  }
  const auto g = validate(GaussianModel{-0.1, 1.0});
  auto c = sample_increments(g, 5, 0);
  auto d = sample_increments(g, 5, 0);
  for (int i = 0; i < 10000; ++i) REQUIRE(c.next() == d.next());
}

TEST_CASE("sample_increments: empirical means within 3 standard errors of the drift") {
  const int n = 1'000'000;
  SUBCASE("gaussian") {
    const auto g = validate(GaussianModel{-0.1, 1.0});
    auto s = sample_increments(g, 2024, 1);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += s.next();
    CHECK(std::abs(sum / n + 0.1) <= 3.0 / std::sqrt(double(n)));
  }
  SUBCASE("two point C=10") {
    const auto m = validate(TwoPointModel{10.0, 0.04});
    auto s = sample_increments(m, 2024, 2);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += s.next();
    const double sd = std::sqrt(0.04 * 100 + 0.96 - 0.56 * 0.56);
    CHECK(std::abs(sum / n + 0.56) <= 3.0 * sd / std::sqrt(double(n)));
  }
  SUBCASE("markov chain") {
    const auto m = validate(testing::two_state_markov(0.2, 0.3));
    auto s = sample_increments(m, 2024, 3);
    double sum = 0.0;
    int up_after_down = 0, downs = 0;
    double prev = s.next();
    sum += prev;
    for (int i = 1; i < n; ++i) {
      const double x = s.next();
      sum += x;
      if (prev < 0) {
        ++downs;
        up_after_down += x > 0;
      }
      prev = x;
    }
    // asymptotic variance of the sum: var * (1 + r) / (1 - r), r = 1 - alpha - beta
    const double sd = std::sqrt(0.96 * 1.5 / 0.5);
    CHECK(std::abs(sum / n + 0.2) <= 3.0 * sd / std::sqrt(double(n)));
    CHECK(double(up_after_down) / downs == doctest::Approx(0.2).epsilon(0.02));
  }
}

TEST_CASE("Markov initial distribution override") {
  auto spec = testing::two_state_markov(0.2, 0.3);
  spec.initial = {0.0, 1.0};
  const auto m = validate(spec);
  for (std::uint64_t id = 0; id < 50; ++id) {
    auto s = sample_increments(m, 1, id);
    CHECK(s.next() == 1.0);
  }
}

TEST_CASE("model JSON parsing") {
  const auto g = validate(parse_model_json(R"({"kind":"gaussian","mean":-0.1,"variance":1})"));
  CHECK(g.kind() == "gaussian");
  const auto mk = load_model_file(BUSYBURST_MODELS_DIR "/markov.json");
  CHECK(mk.delta() == doctest::Approx(0.2));
  const auto d = load_model_file(BUSYBURST_MODELS_DIR "/discrete3.json");
  CHECK(d.kind() == "discrete");

  try {
    parse_model_json("{\n  \"kind\": \"gaussian\",\n  \"mean\": -0.1,\n  \"variance\": \n}");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
  CHECK(code_of([] { parse_model_json(R"({"kind":"weibull"})"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_model_json(R"({"kind":"gaussian","mean":-0.1})"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_model_json(R"({"kind":"gaussian","mean":"x","variance":1})"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_model_json(R"({"kind":"gaussian","mean":-1,"variance":1,"sigma":2})"); }) ==
        ErrorCode::Parse);
  CHECK(code_of([] { parse_model_json(R"({"kind":"markov","values":[-1,1],"transition":[[1,0]]})"); }) ==
        ErrorCode::Parse);
  CHECK(code_of([] { load_model_file("/nonexistent/model.json"); }) == ErrorCode::Io);
}
