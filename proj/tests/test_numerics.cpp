#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "busyburst/error.hpp"
#include "busyburst/numerics.hpp"
#include "busyburst/philox.hpp"

using namespace busyburst;
using namespace busyburst::numerics;

TEST_CASE("bisection keeps the sup of the sublevel set") {
  // x^2 - 2 on [0, 2]
  const auto r = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14);
  CHECK(r.root == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(r.lo * r.lo - 2.0 <= 0.0);
  CHECK(r.hi * r.hi - 2.0 > 0.0);
  CHECK_THROWS_AS(bisect([](double x) { return x; }, 1.0, 1.0), Error);
  CHECK_THROWS_AS(bisect([](double) { return std::nan(""); }, 0.0, 1.0), Error);
}

TEST_CASE("adaptive Simpson") {
  SUBCASE("exact on cubics") {
    const double v = adaptive_simpson([](double x) { return 3 * x * x * x - x + 2; }, -1.0, 2.0);
    // 3/4 x^4 - x^2/2 + 2x from -1 to 2
    const double exact = (0.75 * 16 - 2 + 4) - (0.75 - 0.5 - 2);
    CHECK(v == doctest::Approx(exact).epsilon(1e-14));
  }
  SUBCASE("smooth transcendental integrand") {
    const double v = adaptive_simpson([](double x) { return std::exp(-x) * std::sin(3 * x); }, 0.0, 5.0);
    // int e^{-x} sin 3x = e^{-x}(-sin 3x - 3 cos 3x)/10
    auto anti = [](double x) { return std::exp(-x) * (-std::sin(3 * x) - 3 * std::cos(3 * x)) / 10.0; };
    CHECK(std::abs(v - (anti(5.0) - anti(0.0))) <= 1e-11);
  }
  SUBCASE("reversed and empty intervals") {
    CHECK(adaptive_simpson([](double x) { return x; }, 1.0, 1.0) == 0.0);
    CHECK(adaptive_simpson([](double x) { return x; }, 1.0, 0.0) == doctest::Approx(-0.5));
  }
  SUBCASE("evaluation budget") {
    CHECK_THROWS_AS(adaptive_simpson([](double x) { return std::sin(1e6 * x); }, 0.0, 1.0, 1e-14, 60, 1000), Error);
  }
}

TEST_CASE("Perron root: closed form vs power iteration vs Eigen") {
  for (double theta : {-1.0, -0.2, 0.0, 0.13, 0.7, 2.0}) {
    const double e0 = std::exp(-theta), e1 = std::exp(theta);
    Eigen::MatrixXd a(2, 2);
    a << 0.8 * e0, 0.2 * e1, 0.3 * e0, 0.7 * e1;
    const double closed = perron_root_2x2(a(0, 0), a(0, 1), a(1, 0), a(1, 1));
    const double power = perron_power_iteration(a).root;
    CHECK(std::abs(closed - power) <= 1e-11 * closed);
  }
  Eigen::MatrixXd b(3, 3);
  b << 0.5, 0.3, 0.2, 0.4, 0.4, 0.2, 0.6, 0.2, 0.2;
  b = b * Eigen::Vector3d(std::exp(-0.4), std::exp(0.1), std::exp(0.8)).asDiagonal();
  const double oracle = Eigen::EigenSolver<Eigen::MatrixXd>(b).eigenvalues().cwiseAbs().maxCoeff();
  CHECK(spectral_radius(b) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("power iteration handles periodic irreducible matrices") {
  Eigen::MatrixXd cycle(3, 3);
  cycle << 0, 2, 0, 0, 0, 3, 0.5, 0, 0;  // rho^3 = 3
  CHECK(perron_power_iteration(cycle).root == doctest::Approx(std::cbrt(3.0)).epsilon(1e-12));
}

TEST_CASE("reducible matrices and strongly connected components") {
  Eigen::MatrixXd a(3, 3);
  a << 0.5, 0.5, 0.0, 1.0, 0.0, 0.0, 0.2, 0.3, 0.0;  // state 2 is transient, zero column
  CHECK_FALSE(is_irreducible(a));
  CHECK(strongly_connected_components(a).size() == 2);
  CHECK(spectral_radius(a) == doctest::Approx(1.0).epsilon(1e-13));

  Eigen::MatrixXd zero_row(3, 3);
  zero_row << 0.5, 0.25, 0.25, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0;
  // mass leaks from {0, 1} into the dead state 2, so only the {0, 1} block counts
  const double leaky = 0.5 + std::sqrt(0.125);
  CHECK(spectral_radius(zero_row) == doctest::Approx(leaky).epsilon(1e-13));
  CHECK(log_tilted_spectral_radius(zero_row, std::vector<double>{-1.0, 1.0, 2.0}, 0.0) ==
        doctest::Approx(std::log(leaky)).epsilon(1e-13));
}

TEST_CASE("log-sum-exp stays finite far beyond exp overflow") {
  const std::vector<double> x{-1.0, 10.0};
  const std::vector<double> w{0.96, 0.04};
  const double v = log_sum_exp_weighted(x, w, 500.0);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(5000.0 + std::log(0.04)).epsilon(1e-14));
  CHECK(tilted_mean(x, w, 500.0) == doctest::Approx(10.0));
}

TEST_CASE("tilted Perron derivative matches central differences") {
  Eigen::MatrixXd p(3, 3);
  p << 0.5, 0.3, 0.2, 0.4, 0.4, 0.2, 0.6, 0.2, 0.2;
  const std::vector<double> f{-2.0, 0.5, 1.0};
  for (double theta : {-0.5, 0.0, 0.3, 1.2}) {
    const double h = 1e-5;
    const double fd = (log_tilted_spectral_radius(p, f, theta + h) - log_tilted_spectral_radius(p, f, theta - h)) /
                      (2 * h);
    CHECK(log_tilted_spectral_radius_derivative(p, f, theta) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("Philox streams are reproducible and distinct") {
  PhiloxStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs_c |= x != c.next_u64();
    differs_d |= x != d.next_u64();
  }
  CHECK(differs_c);
  CHECK(differs_d);
  PhiloxStream u(1, 1);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.next_uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
}
