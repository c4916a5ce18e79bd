#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "balayage/numerics.hpp"
#include "balayage/rng.hpp"

using namespace balayage;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("adaptive quadrature reproduces closed-form integrals") {
  const double a = adaptive_quad([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12);
  CHECK(a == doctest::Approx(2.0).epsilon(1e-10));

  const double b = adaptive_quad([](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-12);
  CHECK(b == doctest::Approx(std::sqrt(kPi)).epsilon(1e-10));

  // sharply peaked integrand exercises the adaptive refinement
  const double c = adaptive_quad([](double x) { return 1.0 / (1e-6 + x * x); }, -1.0, 1.0, 1e-10);
  const double exact = 2.0 / 1e-3 * std::atan(1.0 / 1e-3);
  CHECK(c == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("cdf table inverts its own cdf") {
  // triangular density on [0,2]
  const auto dens = [](double x) { return x < 1.0 ? x : 2.0 - x; };
  CdfTable t(dens, 0.0, 2.0, 4096);
  CHECK(t.total() == doctest::Approx(1.0).epsilon(1e-8));
  for (double u : {0.001, 0.1, 0.25, 0.5, 0.75, 0.9, 0.999}) {
    const double x = t.invert(u);
    CHECK(t.cdf(x) == doctest::Approx(u).epsilon(1e-7));
  }
  // closed form: F(x) = x^2/2 on [0,1]
  CHECK(t.invert(0.125) == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("cdf table handles unnormalized densities") {
  CdfTable t([](double) { return 3.0; }, 1.0, 3.0, 64);
  CHECK(t.total() == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(t.invert(0.5) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("log_beta matches lgamma composition") {
  for (double a : {0.5, 1.0, 2.5, 7.0}) {
    for (double b : {0.25, 1.0, 3.0}) {
      const double want = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
      CHECK(log_beta(a, b) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("regularized incomplete beta special values and symmetry") {
  CHECK(reg_inc_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(reg_inc_beta(1.0, 2.0, 3.0) == 1.0);
  // I_x(1,b) = 1-(1-x)^b
  CHECK(reg_inc_beta(0.3, 1.0, 4.0) ==
        doctest::Approx(1.0 - std::pow(0.7, 4.0)).epsilon(1e-12));
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
  for (double x : {0.1, 0.4, 0.8}) {
    CHECK(reg_inc_beta(x, 2.5, 0.75) ==
          doctest::Approx(1.0 - reg_inc_beta(1.0 - x, 0.75, 2.5)).epsilon(1e-11));
  }
  // half-integer case against quadrature
  const double byquad =
      adaptive_quad([](double t) { return std::sqrt(t) * (1.0 - t); }, 0.0, 0.6, 1e-13) /
      std::exp(log_beta(1.5, 2.0));
  CHECK(reg_inc_beta(0.6, 1.5, 2.0) == doctest::Approx(byquad).epsilon(1e-9));
}

TEST_CASE("incomplete beta inverse round-trips") {
  Rng r(3, 0);
  for (int i = 0; i < 200; ++i) {
    const double a = 0.2 + 3.0 * r.uniform();
    const double b = 0.2 + 3.0 * r.uniform();
    const double u = r.uniform();
    const double x = reg_inc_beta_inv(u, a, b);
    CHECK(reg_inc_beta(x, a, b) == doctest::Approx(u).epsilon(1e-7));
  }
  CHECK(reg_inc_beta_inv(0.0, 1.5, 2.0) == 0.0);
  CHECK(reg_inc_beta_inv(1.0, 1.5, 2.0) == 1.0);
}

TEST_CASE("sphere area matches known values") {
  CHECK(sphere_area(1) == doctest::Approx(2.0));
  CHECK(sphere_area(2) == doctest::Approx(2.0 * kPi).epsilon(1e-13));
  CHECK(sphere_area(3) == doctest::Approx(4.0 * kPi).epsilon(1e-13));
  CHECK(sphere_area(4) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-13));
}

TEST_CASE("running stat computes the standard error") {
  RunningStat s;
  for (double v : {1.0, 2.0, 3.0, 4.0}) s.add(v);
  CHECK(s.mean() == doctest::Approx(2.5));
  // sample variance 5/3, stderr sqrt(5/12)
  CHECK(s.stderr_mean() == doctest::Approx(std::sqrt(5.0 / 12.0)).epsilon(1e-12));
}
