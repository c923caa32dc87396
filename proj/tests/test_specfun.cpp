#include <doctest.h>

#include <gsl/gsl_sf_airy.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mw/specfun.hpp"

using namespace mw;
namespace sf = mw::specfun;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent oracle: K_v(z) = integral_0^inf exp(-z cosh t) cosh(v t) dt.
double bessel_k_quadrature(double v, double z) {
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4096);
  struct Args {
    double v, z;
  } args{v, z};
  gsl_function f;
  f.function = [](double t, void* p) {
    const auto* a = static_cast<Args*>(p);
    // exp(-z cosh t) cosh(v t) without the inf * 0 of the naive product
    const double base = -a->z * std::cosh(t);
    return 0.5 * (std::exp(base + a->v * t) + std::exp(base - a->v * t));
  };
  f.params = &args;
  double result = 0.0, err = 0.0;
  gsl_integration_qagiu(&f, 0.0, 0.0, 1e-13, 4096, ws, &result, &err);
  gsl_integration_workspace_free(ws);
  return result;
}

// 200-term long-double ascending series for I_v; signed gammas keep the
// negative-order continuation intact.
long double bessel_i_series(long double v, long double z) {
  long double sum = 0.0L;
  for (int k = 0; k < 200; ++k) {
    const long double denom = tgammal(k + 1.0L) * tgammal(v + k + 1.0L);
    sum += powl(z / 2.0L, 2.0L * k + v) / denom;
  }
  return sum;
}

}  // namespace

TEST_CASE("bessel_k half-integer closed form") {
  const double expect = std::sqrt(kPi / 2.0) * std::exp(-1.0);
  CHECK(sf::bessel_k(0.5, 1.0) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("bessel_k order symmetry is the same code path") {
  for (double v : {0.3, 1.7, 4.2})
    for (double z : {0.2, 1.0, 9.0}) CHECK(sf::bessel_k(-v, z) == sf::bessel_k(v, z));
}

TEST_CASE("bessel_k against the integral representation") {
  for (double v : {0.0, 1.0 / 3.0, 0.5, 1.0, 2.5, 7.3}) {
    for (double z : {0.1, 0.7, 2.0, 11.0, 40.0}) {
      const double oracle = bessel_k_quadrature(v, z);
      if (oracle < 1e-280) continue;
      CHECK(sf::bessel_k(v, z) == doctest::Approx(oracle).epsilon(1e-11));
    }
  }
}

TEST_CASE("bessel_k Airy identity at order one third") {
  // K_{1/3}(z) = pi sqrt(3 (3z/2)^{-2/3}) Ai((3z/2)^{2/3})
  for (double z : {0.5, 2.0, 5.0}) {
    const double arg = std::pow(1.5 * z, 2.0 / 3.0);
    const double airy = gsl_sf_airy_Ai(arg, GSL_PREC_DOUBLE);
    const double rhs = kPi * std::sqrt(3.0 / arg) * airy;
    CHECK(sf::bessel_k(1.0 / 3.0, z) == doctest::Approx(rhs).epsilon(1e-12));
    // and both sides agree with the quadrature oracle
    CHECK(bessel_k_quadrature(1.0 / 3.0, z) == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("bessel_k domain and underflow") {
  CHECK_THROWS_AS(sf::bessel_k(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(sf::bessel_k(1.0, -2.0), DomainError);
  CHECK_THROWS_AS(sf::bessel_k(std::nan(""), 1.0), DomainError);
  CHECK(sf::bessel_k(0.5, 800.0) == 0.0);  // past double range
  CHECK(sf::bessel_k(0.5, 700.0) > 0.0);
  CHECK(std::isfinite(sf::ln_bessel_k(0.5, 800.0)));
}

TEST_CASE("bessel_k positive and decreasing in the argument") {
  for (double v : {0.3, 1.0, 5.5}) {
    double prev = sf::bessel_k(v, 0.05);
    for (double z = 0.3; z < 30.0; z += 0.5) {
      const double cur = sf::bessel_k(v, z);
      CHECK(cur > 0.0);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("bessel_k recurrence z K' + v K = -z K_{v-1}") {
  for (double v : {0.4, 1.0, 2.7}) {
    for (double z : {0.5, 2.0, 8.0}) {
      const double h = 1e-4 * z;  // fourth-order stencil keeps roundoff below 1e-10
      const double kprime = (-sf::bessel_k(v, z + 2 * h) + 8.0 * sf::bessel_k(v, z + h) -
                             8.0 * sf::bessel_k(v, z - h) + sf::bessel_k(v, z - 2 * h)) /
                            (12.0 * h);
      const double lhs = z * kprime + v * sf::bessel_k(v, z);
      const double rhs = -z * sf::bessel_k(v - 1.0, z);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("bessel_i at the origin and against the series oracle") {
  CHECK(sf::bessel_i(0.0, 0.0) == 1.0);
  CHECK(sf::bessel_i(1.0, 0.0) == 0.0);
  CHECK(sf::bessel_i(0.3, 0.0) == 0.0);
  const double oracle = static_cast<double>(bessel_i_series(0.7L, 3.1L));
  CHECK(sf::bessel_i(0.7, 3.1) == doctest::Approx(oracle).epsilon(1e-12));
  for (double v : {0.0, 0.5, 2.0, 6.6})
    for (double z : {0.4, 3.0, 30.0, 100.0}) {
      const double want = static_cast<double>(bessel_i_series(v, z));
      CHECK(sf::bessel_i(v, z) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("bessel_i negative order identity") {
  // I_{-v} = I_v + (2/pi) sin(pi v) K_v
  for (double v : {0.25, 0.7, 1.3}) {
    for (double z : {0.8, 3.0}) {
      const double direct = static_cast<double>(bessel_i_series(static_cast<long double>(-v), z));
      CHECK(sf::bessel_i(-v, z) == doctest::Approx(direct).epsilon(1e-11));
    }
  }
}

TEST_CASE("digamma values and recurrence") {
  constexpr double kEuler = 0.57721566490153286;
  CHECK(sf::digamma(1.0) == doctest::Approx(-kEuler).epsilon(1e-13));
  CHECK(sf::digamma(2.0) == doctest::Approx(1.0 - kEuler).epsilon(1e-13));
  // finite difference of an independent lnGamma oracle
  const double h = 1e-6;
  const double fd = (std::lgamma(4.5 + h) - std::lgamma(4.5 - h)) / (2.0 * h);
  CHECK(sf::digamma(4.5) == doctest::Approx(fd).epsilon(1e-9));
  CHECK_THROWS_AS(sf::digamma(0.0), DomainError);
  CHECK_THROWS_AS(sf::digamma(-1.5), DomainError);
}

TEST_CASE("pfq basics") {
  CHECK(sf::pfq({{}, {1.0}, 0.0}).value == 1.0);
  // 0F1(; v+1; z^2/4) = I_v(z) Gamma(v+1) / (z/2)^v
  const double v = 0.7, z = 3.1;
  const auto r = sf::pfq({{}, {v + 1.0}, z * z / 4.0});
  const double lhs = sf::bessel_i(v, z) * sf::gamma_fn(v + 1.0) / std::pow(z / 2.0, v);
  CHECK(r.value == doctest::Approx(lhs).epsilon(1e-12));
  CHECK(r.abs_error < 1e-10 * std::abs(r.value));
}

TEST_CASE("pfq 2F3 against a long-double oracle") {
  const double v = 0.65, z = 1.0;
  // 500-term extended-precision sum
  long double sum = 0.0L, term = 1.0L;
  const long double a1 = v, a2 = v + 0.5L, b1 = v + 1.0L, b2 = v + 1.0L, b3 = 2.0L * v + 1.0L;
  for (int n = 0; n < 500; ++n) {
    sum += term;
    term *= (a1 + n) * (a2 + n) / ((b1 + n) * (b2 + n) * (b3 + n)) * (z * z) / (n + 1.0L);
  }
  const auto r = sf::pfq({{v, v + 0.5}, {v + 1.0, v + 1.0, 2.0 * v + 1.0}, z * z});
  CHECK(r.value == doctest::Approx(static_cast<double>(sum)).epsilon(1e-12));
}

TEST_CASE("pfq error paths") {
  CHECK_THROWS_AS(sf::pfq({{1.0}, {-2.0}, 0.5}), PoleError);
  CHECK_THROWS_AS(sf::pfq({{1.0, 1.0, 1.0}, {2.0}, 0.5}), DomainError);   // p > q + 1
  CHECK_THROWS_AS(sf::pfq({{1.0, 1.0}, {2.0}, 1.5}), DomainError);        // |z| >= 1 at p = q+1
  // terminating series are fine even where the ratio test would fail
  const auto r = sf::pfq({{-3.0, 5.0}, {2.0}, 1.7});
  CHECK(std::isfinite(r.value));
}

TEST_CASE("dbessel_k_dorder limits and branches") {
  // v -> 0+ limit vanishes (K is even in the order)
  CHECK(std::abs(sf::dbessel_k_dorder(1e-7, 1.0)) < 1e-6);

  // integer branch vs an independent central difference of bessel_k
  {
    const double h = 1e-6;
    const double fd = (sf::bessel_k(1.0 + h, 1.5) - sf::bessel_k(1.0 - h, 1.5)) / (2.0 * h);
    CHECK(sf::dbessel_k_dorder(1.0, 1.5) == doctest::Approx(fd).epsilon(1e-8));
  }
  // hypergeometric branch at a generic order
  {
    const double h = 1e-6;
    const double fd = (sf::bessel_k(0.65 + h, 2.0) - sf::bessel_k(0.65 - h, 2.0)) / (2.0 * h);
    CHECK(sf::dbessel_k_dorder(0.65, 2.0) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("dbessel_k_dorder branch agreement near integers") {
  // hypergeometric branch at n +/- 1e-3 against the differencing oracle
  for (int n : {1, 2, 3}) {
    for (double delta : {-1e-3, 1e-3}) {
      for (double z : {1.5, 2.0, 4.0}) {
        const double v = n + delta;
        const double h = 1e-6;
        const double fd = (sf::ln_bessel_k(v + h, z) - sf::ln_bessel_k(v - h, z)) / (2.0 * h) *
                          sf::bessel_k(v, z);
        CHECK(sf::dbessel_k_dorder(v, z) == doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("dbessel_k_dorder random sweep against differences") {
  std::mt19937_64 gen(1234);
  std::uniform_real_distribution<double> order(0.05, 9.5);
  std::uniform_real_distribution<double> arg(0.05, 25.0);
  for (int i = 0; i < 200; ++i) {
    const double v = order(gen);
    const double z = arg(gen);
    const double h = 1e-5 * std::max(1.0, v);
    const double fd =
        (sf::ln_bessel_k(v + h, z) - sf::ln_bessel_k(v - h, z)) / (2.0 * h) * sf::bessel_k(v, z);
    if (std::abs(fd) < 1e-290) continue;
    CHECK(sf::dbessel_k_dorder(v, z) == doctest::Approx(fd).epsilon(5e-7));
  }
}

TEST_CASE("dbessel_k_dorder domain") {
  CHECK_THROWS_AS(sf::dbessel_k_dorder(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(sf::dbessel_k_dorder(1.0, 0.0), DomainError);
}
