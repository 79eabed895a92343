#include <doctest.h>

#include <cmath>
#include <numbers>

#include "airyline/errors.hpp"
#include "airyline/special_airy.hpp"
#include "support.hpp"

using namespace airyline;
using airy::cplx;
using std::numbers::pi;

namespace {

// Maclaurin series for Ai in long double, summed until terms vanish.
long double series_ai(long double x) {
  const long double c1 = 0.355028053887817239260063186004183176L;
  const long double c2 = 0.258819403792806798405183560189203963L;
  long double f = 1, g = x, sf = 1, sg = x;
  for (int k = 1; k < 400; ++k) {
    f *= x * x * x / ((3.0L * k - 1) * (3.0L * k));
    g *= x * x * x / ((3.0L * k) * (3.0L * k + 1));
    sf += f;
    sg += g;
    if (std::fabs(f) + std::fabs(g) < 1e-30L * (std::fabs(sf) + std::fabs(sg))) break;
  }
  return c1 * sf - c2 * sg;
}

double bisect_zero(double lo, double hi) {
  long double a = lo, b = hi, fa = series_ai(a);
  for (int i = 0; i < 200; ++i) {
    const long double m = 0.5L * (a + b), fm = series_ai(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return double(0.5L * (a + b));
}

}  // namespace

TEST_CASE("airy_eval matches the mpmath fixture to 1e-10 relative") {
  const auto rows = testing::read_csv(testing::fixture("airy_values.csv"));
  REQUIRE(rows.size() > 60);
  for (const auto& r : rows) {
    const cplx w(r[0], r[1]);
    const cplx ai(r[2], r[3]), aip(r[4], r[5]);
    const auto v = airy::airy_eval(w);
    INFO("w = " << w);
    CHECK(testing::rel_err(v.value, ai) <= 1e-10);
    CHECK(testing::rel_err(v.derivative, aip) <= 1e-10);
  }
}

TEST_CASE("airy_eval at the origin") {
  const auto v = airy::airy_eval(0.0);
  CHECK(std::abs(v.value - 0.3550280539) < 1e-10);
  CHECK(std::abs(v.derivative + 0.2588194038) < 1e-10);
  CHECK(v.method == airy::AiryMethod::series);
}

TEST_CASE("airy_eval vanishes at the first zero") {
  CHECK(std::abs(airy::airy_eval(airy::airy_zero(1)).value) <= 1e-10);
}

TEST_CASE("large-argument expansion at w = 10") {
  const double w = 10.0;
  const auto v = airy::airy_eval(w);
  const double lhs = std::pow(w, 0.25) * v.value.real() * std::exp(2.0 / 3.0 * std::pow(w, 1.5)) *
                     2.0 * std::sqrt(pi);
  const double two_term = 1.0 - 5.0 / (48.0 * std::pow(w, 1.5));
  // next coefficient 385/4608 sets D
  CHECK(std::abs(lhs - two_term) <= 0.1 / (w * w * w));
}

TEST_CASE("real inputs give real outputs") {
  for (double x : {-20.0, -7.3, -1.0, 0.4, 3.0, 9.0, 25.0}) {
    const auto v = airy::airy_eval(x);
    CHECK(std::abs(v.value.imag()) <= 1e-14 * (1 + std::abs(v.value)));
    CHECK(std::abs(v.derivative.imag()) <= 1e-14 * (1 + std::abs(v.derivative)));
  }
}

TEST_CASE("Schwarz symmetry is exact") {
  for (double r : {0.7, 2.0, 5.5, 11.0, 18.0})
    for (double th : {0.3, 1.2, 2.0, 2.9}) {
      const cplx w = std::polar(r, th);
      const auto a = airy::airy_eval(w), b = airy::airy_eval(std::conj(w));
      CHECK(b.value == std::conj(a.value));
      CHECK(b.derivative == std::conj(a.derivative));
    }
}

TEST_CASE("ODE residual Ai'' = w Ai via central differences of Ai'") {
  for (double r : {0.5, 3.0, 8.0, 14.0})
    for (double th : {0.0, 1.0, 2.5}) {
      const cplx w = std::polar(r, th);
      const double h = 1e-5;
      const cplx d2 = (airy::airy_eval(w + h).derivative - airy::airy_eval(w - h).derivative) / (2 * h);
      const cplx ai = airy::airy_eval(w).value;
      CHECK(std::abs(d2 - w * ai) <= 1e-6 * (1 + std::abs(w)) * std::abs(ai) + 1e-300);
    }
}

TEST_CASE("scaled evaluation beyond double range") {
  CHECK_THROWS_AS(airy::airy_eval(2000.0), AiryRangeError);
  const auto s = airy::airy_eval_scaled(2000.0);
  // log Ai(x) ~ -2/3 x^{3/2} - log(2 sqrt(pi)) - log(x)/4 + log(1 - 5/(48 x^{3/2}))
  const double x32 = std::pow(2000.0, 1.5);
  const double expect = -2.0 / 3.0 * x32 - std::log(2 * std::sqrt(pi)) - 0.25 * std::log(2000.0) +
                        std::log1p(-5.0 / (48.0 * x32));
  CHECK(std::abs(s.log_abs() - expect) < 1e-6);
  CHECK(std::abs(s.phase()) < 1e-12);
  // agrees with the direct path where both work
  const auto d = airy::airy_eval(cplx(30.0, 4.0));
  const auto e = airy::airy_eval_scaled(cplx(30.0, 4.0));
  CHECK(std::abs(std::log(std::abs(d.value)) - e.log_abs()) < 1e-10);
}

TEST_CASE("airy_log_derivative examples") {
  CHECK(std::abs(airy::airy_log_derivative(0.0) - 0.7290111) < 1e-7);
  CHECK(std::abs(airy::airy_log_derivative(0.0).real() - airy::kLogDerivAt0) < 1e-15);
  CHECK(std::abs(airy::airy_log_derivative(100.0) - 10.0) < 0.02);
  const double a1 = airy::airy_zero(1);
  for (double d : {1e-3, 1e-5, 1e-7}) {
    const cplx w = a1 + d;
    CHECK(std::abs((a1 - w) * airy::airy_log_derivative(w) - 1.0) < 5 * d);
  }
}

TEST_CASE("airy_log_derivative: |Y - sqrt w| <= C/|w| for |w| >= 10") {
  double C = 0;
  for (double r : {10.0, 20.0, 50.0, 200.0, 1000.0})
    for (double th : {-2.3, -1.2, 0.0, 0.8, 1.6, 2.3}) {
      const cplx w = std::polar(r, th);
      C = std::max(C, std::abs(airy::airy_log_derivative(w) - std::sqrt(w)) * r);
    }
  MESSAGE("fitted C = " << C);
  CHECK(C < 1.0);
}

TEST_CASE("pole proximity signal carries the zero index") {
  const double a2 = airy::airy_zero(2);
  try {
    (void)airy::airy_log_derivative(a2 + 1e-10);
    FAIL("expected PoleProximityError");
  } catch (const PoleProximityError& e) {
    CHECK(e.index() == 2);
  }
}

TEST_CASE("zeros against bisection and mpmath oracles") {
  const auto t = airy::airy_zeros(1000);
  CHECK(std::abs(t[1] - bisect_zero(-2.5, -2.2)) <= 1e-10);
  CHECK(std::abs(t[2] - bisect_zero(-4.2, -4.0)) <= 1e-10);
  CHECK(std::abs(t[1] + 2.3381074105) < 1e-10);
  CHECK(std::abs(t[2] + 4.0879494441) < 1e-10);
  for (const auto& r : testing::read_csv(testing::fixture("airy_zeros.csv"))) {
    INFO("index " << r[0]);
    CHECK(std::abs(t[std::size_t(r[0])] - r[1]) <= 1e-10);
  }
}

TEST_CASE("single zero is negative and a root") {
  const auto t = airy::airy_zeros(1);
  REQUIRE(t.count() == 1);
  CHECK(t[1] < 0);
  CHECK(std::abs(airy::airy_eval(t[1]).value) <= 1e-10);
}

TEST_CASE("zero table: monotone, gaps shrink, envelope bounded") {
  const auto t = airy::airy_zeros(10000);
  const auto& z = t.zeros();
  for (std::size_t i = 1; i < z.size(); ++i) REQUIRE(z[i] < z[i - 1]);
  for (std::size_t i = 2; i + 1 < z.size(); ++i) REQUIRE(z[i - 1] - z[i] < z[i - 2] - z[i - 1]);
  const auto env = t.envelope();
  MESSAGE("envelope constant " << env.constant << " at i = " << env.argmax);
  CHECK(env.constant <= 1.0);
  CHECK(env.constant > 0.0);
}

TEST_CASE("weierstrass_sum examples") {
  const auto t = airy::airy_zeros(10000);
  CHECK(std::abs(airy::weierstrass_sum(0.0, t) - airy::kLogDerivAt0) < 1e-15);
  for (cplx w : {cplx(0, 1), cplx(-3, 0.5)})
    CHECK(std::abs(airy::weierstrass_sum(w, t) - airy::airy_log_derivative(w)) < 1e-7);
}

TEST_CASE("weierstrass_sum equals the direct log derivative on a 100-point grid") {
  const auto t = airy::airy_zeros(10000);
  double worst = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const double r = 0.5 + 19.5 * i / 9.0;
      const double th = 0.05 + (pi - 0.1) * j / 9.0;
      cplx w = std::polar(r, th);
      if (w.imag() < 0.1) w.imag(0.1);
      worst = std::max(worst, std::abs(airy::weierstrass_sum(w, t) - airy::airy_log_derivative(w)));
    }
  MESSAGE("max deviation " << worst);
  CHECK(worst <= 1e-6);
}

TEST_CASE("residue of weierstrass_sum at tabulated zeros is 1") {
  const auto t = airy::airy_zeros(2000);
  for (std::size_t i : {1u, 2u, 7u, 40u}) {
    const double a = t[i];
    auto res = [&](double d) { return (a - (a + d)) * airy::weierstrass_sum(cplx(a + d, 0), t); };
    const cplx r1 = res(1e-4), r2 = res(1e-5);
    // leftover after one Richardson step is d1 d2 times the regular part's slope
    const cplx extrap = (10.0 * r2 - r1) / 9.0;
    CHECK(std::abs(extrap - 1.0) < 1e-7);
  }
}

TEST_CASE("weierstrass_sum refuses a short table far out") {
  const auto t = airy::airy_zeros(10);
  CHECK_THROWS_AS(airy::weierstrass_sum(cplx(-400, 1), t, 2, 1e-12), InsufficientTableError);
  CHECK_THROWS_AS(airy::weierstrass_sum(cplx(t[3], 0), t), PoleProximityError);
}
