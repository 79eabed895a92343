#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "airyline/dynamics.hpp"
#include "airyline/edge_scaling.hpp"
#include "airyline/ensembles.hpp"
#include "airyline/errors.hpp"

using namespace airyline;
using namespace airyline::ensembles;

namespace {

bool non_increasing(const std::vector<double>& x) {
  return std::is_sorted(x.rbegin(), x.rend());
}

// Time average and batch-means standard error of f over one long run.
struct LongRun {
  double mean, se;
};

template <class F>
LongRun long_run(const ProcessSpec& spec, double x0, double T, double dt, F f) {
  dynamics::SdeState s0;
  s0.particles = {x0};
  s0.constraint = dynamics::constraint_for(spec);
  auto cfg = dynamics::IntegratorConfig::defaults_for(spec);
  cfg.dt = dt;
  std::vector<double> vals;
  const auto rng = io::derive_stream(11, 0, "noise");
  const std::size_t steps = dynamics::steps_for(T, dt);
  dynamics::NoiseBlock noise(rng, steps, 1);
  dynamics::run(spec, s0, steps, cfg, noise, [&](std::size_t k, const dynamics::SdeState& s) {
    if (k >= steps / 20) vals.push_back(f(s.particles[0]));
  });
  const std::size_t B = 50, len = vals.size() / B;
  std::vector<double> means(B, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < len; ++i) means[b] += vals[b * len + i];
    means[b] /= double(len);
  }
  const auto m = summarize(means);
  return {m.mean, std::sqrt(m.var / double(B))};
}

// Edge location from the square-root law: x_k ~ B - a (k - 1/2)^{2/3}, k = 1..K.
double fitted_edge(const std::vector<double>& x, std::size_t K) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double u = std::pow(double(k) - 0.5, 2.0 / 3.0), y = x[k - 1];
    sx += u;
    sy += y;
    sxx += u * u;
    sxy += u * y;
  }
  const double slope = (K * sxy - sx * sy) / (K * sxx - sx * sx);
  return (sy - slope * sx) / double(K);
}

}  // namespace

TEST_CASE("n = 1 Gaussian draws are N(0, 2/beta)") {
  for (double beta : {0.5, 2.0}) {
    auto rng = io::derive_stream(1, 0, "sample");
    std::vector<double> x;
    for (int i = 0; i < 20000; ++i) x.push_back(sample_gaussian_beta(1, beta, rng).particles[0]);
    const auto m = summarize(x);
    CHECK(std::abs(m.mean) <= 3 * m.se_mean);
    CHECK(std::abs(m.var - 2 / beta) <= 3 * m.se_var);
  }
}

TEST_CASE("n = 1 Laguerre draws have mean m and stay positive") {
  const int m = 3;
  auto rng = io::derive_stream(2, 0, "sample");
  std::vector<double> x;
  for (int i = 0; i < 20000; ++i) {
    x.push_back(sample_laguerre_beta(1, m, 2.0, rng).particles[0]);
    REQUIRE(x.back() > 0);
  }
  const auto s = summarize(x);
  CHECK(std::abs(s.mean - m) <= 3 * s.se_mean);
}

TEST_CASE("n = 1 Jacobi long-run mean is p/m") {
  const auto spec = ProcessSpec::jacobi(1, 2, 3, 2.0);
  const auto r = long_run(spec, 0.5, 2000.0, 1e-3, [](double x) { return x; });
  CHECK(std::abs(r.mean - 0.4) <= 3 * r.se);
}

TEST_CASE("n = 1 DBM with V = x^2/2 has variance 2/beta") {
  const double beta = 1.0;
  const auto spec = ProcessSpec::dbm(1, PotentialSpec::gaussian(), beta);
  const auto r = long_run(spec, 0.0, 4000.0, 1e-3, [](double x) { return x * x; });
  CHECK(std::abs(r.mean - 2 / beta) <= 3 * r.se);
}

TEST_CASE("Gaussian bulk matches the semicircle") {
  const int n = 500;
  std::vector<double> pooled;
  for (int r = 0; r < 20; ++r) {
    auto rng = io::derive_stream(3, r, "sample");
    const auto st = sample_gaussian_beta(n, 2.0, rng);
    REQUIRE(non_increasing(st.particles));
    for (double x : st.particles) pooled.push_back(x / std::sqrt(double(n)));
  }
  const double ks = ks_statistic(pooled, semicircle_cdf);
  MESSAGE("KS vs semicircle " << ks);
  CHECK(ks <= 0.03);
}

TEST_CASE("Laguerre bulk matches Marchenko-Pastur") {
  const int n = 400, m = 800;
  std::vector<double> pooled;
  for (int r = 0; r < 5; ++r) {
    auto rng = io::derive_stream(4, r, "sample");
    const auto st = sample_laguerre_beta(n, m, 2.0, rng);
    REQUIRE(non_increasing(st.particles));
    REQUIRE(st.particles.back() > 0);
    pooled.insert(pooled.end(), st.particles.begin(), st.particles.end());
  }
  const auto cdf = marchenko_pastur_cdf(n, m);
  const double ks = ks_statistic(pooled, [&](double x) { return cdf(x); });
  MESSAGE("KS vs MP " << ks);
  CHECK(ks <= 0.03);
}

TEST_CASE("Jacobi burn-in sample matches the Jacobi density") {
  const int n = 200, p = 400, q = 400;
  auto rng = io::derive_stream(5, 0, "sample");
  BurnInReport rep;
  const auto st = sample_jacobi_beta(n, p, q, 2.0, rng, {}, &rep);
  REQUIRE(non_increasing(st.particles));
  REQUIRE(st.particles.front() < 1.0);
  REQUIRE(st.particles.back() > 0.0);
  CHECK(rep.burnin == doctest::Approx(default_burnin(ProcessSpec::jacobi(n, p, q, 2.0))));
  const auto cdf = jacobi_cdf(n, p + q, p, q);
  const double ks = ks_statistic(st.particles, [&](double x) { return cdf(x); });
  MESSAGE("KS vs Jacobi " << ks);
  CHECK(ks <= 0.04);
}

TEST_CASE("general-potential DBM with V = x^2/2 agrees with the tridiagonal sampler") {
  const int n = 100;
  auto r1 = io::derive_stream(6, 0, "sample");
  const auto sde = sample_dbm_general_potential(n, PotentialSpec::gaussian(), 2.0, r1);
  REQUIRE(non_increasing(sde.particles));
  std::vector<double> tri;
  for (int r = 0; r < 10; ++r) {
    auto rng = io::derive_stream(6, r + 1, "sample");
    const auto st = sample_gaussian_beta(n, 2.0, rng);
    tri.insert(tri.end(), st.particles.begin(), st.particles.end());
  }
  const double ks = ks_two_sample(sde.particles, tri);
  MESSAGE("two-sample KS " << ks);
  CHECK(ks <= 0.03);
}

TEST_CASE("quartic potential: sampled edges near the equilibrium support") {
  const int n = 300;
  const auto V = PotentialSpec::quartic(0.01);
  const auto eq = edge::equilibrium_measure(V);
  auto rng = io::derive_stream(7, 0, "sample");
  BurnInOptions opt;
  opt.burnin = 2.0;
  const auto st = sample_dbm_general_potential(n, V, 2.0, rng, opt);
  std::vector<double> hi, lo;
  for (double x : st.particles) hi.push_back(x / std::sqrt(double(n)));
  for (auto it = st.particles.rbegin(); it != st.particles.rend(); ++it) lo.push_back(-*it / std::sqrt(double(n)));
  const double top = fitted_edge(hi, 30), bottom = -fitted_edge(lo, 30);
  MESSAGE("support [" << eq.A << ", " << eq.B << "], sample [" << bottom << ", " << top << "]");
  CHECK(std::abs(top - eq.B) <= 0.02 * std::abs(eq.B));
  CHECK(std::abs(bottom - eq.A) <= 0.02 * std::abs(eq.A));
}

TEST_CASE("same stream, same sample; other streams give consistent moments") {
  const auto spec = ProcessSpec::gaussian(50, 2.0);
  auto a = io::derive_stream(9, 3, "sample"), b = io::derive_stream(9, 3, "sample");
  CHECK(sample(spec, a).particles == sample(spec, b).particles);

  std::vector<double> top1, top2;
  for (int r = 0; r < 400; ++r) {
    auto s1 = io::derive_stream(100, r, "sample"), s2 = io::derive_stream(200, r, "sample");
    top1.push_back(sample(spec, s1).particles.front());
    top2.push_back(sample(spec, s2).particles.front());
  }
  const auto m1 = summarize(top1), m2 = summarize(top2);
  CHECK(std::abs(m1.mean - m2.mean) <= 3 * std::hypot(m1.se_mean, m2.se_mean));
}

TEST_CASE("top_k samplers agree with the full spectrum") {
  auto a = io::derive_stream(12, 0, "sample"), b = io::derive_stream(12, 0, "sample");
  const auto full = sample_gaussian_beta(80, 1.0, a).particles;
  const auto top = gaussian_top_k(80, 1.0, 5, b);
  REQUIRE(top.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(top[i] == doctest::Approx(full[i]).epsilon(1e-12));

  auto c = io::derive_stream(13, 0, "sample"), d = io::derive_stream(13, 0, "sample");
  const auto lfull = sample_laguerre_beta(40, 60, 4.0, c).particles;
  const auto ltop = laguerre_top_k(40, 60, 4.0, 3, d);
  for (int i = 0; i < 3; ++i) CHECK(ltop[i] == doctest::Approx(lfull[i]).epsilon(1e-12));
}

TEST_CASE("process constraints are enforced") {
  CHECK_THROWS_AS(ProcessSpec::laguerre(10, 5, 2.0).validate(), ConfigError);
  auto j = ProcessSpec::jacobi(10, 11, 11, 2.0);
  CHECK_NOTHROW(j.validate());
  j.m = 30;
  CHECK_THROWS_AS(j.validate(), ConfigError);
  CHECK_THROWS_AS(ProcessSpec::jacobi(10, 5, 20, 2.0).validate(), ConfigError);
  CHECK_THROWS_AS(ProcessSpec::gaussian(0, 2.0).validate(), ConfigError);
  CHECK_THROWS_AS(ProcessSpec::gaussian(5, -1.0).validate(), ConfigError);
  CHECK_THROWS_AS(PotentialSpec({0.0, 0.0, 0.5, 1.0}).validate(), ConfigError);  // odd degree
}

TEST_CASE("statistics helpers") {
  std::vector<double> u;
  for (int i = 0; i < 1000; ++i) u.push_back((i + 0.5) / 1000.0);
  CHECK(ks_statistic(u, [](double x) { return x; }) <= 1e-3);
  CHECK(ks_two_sample(u, u) == 0.0);
  CHECK(semicircle_quantile(semicircle_cdf(0.7)) == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(semicircle_cdf(0.0) == doctest::Approx(0.5));
  const auto m = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.var == doctest::Approx(5.0 / 3.0));
  CHECK(gelman_rubin({u, u}) == doctest::Approx(1.0).epsilon(0.05));
  const auto mp = marchenko_pastur_cdf(100, 200);
  CHECK(mp(mp.a()) == doctest::Approx(0.0));
  CHECK(mp(mp.b()) == doctest::Approx(1.0));
}
