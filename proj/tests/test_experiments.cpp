#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "airyline/dynamics.hpp"
#include "airyline/edge_scaling.hpp"
#include "airyline/ensembles.hpp"
#include "airyline/errors.hpp"
#include "airyline/experiments.hpp"
#include "airyline/special_airy.hpp"

using namespace airyline;
using namespace airyline::experiments;

namespace {

// Rescaled trajectory that never moves: top k Airy zeros at every time.
edge::RescaledTrajectory frozen_airy(std::size_t k, std::size_t frames) {
  const auto z = airy::airy_zeros(k);
  edge::RescaledTrajectory tr;
  tr.top_k = k;
  for (std::size_t f = 0; f < frames; ++f) {
    tr.times.push_back(0.1 * double(f));
    tr.particles.push_back(z.zeros());
  }
  return tr;
}

}  // namespace

TEST_CASE("characteristic flow: sqrt w0 = 1+i, t = 2 gives w = -1") {
  const cplx w = characteristic_point(cplx(1, 1), 2.0);
  CHECK(std::abs(w - cplx(-1, 0)) <= 1e-15);
  CHECK(std::abs(std::sqrt(w) - cplx(0, 1)) <= 1e-15);
  for (double t : {0.0, 0.3, 1.1, 2.9}) {
    const cplx sw0(3, 2);
    CHECK(std::abs(std::sqrt(characteristic_point(sw0, t)) - (sw0 - t / 2)) <= 1e-14);
  }
}

TEST_CASE("characteristic track on a frozen configuration") {
  const auto s = edge::scaling_for(ProcessSpec::gaussian(2000, 2.0));
  const auto z = airy::airy_zeros(400);
  std::vector<double> lam;
  for (std::size_t i = 1; i <= 400; ++i) lam.push_back(s.E + s.chi * z[i]);
  dynamics::TrajectoryRecord tr;
  for (int k = 0; k <= 40; ++k) {
    tr.times.push_back(s.zeta * 0.1 * k);
    tr.snapshots.push_back(lam);
  }
  const cplx sw0(3, 2);
  const double delta = 0.1;
  auto [track, rep] = characteristic_track(tr, s, sw0, 4.0, delta);
  REQUIRE(track.samples.size() == 41);
  CHECK(rep.pass());
  // with no dynamics the statistic is the static configuration read along the flow
  double expect = 0;
  for (const auto& smp : track.samples) {
    const cplx w = characteristic_point(sw0, smp.t);
    const cplx d = edge::delta_transform(lam, s, w);
    CHECK(smp.delta == d);
    expect = std::max(expect, std::abs(d) * (sw0.real() - smp.t / 2) * std::pow(2.0, delta));
  }
  CHECK(rep.statistics["statistic"].get<double>() == expect);
  CHECK(track.samples.front().delta == edge::delta_transform(lam, s, sw0 * sw0));
}

TEST_CASE("characteristic track refuses a flow that leaves the half plane") {
  const auto s = edge::scaling_for(ProcessSpec::gaussian(100, 2.0));
  dynamics::TrajectoryRecord tr;
  CHECK_THROWS_AS(characteristic_track(tr, s, cplx(1, 1), 2.0, 0.1), PreconditionError);
  CHECK_THROWS_AS(characteristic_track(tr, s, cplx(3, -1), 2.0, 0.1), PreconditionError);
}

TEST_CASE("frozen Airy zeros: rigidity 0, Wegner at the zero-count constant") {
  const std::size_t k = 60;
  const auto tr = frozen_airy(k, 5);
  const auto st = rigidity_wegner_stats(tr, 0.25);
  CHECK(st.rigidity == 0.0);
  // count constant on a fine y-grid over the same range
  const auto& z = tr.particles.front();
  double oracle = 0;
  for (double y = z.back() + 1; y <= z.front() + 1; y += 1e-4) {
    double c = 0;
    for (double a : z) c += (a >= y - 1 && a <= y + 1);
    oracle = std::max(oracle, c / std::sqrt(std::abs(y) + 1));
  }
  MESSAGE("Wegner " << st.wegner << " oracle " << oracle);
  CHECK(st.wegner <= oracle + 1e-12);
  CHECK(st.wegner >= 0.97 * oracle);
  const auto rep = rigidity_and_wegner({tr}, 0.25, 10.0);
  CHECK(rep.pass());
  CHECK_THROWS_AS(rigidity_and_wegner({frozen_airy(20, 2)}, 0.25, 10.0), PreconditionError);
}

TEST_CASE("Holder control: Brownian paths have slope 1/2") {
  const double dt = 1e-5;
  const std::size_t steps = 200000;
  std::vector<edge::RescaledTrajectory> trajs;
  for (std::size_t r = 0; r < 4; ++r) {
    auto rng = io::derive_stream(31, r, "noise");
    edge::RescaledTrajectory tr;
    tr.top_k = 1;
    double x = 0;
    for (std::size_t j = 0; j <= steps; ++j) {
      tr.times.push_back(dt * double(j));
      tr.particles.push_back({x});
      x += std::sqrt(dt) * rng.normal();
    }
    trajs.push_back(std::move(tr));
  }
  const auto rep = holder_exponent(trajs, {1}, {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}, 0.5, 0.05);
  const double slope = rep.statistics["slope_k1"].get<double>();
  MESSAGE("Brownian slope " << slope);
  CHECK(std::abs(slope - 0.5) <= 0.05);
  CHECK(rep.pass());
  CHECK_THROWS_AS(holder_exponent(trajs, {1}, {1e-3, 3e-3}), PreconditionError);
}

TEST_CASE("fit_line recovers an exact line") {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_se == doctest::Approx(0.0));
}

TEST_CASE("coupling: identical starts stay identical under shared noise") {
  const auto spec = ProcessSpec::gaussian(40, 2.0);
  auto rng = io::derive_stream(5, 0, "sample");
  const auto x = ensembles::sample(spec, rng);
  const auto cfg = dynamics::IntegratorConfig::defaults_for(spec);
  const dynamics::NoiseBlock nb(io::derive_stream(5, 0, "noise"), 200, x.particles.size());
  auto a = x, b = x;
  for (std::size_t st = 0; st < 200; ++st) {
    const auto row = dynamics::NoiseRow::from_block(nb, st);
    a = dynamics::step_model(dynamics::Model::from_spec(spec), a, cfg, row);
    b = dynamics::step_model(dynamics::Model::from_spec(spec), b, cfg, row);
    double d = 0;
    for (std::size_t i = 0; i < 10; ++i) d = std::max(d, std::abs(a.particles[i] - b.particles[i]));
    REQUIRE(d == 0.0);
  }
}

TEST_CASE("collision measure on synthetic gap traces") {
  GapTrace never{0.01, std::vector<double>(100, 0.5)};
  auto rep = collision_measure({never}, {1e-4, 1e-3});
  CHECK(rep.pass());
  CHECK(rep.statistics["fitted_exponent"].is_null());

  // gap = t on (0, 1]: measure(eps) = eps
  GapTrace lin;
  lin.dt = 1e-5;
  for (int k = 1; k <= 100000; ++k) lin.min_gap.push_back(k * 1e-5);
  rep = collision_measure({lin}, {1e-3, 1e-2, 1e-1});
  CHECK(rep.statistics["fitted_exponent"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(rep.pass());
}

TEST_CASE("nearly coincident particles separate without noise") {
  // exact coincidence is a pole of the drift; start 1e-3 apart with a step that resolves it.
  // At small gaps the pair term dominates and g^2 - g0^2 grows linearly in t.
  auto spec = ProcessSpec::gaussian(2, 2.0);
  dynamics::SdeState cur;
  cur.particles = {5e-4, -5e-4};
  auto cfg = dynamics::IntegratorConfig::defaults_for(spec);
  cfg.dt = 1e-8;
  const auto model = dynamics::Model::from_spec(spec);
  const double g0 = 1e-3;
  double gap = g0;
  std::vector<double> sq;
  for (int k = 1; k <= 4000; ++k) {
    cur = dynamics::step_model(model, cur, cfg, dynamics::NoiseRow::fixed({0.0, 0.0}));
    const double g = cur.particles[0] - cur.particles[1];
    REQUIRE(g > gap);
    gap = g;
    if (k % 1000 == 0) sq.push_back(g * g - g0 * g0);
  }
  for (std::size_t j = 1; j < sq.size(); ++j)
    CHECK(sq[j] / sq[0] == doctest::Approx(double(j + 1)).epsilon(0.02));
  MESSAGE("gap " << g0 << " -> " << gap);
}

TEST_CASE("local law grid respects its domain") {
  const double n = 2000;
  const auto g = local_law_grid(n, 1.0);
  REQUIRE(!g.empty());
  for (const auto& w : g) {
    CHECK(std::abs(w) <= std::pow(n, 1.0 / 6.0) * (1 + 1e-12));
    CHECK(w.imag() >= std::sqrt(std::max(w.real(), 0.0) + 1) * (1 - 1e-12));
  }
}

TEST_CASE("deterministic Airy configuration matches the exact log derivative") {
  const auto rep = airy_like_deterministic(2000, 0.0);
  MESSAGE("C = " << rep.statistics["C_configuration"].get<double>());
  CHECK(rep.pass());
  const auto shifted = airy_like_deterministic(2000, 1.0);
  CHECK(shifted.pass());
}

TEST_CASE("unit shift inflates the fitted envelope constant threefold" * doctest::should_fail()) {
  const double c0 = airy_like_deterministic(2000, 0.0).statistics["C_exact"].get<double>();
  const auto grid = local_law_grid(2000, 1.0);
  std::vector<cplx> d;
  // exact zeros moved by +1, read against the unshifted sqrt w
  for (const auto& w : grid) d.push_back(airy::airy_log_derivative(w - 1.0) - std::sqrt(w));
  const double c1 = fitted_envelope_constant(grid, d);
  MESSAGE("ratio " << c1 / c0);
  CHECK(c1 >= 3 * c0);
}

TEST_CASE("airy_like_at_equilibrium preconditions") {
  CHECK_THROWS_AS(airy_like_at_equilibrium(ProcessSpec::gaussian(100, 2.0), {}, {}), PreconditionError);
}

TEST_CASE("drift decomposition: closed-form pairing agrees with the direct generator") {
  const auto spec = ProcessSpec::gaussian(60, 2.0);
  const auto s = edge::scaling_for(spec);
  const auto model = dynamics::Model::from_spec(spec);
  auto rng = io::derive_stream(8, 0, "sample");
  const auto lam = ensembles::sample(spec, rng).particles;
  std::vector<double> b(lam.size());
  model.drift(lam.data(), lam.size(), b.data());
  for (cplx w : {cplx(0, 1), cplx(-2, 0.7), cplx(1.5, 2)}) {
    const auto d = drift_decomposition(model, lam, s, 2.0, w);
    cplx gen = 0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
      const double lt = (lam[i] - s.E) / s.chi, sg = model.sigma(lam[i]);
      const cplx inv = 1.0 / (lt - w);
      gen += -(s.zeta / s.chi) * b[i] * inv * inv + (s.zeta / (s.chi * s.chi)) * sg * sg * inv * inv * inv;
    }
    CHECK(std::abs(d.generator - gen) <= 1e-10 * (1 + std::abs(gen)));
    CHECK(std::abs(d.Y - (edge::delta_transform(lam, s, w) + std::sqrt(w))) <= 1e-12 * (1 + std::abs(d.Y)));
    // exact derivative vs the Nevanlinna evaluation path
    const auto fn = edge::rescaled_nevanlinna(lam, s);
    const auto lt = edge::rescale_particles(lam, s, lam.size());
    CHECK(std::abs(edge::y_derivative(lt, w, 1) - nevanlinna::derivative(fn, w, 1)) <= 1e-10);
    // limiting drift from its definition
    const cplx Yp = edge::y_derivative(lt, w, 1), Ypp = edge::y_derivative(lt, w, 2);
    CHECK(std::abs(d.limiting - (d.Y * Yp - 0.5)) <= 1e-10 * (1 + std::abs(d.limiting)));
    (void)Ypp;
  }
}

TEST_CASE("tw_statistics: precondition, determinism and thread independence") {
  const auto spec = ProcessSpec::gaussian(50, 2.0);
  CHECK_THROWS_AS(tw_statistics(spec, 50, {}), PreconditionError);
  const auto a = tw_statistics(spec, 100, {7, 1});
  const auto b = tw_statistics(spec, 100, {7, 3});
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.find("half_sample_consistency") != nullptr);
}

TEST_CASE("tw_statistics: mean ordering in beta follows the SAO oracle") {
  // oracle (fixtures/sao_tw.json): -2.060 (beta 4) < -1.779 (beta 2) < -1.220 (beta 1)
  double mean[3];
  const double betas[3] = {1.0, 2.0, 4.0};
  for (int i = 0; i < 3; ++i)
    mean[i] = tw_statistics(ProcessSpec::gaussian(100, betas[i]), 400, {11, 1}).statistics.at("mean").get<double>();
  MESSAGE("means " << mean[0] << " " << mean[1] << " " << mean[2]);
  CHECK(mean[2] < mean[1]);
  CHECK(mean[1] < mean[0]);
}

TEST_CASE("report criteria bookkeeping") {
  ExperimentReport r;
  r.check("inside", 0.5, 0.0, 1.0);
  CHECK(r.pass());
  r.check_le("too_big", 2.0, 1.0);
  CHECK_FALSE(r.pass());
  REQUIRE(r.find("too_big") != nullptr);
  CHECK(r.find("too_big")->hi == 1.0);
  CHECK(r.find("missing") == nullptr);
  const auto j = r.to_json();
  CHECK(j.contains("criteria"));
}
