#include "airyline/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "airyline/ensembles.hpp"
#include "airyline/errors.hpp"
#include "airyline/nevanlinna.hpp"
#include "airyline/parallel.hpp"
#include "airyline/rng.hpp"
#include "airyline/special_airy.hpp"

namespace airyline::experiments {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json bound(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) throw PreconditionError("quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const std::size_t i = std::size_t(pos);
  const double f = pos - double(i);
  return i + 1 < v.size() ? (1 - f) * v[i] + f * v[i + 1] : v[i];
}

std::string fmt_key(const std::string& base, double v) {
  std::ostringstream os;
  os << base << v;
  return os.str();
}

}  // namespace

const Criterion& ExperimentReport::check(const std::string& name, double measured, double lo,
                                         double hi) {
  criteria.push_back({name, measured, lo, hi, measured >= lo && measured <= hi});
  return criteria.back();
}
const Criterion& ExperimentReport::check_le(const std::string& name, double measured, double hi) {
  return check(name, measured, -kInf, hi);
}
const Criterion& ExperimentReport::check_ge(const std::string& name, double measured, double lo) {
  return check(name, measured, lo, kInf);
}

bool ExperimentReport::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

const Criterion* ExperimentReport::find(const std::string& n) const {
  for (const auto& c : criteria)
    if (c.name == n) return &c;
  return nullptr;
}

json ExperimentReport::to_json() const {
  json crit = json::array();
  for (const auto& c : criteria)
    crit.push_back({{"name", c.name},
                    {"measured", c.measured},
                    {"lo", bound(c.lo)},
                    {"hi", bound(c.hi)},
                    {"pass", c.pass}});
  return {{"name", name},         {"parameters", parameters}, {"statistics", statistics},
          {"criteria", crit},     {"pass", pass()},           {"artifacts", artifacts}};
}

// ---------------------------------------------------------------------------

void rescaled_coefficients(const dynamics::Model& model, const std::vector<double>& lambda,
                           const edge::EdgeScaling& s, std::vector<double>& drift,
                           std::vector<double>& diff2) {
  const std::size_t n = lambda.size();
  drift.resize(n);
  diff2.resize(n);
  model.drift(lambda.data(), n, drift.data());
  const double a = s.zeta / s.chi, b = s.zeta / (s.chi * s.chi);
  for (std::size_t i = 0; i < n; ++i) {
    drift[i] *= a;
    const double sg = model.sigma(lambda[i]);
    diff2[i] = b * sg * sg;
  }
}

DriftDecomposition drift_decomposition(const dynamics::Model& model,
                                       const std::vector<double>& lambda,
                                       const edge::EdgeScaling& s, double beta, cplx w) {
  const std::size_t n = lambda.size();
  cplx S1 = 0, S2 = 0, S3 = 0;
  cplx gen = 0;
  if (model.pairing == dynamics::Model::Pairing::unit) {
    // pairwise part in closed form: sum_{i!=j} 1/((x_i-x_j)(x_i-w)^2) = S3 - S1 S2
    const double pair = s.zeta / (s.chi * s.chi);
    const double a = s.zeta / s.chi;
    const double sg = model.sigma(0.0);
    const double d2 = pair * sg * sg;
    const double sn = std::sqrt(model.n_scale);
    for (std::size_t i = 0; i < n; ++i) {
      const double lt = (lambda[i] - s.E) / s.chi;
      const cplx inv = 1.0 / (lt - w), inv2 = inv * inv, inv3 = inv2 * inv;
      S1 += inv;
      S2 += inv2;
      S3 += inv3;
      double ext = 0.0;
      if (model.V) ext -= model.V->is_gaussian() ? 0.5 * lambda[i] : 0.5 * sn * model.V->dV(lambda[i] / sn);
      if (model.W) ext += (*model.W)(lambda[i]);
      gen += -a * ext * inv2 + d2 * inv3;
    }
    gen += pair * (S1 * S2 - S3);
  } else {
    std::vector<double> b, d2;
    rescaled_coefficients(model, lambda, s, b, d2);
    for (std::size_t i = 0; i < n; ++i) {
      const double lt = (lambda[i] - s.E) / s.chi;
      const cplx inv = 1.0 / (lt - w), inv2 = inv * inv, inv3 = inv2 * inv;
      S1 += inv;
      S2 += inv2;
      S3 += inv3;
      gen += -b[i] * inv2 + d2[i] * inv3;
    }
  }
  DriftDecomposition d;
  d.Y = S1 + s.chi * s.shift;
  d.generator = gen;
  const cplx Yp = S2, Ypp = 2.0 * S3;
  d.limiting = (2.0 - beta) / (2.0 * beta) * Ypp + d.Y * Yp - 0.5;
  return d;
}

// ---------------------------------------------------------------------------

ExperimentReport tw_statistics(const ProcessSpec& spec, std::size_t replicas, const RunOptions& run,
                               const TwReference* ref,
                               std::vector<std::pair<double, double>>* top_out) {
  if (replicas < 100) throw PreconditionError("tw_statistics: replicas must be >= 100");
  const auto s = edge::scaling_for(spec);
  std::vector<std::pair<double, double>> top(replicas);
  for_each_replica(replicas, run.threads, [&](std::size_t r) {
    auto rng = io::derive_stream(run.seed, r, "sample");
    std::vector<double> v;
    if (spec.is_gaussian())
      v = ensembles::gaussian_top_k(spec.n, spec.beta, 2, rng);
    else if (spec.kind == ProcessKind::laguerre)
      v = ensembles::laguerre_top_k(spec.n, spec.m, spec.beta, 2, rng);
    else
      v = ensembles::sample(spec, rng).particles;
    const double x1 = edge::rescale_value(v.at(0), s);
    const double x2 = v.size() > 1 ? edge::rescale_value(v[1], s) : x1;
    top[r] = {x1, x2};
  });
  std::vector<double> x1, gap, h1, h2;
  for (std::size_t r = 0; r < replicas; ++r) {
    x1.push_back(top[r].first);
    gap.push_back(top[r].first - top[r].second);
    (r < replicas / 2 ? h1 : h2).push_back(top[r].first);
  }
  const auto m = ensembles::summarize(x1);
  const auto g = ensembles::summarize(gap);
  const auto m1 = ensembles::summarize(h1), m2 = ensembles::summarize(h2);
  ExperimentReport rep;
  rep.name = "tw_statistics";
  rep.parameters = {{"kind", to_string(spec.kind)}, {"n", spec.n},     {"beta", spec.beta},
                    {"m", spec.m},                  {"replicas", replicas}, {"seed", run.seed}};
  rep.stat("mean", m.mean);
  rep.stat("mean_se", m.se_mean);
  rep.stat("var", m.var);
  rep.stat("var_se", m.se_var);
  rep.stat("skew", m.skew);
  rep.stat("gap_mean", g.mean);
  rep.stat("gap_var", g.var);
  const double zhalf = (m1.mean - m2.mean) / std::sqrt(m1.se_mean * m1.se_mean + m2.se_mean * m2.se_mean);
  rep.stat("half_sample_z", zhalf);
  rep.check_le("half_sample_consistency", std::abs(zhalf), 3.0);
  if (ref) {
    rep.stat("reference_mean", ref->mean);
    rep.stat("reference_var", ref->var);
    rep.check("mean_vs_reference", m.mean - ref->mean, -ref->tol_mean, ref->tol_mean);
    rep.check("var_vs_reference", m.var - ref->var, -ref->tol_var, ref->tol_var);
  }
  if (top_out) *top_out = std::move(top);
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<cplx> local_law_grid(double n, double c_dom, std::size_t na, std::size_t nb) {
  const double R = std::pow(n, 1.0 / 6.0);
  std::vector<cplx> g;
  for (std::size_t i = 0; i < na; ++i) {
    const double a = -R + 2.0 * R * double(i) / double(na - 1);
    for (std::size_t j = 0; j < nb; ++j) {
      const double b = R * double(j + 1) / double(nb);
      const cplx w(a, b);
      if (std::abs(w) <= R && b >= c_dom * std::sqrt(std::max(a, 0.0) + 1.0)) g.push_back(w);
    }
  }
  if (g.empty()) throw PreconditionError("local_law_grid: empty domain");
  return g;
}

double fitted_envelope_constant(const std::vector<cplx>& grid, const std::vector<cplx>& delta) {
  double C = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double env = std::sqrt(std::sqrt(grid[i]).imag()) / grid[i].imag();
    C = std::max(C, std::abs(delta[i]) / env);
  }
  return C;
}

ExperimentReport airy_like_at_equilibrium(const ProcessSpec& spec, const AiryLikeOptions& opt,
                                          const RunOptions& run, std::vector<double>* out) {
  if (spec.n < 500) throw PreconditionError("airy_like_at_equilibrium: n must be >= 500");
  const auto s = edge::scaling_for(spec);
  const auto grid = local_law_grid(spec.n, opt.c_dom);
  std::vector<double> C(opt.replicas);
  for_each_replica(opt.replicas, run.threads, [&](std::size_t r) {
    auto rng = io::derive_stream(run.seed, r, "sample");
    auto st = ensembles::sample(spec, rng);
    auto lt = edge::rescale_particles(st.particles, s, st.particles.size());
    for (double& x : lt) x += opt.rescaled_shift;
    std::vector<cplx> d;
    for (const auto& w : grid) d.push_back(edge::delta_from_rescaled(lt, s, w));
    C[r] = fitted_envelope_constant(grid, d);
  });
  ExperimentReport rep;
  rep.name = "airy_like_at_equilibrium";
  rep.parameters = {{"kind", to_string(spec.kind)}, {"n", spec.n},          {"beta", spec.beta},
                    {"replicas", opt.replicas},     {"c_dom", opt.c_dom}, {"shift", opt.rescaled_shift},
                    {"grid_points", grid.size()},   {"seed", run.seed}};
  rep.stat("C_median", quantile_of(C, 0.5));
  rep.stat("C_p95", quantile_of(C, 0.95));
  rep.stat("C_max", *std::max_element(C.begin(), C.end()));
  rep.check_le("C_p95_finite", quantile_of(C, 0.95), std::numeric_limits<double>::max());
  if (out) *out = C;
  return rep;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw PreconditionError("fit_line: need >= 2 points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - f.intercept - f.slope * x[i];
      rss += e * e;
    }
    f.slope_se = std::sqrt(rss / double(n - 2) / sxx);
  }
  return f;
}

ExperimentReport airy_like_across_n(const ProcessSpec& base, const std::vector<int>& n_values,
                                    const AiryLikeOptions& opt, const RunOptions& run) {
  ExperimentReport rep;
  rep.name = "airy_like_across_n";
  std::vector<double> logn, p95;
  for (int n : n_values) {
    ProcessSpec sp = base;
    sp.n = n;
    if (sp.kind == ProcessKind::laguerre) sp.m = std::max(sp.m, n);
    auto r = airy_like_at_equilibrium(sp, opt, run);
    const double c = r.statistics["C_p95"].get<double>();
    rep.stat(fmt_key("C_p95_n", n), c);
    rep.stat(fmt_key("C_median_n", n), r.statistics["C_median"].get<double>());
    logn.push_back(std::log(double(n)));
    p95.push_back(c);
  }
  rep.parameters = {{"kind", to_string(base.kind)}, {"beta", base.beta}, {"n_values", n_values},
                    {"replicas", opt.replicas},     {"seed", run.seed}};
  const auto f = fit_line(logn, p95);
  rep.stat("slope_C_vs_log_n", f.slope);
  rep.check("C_trend", f.slope, -0.2, 0.2);
  return rep;
}

ExperimentReport airy_like_deterministic(double n_equiv, double shift, double c_dom) {
  const auto grid = local_law_grid(n_equiv, c_dom);
  auto fn = nevanlinna::NevanlinnaFn::airy_anchored(
      nevanlinna::ParticleMeasure::airy_configuration(2000, shift));
  std::vector<cplx> dz, de;
  for (const auto& w : grid) {
    dz.push_back(nevanlinna::evaluate(fn, w) - std::sqrt(w));
    de.push_back(airy::airy_log_derivative(w - shift) - std::sqrt(w));
  }
  ExperimentReport rep;
  rep.name = "airy_like_deterministic";
  rep.parameters = {{"n_equiv", n_equiv}, {"shift", shift}, {"c_dom", c_dom}};
  const double c1 = fitted_envelope_constant(grid, dz), c2 = fitted_envelope_constant(grid, de);
  rep.stat("C_configuration", c1);
  rep.stat("C_exact", c2);
  rep.check_le("configuration_vs_exact", std::abs(c1 - c2), 1e-6);
  return rep;
}

// ---------------------------------------------------------------------------

RigidityStats rigidity_wegner_stats(const edge::RescaledTrajectory& traj, double delta) {
  RigidityStats st;
  std::size_t k = 0;
  for (const auto& x : traj.particles) k = std::max(k, x.size());
  const auto table = airy::shared_zero_table(std::max<std::size_t>(k, 1));
  for (const auto& x : traj.particles) {
    for (std::size_t i = 0; i < x.size(); ++i)
      st.rigidity = std::max(st.rigidity, std::abs(x[i] - (*table)[i + 1]) * std::pow(double(i + 1), delta));
    if (x.empty()) continue;
    const double lo = x.back() + 1.0, hi = x.front() + 1.0;
    for (double y = lo; y <= hi + 1e-12; y += 0.05) {
      const auto c = std::count_if(x.begin(), x.end(), [&](double v) { return v >= y - 1 && v <= y + 1; });
      st.wegner = std::max(st.wegner, double(c) / std::sqrt(std::abs(y) + 1.0));
    }
  }
  return st;
}

ExperimentReport rigidity_and_wegner(const std::vector<edge::RescaledTrajectory>& trajs,
                                     double delta, double C) {
  ExperimentReport rep;
  rep.name = "rigidity_and_wegner";
  std::size_t k = 0;
  for (const auto& t : trajs) k = std::max(k, t.top_k);
  if (k < 50) throw PreconditionError("rigidity_and_wegner: top_k must be >= 50");
  rep.parameters = {{"delta", delta}, {"C", C}, {"replicas", trajs.size()}, {"top_k", k}};
  double rmax = 0, wmax = 0, rsum = 0, wsum = 0;
  for (const auto& t : trajs) {
    auto s = rigidity_wegner_stats(t, delta);
    rmax = std::max(rmax, s.rigidity);
    wmax = std::max(wmax, s.wegner);
    rsum += s.rigidity;
    wsum += s.wegner;
  }
  rep.stat("rigidity_max", rmax);
  rep.stat("rigidity_mean", rsum / double(trajs.size()));
  rep.stat("wegner_max", wmax);
  rep.stat("wegner_mean", wsum / double(trajs.size()));
  rep.check_le("rigidity_bounded", rmax, C);
  rep.check_le("wegner_bounded", wmax, C);
  return rep;
}

// ---------------------------------------------------------------------------

edge::RescaledTrajectory record_top_k(const ProcessSpec& spec, const dynamics::SdeState& state0,
                                      std::size_t steps, const dynamics::IntegratorConfig& cfg,
                                      const dynamics::NoiseBlock& noise, std::size_t top_k,
                                      std::size_t every, dynamics::EventLog* log) {
  const auto s = edge::scaling_for(spec);
  edge::RescaledTrajectory tr;
  tr.top_k = std::min(top_k, state0.particles.size());
  every = std::max<std::size_t>(every, 1);
  auto obs = [&](std::size_t k, const dynamics::SdeState& st) {
    if (k % every) return;
    tr.times.push_back((st.t - state0.t) / s.zeta);
    tr.particles.push_back(edge::rescale_particles(st.particles, s, tr.top_k));
  };
  dynamics::run(spec, state0, steps, cfg, noise, obs, log);
  return tr;
}

edge::RescaledTrajectory stationary_top_k(const ProcessSpec& spec, double T, double dt,
                                          std::size_t top_k, std::uint64_t seed, std::size_t r,
                                          std::size_t every) {
  const auto s = edge::scaling_for(spec);
  auto cfg = dynamics::IntegratorConfig::defaults_for(spec);
  cfg.dt = s.zeta * dt;
  const std::size_t steps = dynamics::steps_for(T, dt);
  auto rng = io::derive_stream(seed, r, "sample");
  auto st = ensembles::sample(spec, rng);
  const dynamics::NoiseBlock nb(io::derive_stream(seed, r, "noise"), steps, st.particles.size());
  return record_top_k(spec, st, steps, cfg, nb, top_k, every);
}

ExperimentReport rigidity_experiment(const ProcessSpec& spec, std::size_t top_k, double T,
                                     double dt, std::size_t replicas, double delta, double C,
                                     const RunOptions& run) {
  std::vector<edge::RescaledTrajectory> trajs(replicas);
  for_each_replica(replicas, run.threads, [&](std::size_t r) {
    trajs[r] = stationary_top_k(spec, T, dt, top_k, run.seed, r);
  });
  auto rep = rigidity_and_wegner(trajs, delta, C);
  rep.parameters["kind"] = to_string(spec.kind);
  rep.parameters["n"] = spec.n;
  rep.parameters["beta"] = spec.beta;
  rep.parameters["T"] = T;
  rep.parameters["dt"] = dt;
  rep.parameters["seed"] = run.seed;
  return rep;
}

ExperimentReport holder_experiment(const ProcessSpec& spec, const std::vector<int>& ks,
                                   const std::vector<double>& windows, double T, double dt,
                                   std::size_t replicas, const RunOptions& run) {
  if (ks.empty()) throw PreconditionError("holder_experiment: empty k list");
  const std::size_t kmax = std::size_t(*std::max_element(ks.begin(), ks.end()));
  std::vector<edge::RescaledTrajectory> trajs(replicas);
  for_each_replica(replicas, run.threads, [&](std::size_t r) {
    trajs[r] = stationary_top_k(spec, T, dt, kmax, run.seed, r);
  });
  auto rep = holder_exponent(trajs, ks, windows);
  rep.parameters["kind"] = to_string(spec.kind);
  rep.parameters["n"] = spec.n;
  rep.parameters["beta"] = spec.beta;
  rep.parameters["T"] = T;
  rep.parameters["seed"] = run.seed;
  return rep;
}

ExperimentReport holder_exponent(const std::vector<edge::RescaledTrajectory>& trajs,
                                 const std::vector<int>& ks, const std::vector<double>& windows,
                                 double slope_target, double slope_tol, double k_target,
                                 double k_tol) {
  if (trajs.empty() || ks.empty() || windows.size() < 2)
    throw PreconditionError("holder_exponent: need trajectories, k values and >= 2 windows");
  const double wmin = *std::min_element(windows.begin(), windows.end());
  const double wmax = *std::max_element(windows.begin(), windows.end());
  if (!(wmax / wmin >= 100.0 * (1 - 1e-9)))
    throw PreconditionError("holder_exponent: insufficient decades (windows must span >= 2 decades)");
  const auto& t0 = trajs.front().times;
  if (t0.size() < 2) throw PreconditionError("holder_exponent: trajectory too short");
  const double dt = t0[1] - t0[0];
  std::vector<std::size_t> wsteps;
  for (double w : windows) wsteps.push_back(std::max<std::size_t>(1, std::size_t(std::llround(w / dt))));
  const std::size_t block = *std::max_element(wsteps.begin(), wsteps.end());

  ExperimentReport rep;
  rep.name = "holder_exponent";
  rep.parameters = {{"ks", ks}, {"windows", windows}, {"replicas", trajs.size()}, {"dt", dt}};
  std::vector<double> logk, logpref;
  std::vector<double> logxi;
  for (double w : windows) logxi.push_back(std::log(w));
  for (int k : ks) {
    std::vector<double> mean_inc(windows.size(), 0.0);
    std::size_t count = 0;
    for (const auto& tr : trajs) {
      if (tr.times.size() < block + 1) throw PreconditionError("holder_exponent: trajectory shorter than the largest window");
      for (std::size_t o = 0; o + block < tr.times.size(); o += block) {
        const double x0 = tr.particles[o].at(std::size_t(k - 1));
        for (std::size_t wi = 0; wi < windows.size(); ++wi) {
          double m = 0;
          for (std::size_t j = 1; j <= wsteps[wi]; ++j)
            m = std::max(m, std::abs(tr.particles[o + j][std::size_t(k - 1)] - x0));
          mean_inc[wi] += m;
        }
        ++count;
      }
    }
    std::vector<double> logm;
    double pref = 0;
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
      mean_inc[wi] /= double(count);
      logm.push_back(std::log(mean_inc[wi]));
      pref += logm.back() - 0.5 * logxi[wi];
    }
    pref /= double(windows.size());
    const auto f = fit_line(logxi, logm);
    rep.stat(fmt_key("slope_k", k), f.slope);
    rep.stat(fmt_key("slope_se_k", k), f.slope_se);
    rep.stat(fmt_key("prefactor_k", k), std::exp(pref));
    rep.check(fmt_key("xi_slope_k", k), f.slope, slope_target - slope_tol, slope_target + slope_tol);
    logk.push_back(std::log(double(k)));
    logpref.push_back(pref);
  }
  if (ks.size() >= 2) {
    const auto f = fit_line(logk, logpref);
    rep.stat("k_exponent", f.slope);
    rep.stat("k_exponent_se", f.slope_se);
    rep.check("k_exponent", f.slope, k_target - k_tol, k_target + k_tol);
  }
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport sde_residual_check(const ProcessSpec& spec, const ResidualOptions& opt,
                                    const RunOptions& run) {
  if (opt.w.imag() < 0.5 || opt.w2.imag() < 0.5)
    throw PreconditionError("sde_residual_check: Im w must be >= 0.5");
  const auto s = edge::scaling_for(spec);
  const auto model = dynamics::Model::from_spec(spec);
  auto cfg = dynamics::IntegratorConfig::defaults_for(spec);
  cfg.dt = s.zeta * opt.dt;
  if (opt.max_retries > 0) cfg.max_retries = opt.max_retries;
  if (opt.min_gap >= 0.0) cfg.min_gap = opt.min_gap;
  const std::size_t steps = dynamics::steps_for(opt.T, opt.dt);
  if (steps < 10) throw PreconditionError("sde_residual_check: schedule too coarse (< 10 steps)");
  const double beta = spec.beta;

  struct Acc {
    cplx m_full{}, m_lim{}, qv{}, qv_pred{}, cqv{}, cqv_pred{};
    double e_abs = 0;
  };
  std::vector<Acc> acc(opt.replicas);
  for_each_replica(opt.replicas, run.threads, [&](std::size_t r) {
    auto rng = io::derive_stream(run.seed, r, "sample");
    auto st = ensembles::sample(spec, rng);
    const dynamics::NoiseBlock nb(io::derive_stream(run.seed, r, "noise"), steps, st.particles.size());
    Acc a;
    DriftDecomposition prev, prev2;
    cplx qv_rate{}, cqv_rate{};
    auto rates = [&](const std::vector<double>& lam) {
      cplx q = 0, c = 0;
      for (double x : lam) {
        const double lt = (x - s.E) / s.chi;
        const cplx i1 = 1.0 / (lt - opt.w), i2 = 1.0 / (lt - opt.w2);
        const cplx i1s = i1 * i1;
        q += i1s * i1s;
        c += i1s * i2 * i2;
      }
      qv_rate = 2.0 / beta * q;
      cqv_rate = 2.0 / beta * c;
    };
    auto obs = [&](std::size_t k, const dynamics::SdeState& state) {
      auto cur = drift_decomposition(model, state.particles, s, beta, opt.w);
      auto cur2 = drift_decomposition(model, state.particles, s, beta, opt.w2);
      if (k > 0) {
        const cplx dY = cur.Y - prev.Y, dY2 = cur2.Y - prev2.Y;
        const cplx r_full = dY - prev.generator * opt.dt;
        const cplx r_full2 = dY2 - prev2.generator * opt.dt;
        a.m_full += r_full;
        a.m_lim += dY - prev.limiting * opt.dt;
        a.qv += r_full * r_full;
        a.qv_pred += qv_rate * opt.dt;
        a.cqv += r_full * r_full2;
        a.cqv_pred += cqv_rate * opt.dt;
      }
      a.e_abs += std::abs(cur.error());
      rates(state.particles);
      prev = cur;
      prev2 = cur2;
    };
    dynamics::run(spec, st, steps, cfg, nb, obs);
    a.e_abs /= double(steps + 1);
    acc[r] = a;
  });

  auto zscores = [&](auto get) {
    double mr = 0, mi = 0;
    const double R = double(acc.size());
    for (const auto& a : acc) {
      mr += get(a).real();
      mi += get(a).imag();
    }
    mr /= R;
    mi /= R;
    double vr = 0, vi = 0;
    for (const auto& a : acc) {
      vr += std::pow(get(a).real() - mr, 2);
      vi += std::pow(get(a).imag() - mi, 2);
    }
    const double ser = std::sqrt(vr / (R - 1) / R), sei = std::sqrt(vi / (R - 1) / R);
    return std::array<double, 4>{mr, mi, mr / ser, mi / sei};
  };
  const auto zf = zscores([](const Acc& a) { return a.m_full; });
  const auto zl = zscores([](const Acc& a) { return a.m_lim; });
  cplx qv = 0, qvp = 0, cq = 0, cqp = 0;
  double eabs = 0;
  for (const auto& a : acc) {
    qv += a.qv;
    qvp += a.qv_pred;
    cq += a.cqv;
    cqp += a.cqv_pred;
    eabs += a.e_abs;
  }
  const cplx ratio = qv / qvp, cratio = cq / cqp;

  ExperimentReport rep;
  rep.name = "sde_residual_check";
  rep.parameters = {{"kind", to_string(spec.kind)},
                    {"n", spec.n},
                    {"beta", beta},
                    {"w", {opt.w.real(), opt.w.imag()}},
                    {"w2", {opt.w2.real(), opt.w2.imag()}},
                    {"T", opt.T},
                    {"dt", opt.dt},
                    {"replicas", opt.replicas},
                    {"seed", run.seed}};
  rep.stat("residual_mean_re", zf[0]);
  rep.stat("residual_mean_im", zf[1]);
  rep.stat("residual_z_re", zf[2]);
  rep.stat("residual_z_im", zf[3]);
  rep.stat("limiting_residual_z_re", zl[2]);
  rep.stat("limiting_residual_z_im", zl[3]);
  rep.stat("mean_abs_error_term", eabs / double(acc.size()));
  rep.stat("qv_ratio_re", ratio.real());
  rep.stat("qv_ratio_im", ratio.imag());
  rep.stat("cross_qv_ratio_re", cratio.real());
  rep.stat("cross_qv_ratio_im", cratio.imag());
  rep.check_le("drift_residual_z", std::max(std::abs(zf[2]), std::abs(zf[3])), opt.z_max);
  rep.check_le("qv_ratio", std::abs(ratio - 1.0), opt.qv_tol);
  rep.check_le("cross_qv_ratio", std::abs(cratio - 1.0), opt.qv_tol);
  return rep;
}

ExperimentReport error_term_scaling(const ProcessSpec& base, const std::vector<int>& n_values,
                                    std::size_t replicas, cplx w, const RunOptions& run,
                                    double min_exponent) {
  ExperimentReport rep;
  rep.name = "error_term_scaling";
  rep.parameters = {{"kind", to_string(base.kind)}, {"beta", base.beta},  {"n_values", n_values},
                    {"replicas", replicas},         {"w", {w.real(), w.imag()}}, {"seed", run.seed}};
  std::vector<double> logn, loge;
  for (int n : n_values) {
    ProcessSpec sp = base;
    sp.n = n;
    if (sp.kind == ProcessKind::laguerre) sp.m = std::max(sp.m, n);
    const auto s = edge::scaling_for(sp);
    const auto model = dynamics::Model::from_spec(sp);
    std::vector<double> e(replicas);
    for_each_replica(replicas, run.threads, [&](std::size_t r) {
      auto rng = io::derive_stream(run.seed, r, "sample");
      auto st = ensembles::sample(sp, rng);
      e[r] = std::abs(drift_decomposition(model, st.particles, s, sp.beta, w).error());
    });
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / double(replicas);
    rep.stat(fmt_key("mean_abs_error_n", n), mean);
    logn.push_back(std::log(double(n)));
    loge.push_back(std::log(mean));
  }
  const auto f = fit_line(logn, loge);
  rep.stat("decay_exponent", -f.slope);
  rep.stat("decay_exponent_se", f.slope_se);
  rep.check_ge("decay_exponent", -f.slope, min_exponent);
  return rep;
}

// ---------------------------------------------------------------------------

cplx characteristic_point(cplx sqrt_w0, double t) {
  const cplx r = sqrt_w0 - t / 2.0;
  return r * r;
}

std::pair<CharacteristicTrack, ExperimentReport> characteristic_track(
    const dynamics::TrajectoryRecord& traj, const edge::EdgeScaling& s, cplx sqrt_w0, double T,
    double delta) {
  if (!(sqrt_w0.real() > T / 2.0) || !(sqrt_w0.imag() > 0.0))
    throw PreconditionError("characteristic_track: flow exits the domain (need Re sqrt(w0) > T/2, Im > 0)");
  CharacteristicTrack tr;
  tr.w0 = sqrt_w0 * sqrt_w0;
  tr.eta = sqrt_w0.imag();
  double stat = 0, lin = 0;
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    const double t = (traj.times[j] - traj.times.front()) / s.zeta;
    if (t > T * (1 + 1e-12)) break;
    const cplx w = characteristic_point(sqrt_w0, t);
    const double kappa = sqrt_w0.real() - t / 2.0;
    const cplx d = edge::delta_transform(traj.snapshots[j], s, w);
    tr.samples.push_back({t, w, d, kappa});
    stat = std::max(stat, std::abs(d) * kappa * std::pow(tr.eta, delta));
    lin = std::max(lin, std::abs(std::sqrt(w) - (sqrt_w0 - t / 2.0)));
  }
  ExperimentReport rep;
  rep.name = "characteristic_track";
  rep.parameters = {{"sqrt_w0", {sqrt_w0.real(), sqrt_w0.imag()}}, {"T", T}, {"delta", delta}};
  rep.stat("statistic", stat);
  rep.stat("samples", double(tr.samples.size()));
  rep.stat("flow_linearity_error", lin);
  rep.check_le("flow_linearity", lin, 1e-12 * (1 + std::abs(sqrt_w0)));
  return {std::move(tr), std::move(rep)};
}

ExperimentReport characteristic_experiment(const ProcessSpec& spec, cplx sqrt_w0, double T,
                                           double dt, std::size_t every, std::size_t replicas,
                                           double delta, const RunOptions& run) {
  const auto s = edge::scaling_for(spec);
  auto cfg = dynamics::IntegratorConfig::defaults_for(spec);
  cfg.dt = s.zeta * dt;
  const std::size_t steps = dynamics::steps_for(T, dt);
  every = std::max<std::size_t>(every, 1);
  std::vector<double> stat(replicas), lin(replicas);
  for_each_replica(replicas, run.threads, [&](std::size_t r) {
    auto rng = io::derive_stream(run.seed, r, "sample");
    auto st = ensembles::sample(spec, rng);
    const dynamics::NoiseBlock nb(io::derive_stream(run.seed, r, "noise"), steps, st.particles.size());
    dynamics::TrajectoryRecord tr;
    auto obs = [&](std::size_t k, const dynamics::SdeState& x) {
      if (k % every && k != steps) return;
      tr.times.push_back(x.t);
      tr.snapshots.push_back(x.particles);
    };
    dynamics::run(spec, st, steps, cfg, nb, obs, &tr.log);
    auto [track, rep] = characteristic_track(tr, s, sqrt_w0, T, delta);
    stat[r] = rep.statistics["statistic"].get<double>();
    lin[r] = rep.statistics["flow_linearity_error"].get<double>();
  });
  ExperimentReport rep;
  rep.name = "characteristic_experiment";
  rep.parameters = {{"kind", to_string(spec.kind)},
                    {"n", spec.n},
                    {"beta", spec.beta},
                    {"sqrt_w0", {sqrt_w0.real(), sqrt_w0.imag()}},
                    {"T", T},
                    {"dt", dt},
                    {"replicas", replicas},
                    {"delta", delta},
                    {"seed", run.seed}};
  rep.stat("statistic_max", *std::max_element(stat.begin(), stat.end()));
  rep.stat("statistic_median", quantile_of(stat, 0.5));
  const double l = *std::max_element(lin.begin(), lin.end());
  rep.stat("flow_linearity_error", l);
  rep.check_le("flow_linearity", l, 1e-12 * (1 + std::abs(sqrt_w0)));
  return rep;
}

// ---------------------------------------------------------------------------

GapTrace min_gap_trace(const ProcessSpec& spec, const dynamics::SdeState& state0, double T,
                       const dynamics::IntegratorConfig& cfg, const dynamics::NoiseBlock& noise,
                       dynamics::EventLog* log) {
  GapTrace g;
  g.dt = cfg.dt;
  const std::size_t steps = dynamics::steps_for(T, cfg.dt);
  g.min_gap.reserve(steps);
  auto obs = [&](std::size_t k, const dynamics::SdeState& s) {
    if (k == 0) return;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < s.particles.size(); ++i)
      m = std::min(m, s.particles[i] - s.particles[i + 1]);
    g.min_gap.push_back(m);
  };
  dynamics::run(spec, state0, steps, cfg, noise, obs, log);
  return g;
}

ExperimentReport collision_measure(const std::vector<GapTrace>& traces,
                                   const std::vector<double>& thresholds) {
  if (traces.empty() || thresholds.empty())
    throw PreconditionError("collision_measure: need traces and thresholds");
  ExperimentReport rep;
  rep.name = "collision_measure";
  rep.parameters = {{"thresholds", thresholds}, {"replicas", traces.size()}};
  std::vector<double> lx, ly;
  double smallest = kInf, at_smallest = 0;
  for (double eps : thresholds) {
    double meas = 0;
    for (const auto& g : traces) {
      std::size_t c = 0;
      for (double v : g.min_gap) c += v <= eps;
      meas += g.dt * double(c);
    }
    meas /= double(traces.size());
    rep.stat(fmt_key("measure_", eps), meas);
    if (meas > 0) {
      lx.push_back(std::log(eps));
      ly.push_back(std::log(meas));
    }
    if (eps < smallest) {
      smallest = eps;
      at_smallest = meas;
    }
  }
  if (lx.size() >= 2) {
    const auto f = fit_line(lx, ly);
    rep.stat("fitted_exponent", f.slope);
    rep.stat("fitted_exponent_se", f.slope_se);
    rep.check("positive_exponent", f.slope, 1e-12, kInf);
  } else {
    rep.stat_null("fitted_exponent");
    rep.check_le("measure_at_smallest_threshold", at_smallest, 0.0);
  }
  return rep;
}

ExperimentReport collision_experiment(const ProcessSpec& spec, double T, std::size_t replicas,
                                      const std::vector<double>& thresholds,
                                      const dynamics::IntegratorConfig& cfg, const RunOptions& run) {
  std::vector<GapTrace> traces(replicas);
  std::vector<std::size_t> sorts(replicas);
  const std::size_t steps = dynamics::steps_for(T, cfg.dt);
  for_each_replica(replicas, run.threads, [&](std::size_t r) {
    auto rng = io::derive_stream(run.seed, r, "sample");
    auto st = ensembles::sample(spec, rng);
    const dynamics::NoiseBlock nb(io::derive_stream(run.seed, r, "noise"), steps, st.particles.size());
    dynamics::EventLog log;
    traces[r] = min_gap_trace(spec, st, T, cfg, nb, &log);
    sorts[r] = log.sorts;
  });
  auto rep = collision_measure(traces, thresholds);
  rep.parameters["kind"] = to_string(spec.kind);
  rep.parameters["n"] = spec.n;
  rep.parameters["beta"] = spec.beta;
  rep.parameters["T"] = T;
  rep.parameters["dt"] = cfg.dt;
  rep.parameters["seed"] = run.seed;
  rep.stat("sort_events", double(std::accumulate(sorts.begin(), sorts.end(), std::size_t(0))));
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport coupling_contraction(const ProcessSpec& spec, const CouplingOptions& opt,
                                      const dynamics::IntegratorConfig& cfg0, const RunOptions& run) {
  const auto s = edge::scaling_for(spec);
  const auto model = dynamics::Model::from_spec(spec);
  auto cfg = cfg0;
  const std::size_t steps = dynamics::steps_for(opt.T * s.zeta, cfg.dt);
  const std::size_t k = opt.top_k;
  auto dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t i = 0; i < std::min({k, a.size(), b.size()}); ++i)
      d = std::max(d, std::abs(a[i] - b[i]) / s.chi);
    return d;
  };
  struct Out {
    double d0 = 0, dT = 0;
    std::size_t dom_ok = 0, dom_all_ok = 0, dom_total = 0;
  };
  const std::size_t R = std::max(opt.replicas, opt.domination_replicas);
  std::vector<Out> out(R);
  for_each_replica(R, run.threads, [&](std::size_t r) {
    auto ra = io::derive_stream(run.seed, r, "sample_a");
    auto rb = io::derive_stream(run.seed, r, "sample_b");
    auto x = ensembles::sample(spec, ra);
    auto y = ensembles::sample(spec, rb);
    const dynamics::NoiseBlock nb(io::derive_stream(run.seed, r, "noise"), steps, x.particles.size());
    Out o;
    if (r < opt.replicas) {
      o.d0 = dist(x.particles, y.particles);
      auto fx = dynamics::run(spec, x, steps, cfg, nb, nullptr);
      auto fy = dynamics::run(spec, y, steps, cfg, nb, nullptr);
      o.dT = dist(fx.particles, fy.particles);
    }
    if (r < opt.domination_replicas) {
      dynamics::SdeState lo = x, hi = x;
      for (std::size_t i = 0; i < x.particles.size(); ++i) {
        lo.particles[i] = std::min(x.particles[i], y.particles[i]);
        hi.particles[i] = std::max(x.particles[i], y.particles[i]);
      }
      for (std::size_t st = 0; st < steps; ++st) {
        const auto row = dynamics::NoiseRow::from_block(nb, st);
        lo = dynamics::step_model(model, lo, cfg, row);
        hi = dynamics::step_model(model, hi, cfg, row);
        bool ok = true, ok_all = true;
        for (std::size_t i = 0; i < lo.particles.size(); ++i) {
          const bool b = lo.particles[i] <= hi.particles[i];
          ok_all = ok_all && b;
          if (i < k) ok = ok && b;
        }
        o.dom_ok += ok;
        o.dom_all_ok += ok_all;
        ++o.dom_total;
      }
    }
    out[r] = o;
  });
  std::size_t contracted = 0, dom_ok = 0, dom_all_ok = 0, dom_total = 0;
  double ratio_sum = 0;
  for (std::size_t r = 0; r < R; ++r) {
    if (r < opt.replicas) {
      contracted += out[r].dT < out[r].d0;
      ratio_sum += out[r].dT / out[r].d0;
    }
    dom_ok += out[r].dom_ok;
    dom_all_ok += out[r].dom_all_ok;
    dom_total += out[r].dom_total;
  }
  ExperimentReport rep;
  rep.name = "coupling_contraction";
  rep.parameters = {{"kind", to_string(spec.kind)}, {"n", spec.n},      {"beta", spec.beta},
                    {"top_k", k},                   {"T", opt.T},       {"dt", cfg.dt},
                    {"replicas", opt.replicas},     {"domination_replicas", opt.domination_replicas},
                    {"seed", run.seed}};
  if (opt.replicas > 0) {
    const double frac = double(contracted) / double(opt.replicas);
    rep.stat("contraction_fraction", frac);
    rep.stat("mean_distance_ratio", ratio_sum / double(opt.replicas));
    rep.check_ge("contraction_fraction", frac, opt.contraction_min);
  }
  if (dom_total > 0) {
    const double frac = double(dom_ok) / double(dom_total);
    rep.stat("domination_fraction", frac);
    rep.stat("domination_fraction_all_particles", double(dom_all_ok) / double(dom_total));
    rep.check_ge("domination_fraction", frac, opt.domination_min);
  }
  return rep;
}

}  // namespace airyline::experiments
