#include "airyline/ensembles.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "airyline/edge_scaling.hpp"
#include "airyline/errors.hpp"
#include "airyline/quadrature.hpp"

namespace airyline::ensembles {

namespace {

constexpr double kPi = std::numbers::pi;

void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    std::ostringstream os;
    os << routine << " failed with info=" << info;
    throw NumericalError(os.str());
  }
}

void gaussian_tridiagonal(int n, double beta, io::Stream& rng, std::vector<double>& d,
                          std::vector<double>& e) {
  if (n < 1) throw ConfigError("n", "must be >= 1");
  if (!(beta > 0.0)) throw ConfigError("beta", "must be > 0");
  d.resize(n);
  e.assign(std::max(n - 1, 1), 0.0);
  const double s = std::sqrt(2.0 / beta), sb = 1.0 / std::sqrt(beta);
  for (int k = 0; k < n; ++k) d[k] = s * rng.normal();
  for (int k = 0; k + 1 < n; ++k) e[k] = sb * rng.chi(beta * double(n - 1 - k));
}

void laguerre_bidiagonal(int n, int m, double beta, io::Stream& rng, std::vector<double>& d,
                         std::vector<double>& e) {
  if (n < 1) throw ConfigError("n", "must be >= 1");
  if (m < n) throw ConfigError("m", "constraint m>=n violated");
  if (!(beta > 0.0)) throw ConfigError("beta", "must be > 0");
  d.resize(n);
  e.assign(std::max(n - 1, 1), 0.0);
  for (int i = 0; i < n; ++i) d[i] = rng.chi(beta * double(m - i));
  for (int i = 0; i + 1 < n; ++i) e[i] = rng.chi(beta * double(n - 1 - i));
}

// Largest k eigenvalues of a symmetric tridiagonal matrix, descending.
std::vector<double> tridiagonal_top_k(std::vector<double>& d, std::vector<double>& e, int k) {
  const lapack_int n = lapack_int(d.size());
  k = std::clamp(k, 1, int(n));
  lapack_int found = 0, nsplit = 0;
  std::vector<double> w(n);
  std::vector<lapack_int> iblock(n), isplit(n);
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  check_info(LAPACKE_dstebz('I', 'E', n, 0.0, 0.0, n - k + 1, n, abstol, d.data(), e.data(),
                            &found, &nsplit, w.data(), iblock.data(), isplit.data()),
             "dstebz");
  std::vector<double> out(w.begin(), w.begin() + found);
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

}  // namespace

ParticleState sample_gaussian_beta(int n, double beta, io::Stream& rng) {
  std::vector<double> d, e;
  gaussian_tridiagonal(n, beta, rng, d, e);
  check_info(LAPACKE_dstev(LAPACK_COL_MAJOR, 'N', n, d.data(), e.data(), nullptr, 1), "dstev");
  std::sort(d.begin(), d.end(), std::greater<double>());
  return {0.0, std::move(d), dynamics::Constraint::none};
}

std::vector<double> gaussian_top_k(int n, double beta, int k, io::Stream& rng) {
  std::vector<double> d, e;
  gaussian_tridiagonal(n, beta, rng, d, e);
  return tridiagonal_top_k(d, e, k);
}

ParticleState sample_laguerre_beta(int n, int m, double beta, io::Stream& rng) {
  std::vector<double> d, e;
  laguerre_bidiagonal(n, m, beta, rng, d, e);
  check_info(LAPACKE_dbdsqr(LAPACK_COL_MAJOR, 'L', n, 0, 0, 0, d.data(), e.data(), nullptr, 1,
                            nullptr, 1, nullptr, 1),
             "dbdsqr");
  for (double& s : d) s = s * s / beta;
  std::sort(d.begin(), d.end(), std::greater<double>());
  // keep strict positivity for the process state
  for (double& s : d) s = std::max(s, std::numeric_limits<double>::min());
  return {0.0, std::move(d), dynamics::Constraint::positive};
}

std::vector<double> laguerre_top_k(int n, int m, double beta, int k, io::Stream& rng) {
  std::vector<double> d, e;
  laguerre_bidiagonal(n, m, beta, rng, d, e);
  // B B^T for lower bidiagonal B
  std::vector<double> td(n), te(std::max(n - 1, 1), 0.0);
  for (int i = 0; i < n; ++i) td[i] = d[i] * d[i] + (i > 0 ? e[i - 1] * e[i - 1] : 0.0);
  for (int i = 0; i + 1 < n; ++i) te[i] = e[i] * d[i];
  auto top = tridiagonal_top_k(td, te, k);
  for (double& x : top) x /= beta;
  return top;
}

double default_burnin(const ProcessSpec& spec) {
  return spec.kind == ProcessKind::jacobi ? 10.0 / double(spec.m) : 10.0;
}

namespace {

ParticleState burn_in(const ProcessSpec& spec, std::vector<double> x0, io::Stream& rng,
                      const BurnInOptions& opt, BurnInReport* report) {
  auto cfg = opt.use_default_dt ? dynamics::IntegratorConfig::defaults_for(spec) : opt.cfg;
  if (opt.use_default_dt) {
    cfg.max_retries = opt.cfg.max_retries;
    cfg.scheme = opt.cfg.scheme;
    cfg.fail_on_exhaust = opt.cfg.fail_on_exhaust;
  }
  const double T = opt.burnin >= 0.0 ? opt.burnin : default_burnin(spec);
  const std::size_t steps = T > 0.0 ? dynamics::steps_for(T, cfg.dt) : 0;
  dynamics::SdeState s{0.0, std::move(x0), dynamics::constraint_for(spec)};
  BurnInReport rep;
  rep.burnin = T;
  rep.steps = steps;
  std::vector<double> trace;
  dynamics::Observer obs;
  if (opt.diagnostic) {
    trace.reserve(steps / 2 + 1);
    obs = [&](std::size_t k, const dynamics::SdeState& st) {
      if (k > steps / 2) trace.push_back(st.particles.front());
    };
  }
  if (steps > 0) {
    const dynamics::NoiseBlock nb(rng.child("burnin"), steps, s.particles.size());
    s = dynamics::run(spec, s, steps, cfg, nb, obs, &rep.log);
  }
  if (opt.diagnostic && trace.size() >= 4) {
    const std::size_t L = trace.size() / 2;
    rep.rhat = gelman_rubin({std::vector<double>(trace.begin(), trace.begin() + L),
                             std::vector<double>(trace.begin() + L, trace.begin() + 2 * L)});
  }
  if (report) *report = std::move(rep);
  s.t = 0.0;
  return s;
}

}  // namespace

ParticleState sample_jacobi_beta(int n, int p, int q, double beta, io::Stream& rng,
                                 const BurnInOptions& opt, BurnInReport* report,
                                 JacobiPairing pairing) {
  auto spec = ProcessSpec::jacobi(n, p, q, beta);
  spec.pairing = pairing;
  std::vector<double> x0(n);
  for (int i = 0; i < n; ++i) x0[i] = double(n - i) / double(n + 1);
  return burn_in(spec, std::move(x0), rng, opt, report);
}

ParticleState sample_dbm_general_potential(int n, const PotentialSpec& V, double beta,
                                           io::Stream& rng, const BurnInOptions& opt,
                                           BurnInReport* report) {
  const auto spec = ProcessSpec::dbm(n, V, beta);
  const auto em = edge::equilibrium_measure(V);
  const double sn = std::sqrt(double(n));
  std::vector<double> x0(n);
  for (int i = 0; i < n; ++i) {
    const double u = semicircle_quantile((double(n - i) - 0.5) / double(n));  // in [-2, 2]
    x0[i] = sn * (em.A + (u + 2.0) / 4.0 * (em.B - em.A));
  }
  return burn_in(spec, std::move(x0), rng, opt, report);
}

ParticleState sample(const ProcessSpec& spec, io::Stream& rng, const BurnInOptions& opt) {
  spec.validate();
  switch (spec.kind) {
    case ProcessKind::dbm:
      if (spec.V.is_gaussian()) return sample_gaussian_beta(spec.n, spec.beta, rng);
      return sample_dbm_general_potential(spec.n, spec.V, spec.beta, rng, opt);
    case ProcessKind::laguerre:
      return sample_laguerre_beta(spec.n, spec.m, spec.beta, rng);
    case ProcessKind::jacobi:
      return sample_jacobi_beta(spec.n, spec.p, spec.q, spec.beta, rng, opt, nullptr, spec.pairing);
  }
  throw ConfigError("kind", "unknown process kind");
}

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * kPi) + std::asin(x / 2.0) / kPi;
}

double semicircle_quantile(double u) {
  if (u <= 0.0) return -2.0;
  if (u >= 1.0) return 2.0;
  // bisection in the angle x = -2 cos(t): F = (t - sin t cos t)/pi is increasing
  double lo = 0.0, hi = kPi;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((mid - std::sin(mid) * std::cos(mid)) / kPi < u ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  return -2.0 * std::cos(t);
}

ArcsineCdf::ArcsineCdf(std::function<double(double)> g, double a, double b, std::size_t panels)
    : a_(a), b_(b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  auto f = [&](double t) {
    const double s = std::sin(t);
    return g(c - h * std::cos(t)) * h * h * s * s;
  };
  cum_.assign(panels + 1, 0.0);
  for (std::size_t k = 0; k < panels; ++k) {
    const double t0 = kPi * double(k) / double(panels), t1 = kPi * double(k + 1) / double(panels);
    cum_[k + 1] = cum_[k] + quad::integrate(f, t0, t1, 1e-15, 1e-13).value;
  }
  mass_ = cum_.back();
  for (double& v : cum_) v /= mass_;
}

double ArcsineCdf::operator()(double x) const {
  if (x <= a_) return 0.0;
  if (x >= b_) return 1.0;
  const double c = 0.5 * (a_ + b_), h = 0.5 * (b_ - a_);
  const double t = std::acos(std::clamp((c - x) / h, -1.0, 1.0));
  const std::size_t P = cum_.size() - 1;
  const double pos = t / kPi * double(P);
  const std::size_t k = std::min(std::size_t(pos), P - 1);
  const double w = pos - double(k);
  return (1.0 - w) * cum_[k] + w * cum_[k + 1];
}

ArcsineCdf marchenko_pastur_cdf(double n, double m) {
  const double a = std::pow(std::sqrt(m) - std::sqrt(n), 2), b = std::pow(std::sqrt(m) + std::sqrt(n), 2);
  return ArcsineCdf([](double x) { return 1.0 / (2 * kPi * x); }, a, b);
}

ArcsineCdf jacobi_cdf(double n, double m, double p, double q) {
  const double s1 = std::sqrt(p * (m - n)), s2 = std::sqrt(q * n);
  const double a = std::pow((s1 - s2) / m, 2), b = std::pow((s1 + s2) / m, 2);
  return ArcsineCdf([m](double x) { return m / (2 * kPi * x * (1 - x)); }, a, b);
}

double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw PreconditionError("ks_statistic: empty sample");
  std::sort(x.begin(), x.end());
  const double N = double(x.size());
  double D = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    D = std::max({D, double(i + 1) / N - F, F - double(i) / N});
  }
  return D;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    D = std::max(D, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return D;
}

Moments summarize(const std::vector<double>& x) {
  Moments m;
  m.count = x.size();
  if (x.size() < 2) throw PreconditionError("summarize: need at least 2 values");
  const double N = double(x.size());
  double s = 0;
  for (double v : x) s += v;
  m.mean = s / N;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m.mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m.var = m2 / (N - 1);
  const double c2 = m2 / N;
  m.skew = c2 > 0 ? (m3 / N) / std::pow(c2, 1.5) : 0.0;
  m.se_mean = std::sqrt(m.var / N);
  m.se_var = std::sqrt(std::max(m4 / N - c2 * c2, 0.0) / N);
  return m;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw PreconditionError("gelman_rubin: need >= 2 chains");
  const std::size_t L = chains.front().size();
  if (L < 2) throw PreconditionError("gelman_rubin: chains too short");
  std::vector<double> means;
  double W = 0;
  for (const auto& c : chains) {
    if (c.size() != L) throw PreconditionError("gelman_rubin: chains differ in length");
    const auto mo = summarize(c);
    means.push_back(mo.mean);
    W += mo.var;
  }
  W /= double(chains.size());
  const double Bv = double(L) * summarize(means).var;
  if (!(W > 0)) return 1.0;
  const double V = (double(L) - 1) / double(L) * W + Bv / double(L);
  return std::sqrt(V / W);
}

}  // namespace airyline::ensembles
