#include "airyline/nevanlinna.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "airyline/errors.hpp"
#include "airyline/quadrature.hpp"

namespace airyline::nevanlinna {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

std::shared_ptr<const airy::AiryZeroTable> zeros_for(const NevanlinnaFn& fn) {
  if (fn.representation != Representation::airy_anchored) return nullptr;
  return airy::shared_zero_table(std::max<std::size_t>(fn.measure.size(), 1));
}

// Throws when w is within pole_tol of a particle (or of a tail zero).
void check_poles(const NevanlinnaFn& fn, cplx w) {
  if (std::abs(w.imag()) >= fn.pole_tol) return;
  const auto& x = fn.measure.particles;
  if (!x.empty()) {
    auto it = std::lower_bound(x.begin(), x.end(), w.real(), std::greater<double>());
    std::ptrdiff_t best = -1;
    double bestd = 1e300;
    for (std::ptrdiff_t j : {it - x.begin() - 1, it - x.begin()}) {
      if (j < 0 || std::size_t(j) >= x.size()) continue;
      const double d = std::abs(w - x[std::size_t(j)]);
      if (d < bestd) {
        bestd = d;
        best = j;
      }
    }
    if (best >= 0 && bestd < fn.pole_tol) {
      std::ostringstream os;
      os << "evaluate: w=" << w << " within " << bestd << " of particle " << (best + 1);
      throw PoleProximityError(std::size_t(best) + 1, bestd, os.str());
    }
  }
  if (fn.measure.tail == TailMode::airy_tail && (x.empty() || w.real() < x.back())) {
    try {
      (void)airy::airy_log_derivative(w - fn.measure.tail_shift, fn.pole_tol);
    } catch (const PoleProximityError& e) {
      if (e.index() > x.size()) throw;
    }
  }
}

cplx tail_value(const NevanlinnaFn& fn, cplx w, int k, double* err) {
  if (fn.measure.tail != TailMode::airy_tail) {
    if (err) *err = 0.0;
    return 0.0;
  }
  double est = 0.0;
  cplx t = airy::airy_tail_sum(w - fn.measure.tail_shift, fn.measure.size(), k, 2, &est);
  if (err) *err = est;
  if (est > fn.tail_tol) {
    std::ostringstream os;
    os << "evaluate: Airy tail remainder " << est << " exceeds " << fn.tail_tol << " at w=" << w;
    throw InsufficientTableError(est, fn.tail_tol, os.str());
  }
  return t;
}

}  // namespace

ParticleMeasure ParticleMeasure::from_unsorted(std::vector<double> xs, TailMode tail) {
  std::sort(xs.begin(), xs.end(), std::greater<double>());
  return ParticleMeasure{std::move(xs), tail};
}

ParticleMeasure ParticleMeasure::airy_configuration(std::size_t N, double shift) {
  auto z = airy::shared_zero_table(N);
  ParticleMeasure m;
  m.particles.assign(z->zeros().begin(), z->zeros().begin() + std::ptrdiff_t(N));
  for (double& x : m.particles) x += shift;
  m.tail = TailMode::airy_tail;
  m.tail_shift = shift;
  return m;
}

NevanlinnaFn NevanlinnaFn::plain(ParticleMeasure m, double b, double c) {
  NevanlinnaFn f;
  f.measure = std::move(m);
  f.b = b;
  f.c = c;
  f.representation = Representation::plain;
  validate(f);
  return f;
}

NevanlinnaFn NevanlinnaFn::general(ParticleMeasure m, double b, double c) {
  NevanlinnaFn f = plain(std::move(m), b, c);
  f.representation = Representation::general;
  validate(f);
  return f;
}

NevanlinnaFn NevanlinnaFn::airy_anchored(ParticleMeasure m) {
  NevanlinnaFn f;
  f.measure = std::move(m);
  f.representation = Representation::airy_anchored;
  validate(f);
  return f;
}

void validate(const NevanlinnaFn& fn) {
  if (!(fn.c >= 0.0)) throw PreconditionError("NevanlinnaFn: c must be >= 0");
  if (fn.representation == Representation::airy_anchored && (fn.b != 0.0 || fn.c != 0.0))
    throw PreconditionError("NevanlinnaFn: airy_anchored forces b = c = 0");
  if (fn.measure.tail == TailMode::airy_tail &&
      fn.representation != Representation::airy_anchored)
    throw PreconditionError("NevanlinnaFn: airy_tail requires the airy_anchored representation");
  const auto& x = fn.measure.particles;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] <= x[i - 1]))
      throw PreconditionError("ParticleMeasure: particles must be non-increasing");
}

cplx evaluate(const NevanlinnaFn& fn, cplx w, double* tail_error) {
  check_poles(fn, w);
  const auto& x = fn.measure.particles;
  cplx s = 0.0;
  switch (fn.representation) {
    case Representation::plain:
      for (std::size_t i = x.size(); i-- > 0;) s += 1.0 / (x[i] - w);
      s += fn.b + fn.c * w;
      break;
    case Representation::general:
      for (std::size_t i = x.size(); i-- > 0;) s += 1.0 / (x[i] - w) - x[i] / (1.0 + x[i] * x[i]);
      s += fn.b + fn.c * w;
      break;
    case Representation::airy_anchored: {
      auto z = zeros_for(fn);
      const auto& a = z->zeros();
      for (std::size_t i = x.size(); i-- > 0;) s += 1.0 / (x[i] - w) - 1.0 / a[i];
      s += airy::kLogDerivAt0;
      break;
    }
  }
  s += tail_value(fn, w, 0, tail_error);
  return s;
}

cplx derivative(const NevanlinnaFn& fn, cplx w, int k, double* tail_error) {
  if (k < 1 || k > 4) throw PreconditionError("derivative: order must be in [1, 4]");
  check_poles(fn, w);
  const auto& x = fn.measure.particles;
  const double kf = factorial(k);
  cplx s = 0.0;
  for (std::size_t i = x.size(); i-- > 0;) {
    const cplx d = 1.0 / (x[i] - w);
    cplx p = d;
    for (int j = 0; j < k; ++j) p *= d;
    s += p;
  }
  s *= kf;
  if (k == 1) s += fn.c;
  s += tail_value(fn, w, k, tail_error);
  return s;
}

std::vector<cplx> airy_like_grid(const AiryLikeParams& params, const GridSpec& grid) {
  std::vector<cplx> pts;
  const double rmax = std::sqrt(grid.cap);
  const double lo = 0.02;
  for (std::size_t i = 0; i < grid.n_a; ++i) {
    const double a = lo * std::pow(rmax / lo, double(i) / double(grid.n_a - 1));
    for (std::size_t j = 0; j < grid.n_b; ++j) {
      const double t = double(j + 1) / double(grid.n_b);
      const double b = rmax * std::cbrt(t);  // b^3 uniformly spaced
      const cplx w = cplx(a, b) * cplx(a, b);
      if (std::abs(w) > grid.cap) continue;
      if (w.imag() < params.c_star * std::sqrt(std::max(w.real(), 0.0) + 1.0)) continue;
      pts.push_back(w);
    }
  }
  return pts;
}

AiryLikeReport check_airy_like(const NevanlinnaFn& fn, const AiryLikeParams& params,
                               const GridSpec& grid) {
  if (!(params.frak_d > 0.0 && params.frak_d < 1.0) || !(params.c_star > 0.0))
    throw PreconditionError("AiryLikeParams: need 0 < frak_d < 1 and c_star > 0");
  AiryLikeReport rep;
  const auto& x = fn.measure.particles;
  if (!x.empty()) {
    rep.max_pole = x.front();
  } else if (fn.measure.tail == TailMode::airy_tail) {
    rep.max_pole = airy::airy_zero(1) + fn.measure.tail_shift;
  }
  rep.poles_bounded = rep.max_pole <= params.c_star;
  const auto pts = airy_like_grid(params, grid);
  rep.grid_points = pts.size();
  for (const cplx& w : pts) {
    const cplx sw = std::sqrt(w);
    const double dev = std::abs(evaluate(fn, w) - sw);
    const double scale = std::pow(sw.imag(), 1.0 - params.frak_d) / w.imag();
    const double bound = params.c_star * scale;
    rep.fitted_constant = std::max(rep.fitted_constant, dev / scale);
    if (dev > bound) rep.envelope_violations.push_back({w, dev, bound});
  }
  rep.pass = rep.poles_bounded && rep.envelope_violations.empty();
  return rep;
}

RigidityReport rigidity_check(const ParticleMeasure& m, double K, double delta, double min_K) {
  if (m.particles.empty()) throw PreconditionError("rigidity_check: empty measure");
  if (!(K > min_K)) {
    std::ostringstream os;
    os << "rigidity_check: K must exceed " << min_K;
    throw PreconditionError(os.str());
  }
  auto z = airy::shared_zero_table(m.size());
  RigidityReport r;
  r.argmax = 1;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double v = std::abs(m.particles[i] - (*z)[i + 1]) * std::pow(double(i + 1), delta / 6.0);
    if (v > r.raw_max) {
      r.raw_max = v;
      r.argmax = i + 1;
    }
  }
  r.statistic = r.raw_max / std::pow(K, 4.0);
  return r;
}

double smooth_step(double t, int order) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return order == 0 ? 1.0 : 0.0;
  auto phi = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  auto dphi = [&](double u) { return u > 0.0 ? phi(u) / (u * u) : 0.0; };
  auto d2phi = [&](double u) {
    return u > 0.0 ? phi(u) * (1.0 / (u * u * u * u) - 2.0 / (u * u * u)) : 0.0;
  };
  const double a = phi(t), b = phi(1.0 - t);
  const double S = a + b;
  if (order == 0) return a / S;
  const double ap = dphi(t), bp = -dphi(1.0 - t);
  const double N = ap * b - a * bp;
  const double D = S * S;
  if (order == 1) return N / D;
  const double app = d2phi(t), bpp = d2phi(1.0 - t);
  const double Np = app * b - a * bpp;
  const double Dp = 2.0 * S * (ap + bp);
  return (Np * D - N * Dp) / (D * D);
}

TestFunction smooth_plateau(double a, double b, double taper) {
  TestFunction tf;
  const double L = a - taper, R = b + taper;
  tf.f = [=](double x) {
    if (x <= L || x >= R) return 0.0;
    if (x < a) return smooth_step((x - L) / taper, 0);
    if (x > b) return smooth_step((R - x) / taper, 0);
    return 1.0;
  };
  tf.df = [=](double x) {
    if (x <= L || x >= R) return 0.0;
    if (x < a) return smooth_step((x - L) / taper, 1) / taper;
    if (x > b) return -smooth_step((R - x) / taper, 1) / taper;
    return 0.0;
  };
  tf.d2f = [=](double x) {
    if (x <= L || x >= R) return 0.0;
    if (x < a) return smooth_step((x - L) / taper, 2) / (taper * taper);
    if (x > b) return smooth_step((R - x) / taper, 2) / (taper * taper);
    return 0.0;
  };
  tf.lo = L;
  tf.hi = R;
  tf.breakpoints = {a, b, 0.5 * (L + a), 0.5 * (b + R)};
  return tf;
}

CutoffFunction smooth_cutoff(double y1, double y2) {
  CutoffFunction c;
  const double h = y2 - y1;
  c.chi = [=](double y) { return y <= y1 ? 1.0 : smooth_step((y2 - y) / h, 0); };
  c.dchi = [=](double y) { return y <= y1 ? 0.0 : -smooth_step((y2 - y) / h, 1) / h; };
  c.y_flat = y1;
  c.y_max = y2;
  return c;
}

double hs_integrate(const NevanlinnaFn& fn, const TestFunction& f, const CutoffFunction& chi,
                    const HsOptions& opt, double* error_estimate) {
  // -(1/pi) int [ y f'' chi Im Y + Im((f + i y f') chi' Y) ] dx dy
  std::vector<double> xb = f.breakpoints;
  for (double p : fn.measure.particles)
    if (p > f.lo && p < f.hi) xb.push_back(p);
  double inner_err = 0.0;
  bool inner_ok = true;
  auto inner = [&](double y) -> double {
    const double c = chi.chi(y), dc = chi.dchi(y);
    if (c == 0.0 && dc == 0.0) return 0.0;
    auto g = [&](double x) -> double {
      const double fx = f.f(x), dfx = f.df(x), d2fx = f.d2f(x);
      if (fx == 0.0 && dfx == 0.0 && d2fx == 0.0) return 0.0;
      const cplx Y = evaluate(fn, cplx(x, y));
      double v = y * d2fx * c * Y.imag();
      if (dc != 0.0) v += (cplx(fx, y * dfx) * dc * Y).imag();
      return v;
    };
    auto r = quad::integrate(g, f.lo, f.hi, 0.1 * opt.abs_tol, 0.1 * opt.rel_tol,
                             opt.max_intervals, xb);
    inner_err = std::max(inner_err, r.error);
    inner_ok = inner_ok && r.converged;
    return r.value;
  };
  auto outer = quad::integrate(inner, 0.0, chi.y_max, opt.abs_tol, opt.rel_tol, opt.max_intervals,
                               {chi.y_flat});
  const double err = (outer.error + inner_err * chi.y_max) / kPi;
  if (error_estimate) *error_estimate = err;
  if (!outer.converged || !inner_ok) {
    std::ostringstream os;
    os << "hs_integrate: quadrature did not converge, error estimate " << err;
    throw QuadratureError(err, os.str());
  }
  return -outer.value / kPi;
}

CloseRReport closeR_bound_check(const NevanlinnaFn& fn, double B, double r_min, double r_max,
                                const AiryLikeParams* precondition, std::size_t n_radii,
                                std::size_t n_angles) {
  AiryLikeParams pre = precondition ? *precondition : AiryLikeParams{0.5, B};
  AiryLikeReport ar = check_airy_like(fn, pre);
  if (!ar.pass) {
    std::ostringstream os;
    os << "closeR_bound_check: function is not Airy-like (max pole " << ar.max_pole << ", "
       << ar.envelope_violations.size() << " envelope violations)";
    throw PreconditionError(os.str());
  }
  CloseRReport rep;
  const double r0 = std::max(B, r_min);
  for (std::size_t i = 0; i < n_radii; ++i) {
    const double r = r0 * std::pow(r_max / r0, double(i + 1) / double(n_radii));
    for (std::size_t j = 0; j < n_angles; ++j) {
      const double th = 0.75 * kPi * (double(j) + 0.5) / double(n_angles);
      const cplx w = std::polar(r, th);
      const double v = std::abs(evaluate(fn, w) - std::sqrt(w)) * std::sqrt(r);
      ++rep.samples;
      if (v > rep.statistic) {
        rep.statistic = v;
        rep.argmax = w;
      }
    }
  }
  rep.bounded = rep.statistic <= B;
  return rep;
}

}  // namespace airyline::nevanlinna
