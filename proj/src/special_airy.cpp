#include "airyline/special_airy.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "airyline/errors.hpp"
#include "airyline/quadrature.hpp"

namespace airyline::airy {

namespace {

constexpr double kPi = std::numbers::pi;
const double kTwoSqrtPi = 2.0 * std::sqrt(kPi);
const cplx kOmega{-0.5, 0.86602540378443864676};  // exp(2 pi i/3)

// One Taylor step of y'' = z y from z0 to z0 + h.
void taylor_step(cplx z0, cplx y0, cplx dy0, cplx h, cplx& y1, cplx& dy1) {
  cplx cm1 = 0.0, c0 = y0, c1 = dy0;
  cplx hk = h;  // h^1
  cplx sum = c0 + c1 * h;
  cplx dsum = c1;
  const double scale = std::max(std::abs(y0), std::abs(dy0) * std::abs(h)) + 1e-300;
  int small = 0;
  for (int k = 0; k < 400; ++k) {
    cplx c2 = (z0 * c0 + cm1) / double((k + 2) * (k + 1));
    cplx dterm = double(k + 2) * c2 * hk;  // (k+2) c_{k+2} h^{k+1}
    hk *= h;
    cplx term = c2 * hk;
    sum += term;
    dsum += dterm;
    if (std::abs(term) <= 1e-18 * (std::abs(sum) + scale) &&
        std::abs(dterm) * std::abs(h) <= 1e-18 * (std::abs(dsum) * std::abs(h) + scale)) {
      if (++small >= 3) break;
    } else {
      small = 0;
    }
    cm1 = c0;
    c0 = c1;
    c1 = c2;
  }
  y1 = sum;
  dy1 = dsum;
}

// Asymptotic expansion for |arg z| <= 2 pi/3, scaled by exp(zeta).
ScaledAiryValue asymptotic_principal(cplx z) {
  const cplx sz = std::sqrt(z);
  const cplx zeta = (2.0 / 3.0) * z * sz;
  const cplx z14 = std::sqrt(sz);
  cplx c = 1.0;
  cplx su = 1.0, sv = 1.0;
  double prev = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double kk = k;
    cplx cn = c * ((kk + 5.0 / 6.0) * (kk + 1.0 / 6.0) / (kk + 1.0)) / (-2.0 * zeta);
    const double mag = std::abs(cn);
    if (mag >= prev) break;  // optimal truncation
    const double k1 = kk + 1.0;
    su += cn;
    sv += cn * ((1.0 + 6.0 * k1) / (1.0 - 6.0 * k1));
    c = cn;
    prev = mag;
    if (mag < 1e-18) break;
  }
  ScaledAiryValue r;
  r.value = su / (kTwoSqrtPi * z14);
  r.derivative = -z14 * sv / kTwoSqrtPi;
  r.exponent = -zeta;
  r.method = AiryMethod::asymptotic;
  return r;
}

// Asymptotic regime for Im z >= 0 (|z| large).
ScaledAiryValue asymptotic_upper(cplx z) {
  if (std::arg(z) <= 2.0 * kPi / 3.0) return asymptotic_principal(z);
  // Ai(z) = -w Ai(w z) - w^2 Ai(w^2 z),  Ai'(z) = -w^2 Ai'(w z) - w Ai'(w^2 z)
  const cplx w1 = kOmega, w2 = kOmega * kOmega;
  ScaledAiryValue a = asymptotic_principal(w1 * z);
  ScaledAiryValue b = asymptotic_principal(w2 * z);
  cplx e = a.exponent.real() >= b.exponent.real() ? a.exponent : b.exponent;
  cplx fa = std::exp(a.exponent - e), fb = std::exp(b.exponent - e);
  ScaledAiryValue r;
  r.value = -w1 * a.value * fa - w2 * b.value * fb;
  r.derivative = -w2 * a.derivative * fa - w1 * b.derivative * fb;
  r.exponent = e;
  r.method = AiryMethod::asymptotic;
  return r;
}

// March y'' = z y along the segment from `from` to `to`, steps <= hmax.
void march(cplx from, cplx to, cplx& y, cplx& dy, double hmax) {
  const cplx d = to - from;
  const double len = std::abs(d);
  if (len == 0.0) return;
  const int steps = std::max(1, int(std::ceil(len / hmax)));
  const cplx h = d / double(steps);
  cplx z = from;
  for (int s = 0; s < steps; ++s) {
    cplx y1, dy1;
    taylor_step(z, y, dy, h, y1, dy1);
    y = y1;
    dy = dy1;
    z = from + double(s + 1) * h;
  }
}

ScaledAiryValue eval_upper(cplx z) {
  const double r = std::abs(z);
  ScaledAiryValue out;
  out.exponent = 0.0;
  if (r <= kSeriesRadius) {
    taylor_step(0.0, kAi0, kAip0, z, out.value, out.derivative);
    out.method = AiryMethod::series;
    return out;
  }
  if (r >= kAsymptoticRadius) return asymptotic_upper(z);
  const double th = std::arg(z);
  const cplx dir = std::polar(1.0, th);
  cplx y, dy;
  if (th <= kPi / 3.0) {
    // Ai is recessive outward here: integrate inward from the asymptotic circle.
    const cplx start = kAsymptoticRadius * dir;
    ScaledAiryValue s = asymptotic_principal(start);
    const cplx f = std::exp(s.exponent);
    y = s.value * f;
    dy = s.derivative * f;
    march(start, z, y, dy, 0.25);
  } else {
    const cplx start = kSeriesRadius * dir;
    taylor_step(0.0, kAi0, kAip0, start, y, dy);
    march(start, z, y, dy, 0.25);
  }
  out.value = y;
  out.derivative = dy;
  out.method = AiryMethod::taylor;
  return out;
}

}  // namespace

const char* to_string(AiryMethod m) noexcept {
  switch (m) {
    case AiryMethod::series: return "series";
    case AiryMethod::taylor: return "taylor";
    case AiryMethod::asymptotic: return "asymptotic";
  }
  return "?";
}

double ScaledAiryValue::log_abs() const { return std::log(std::abs(value)) + exponent.real(); }
double ScaledAiryValue::phase() const {
  return std::remainder(std::arg(value) + exponent.imag(), 2.0 * kPi);
}

ScaledAiryValue airy_eval_scaled(cplx w) {
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
    throw NumericalError("airy_eval: non-finite argument");
  const bool lower = std::signbit(w.imag()) && w.imag() != 0.0;
  ScaledAiryValue r = eval_upper(lower ? std::conj(w) : w);
  if (lower) {
    r.value = std::conj(r.value);
    r.derivative = std::conj(r.derivative);
    r.exponent = std::conj(r.exponent);
  } else if (w.imag() == 0.0) {
    // Real axis: the function is real; scale factor may carry a phase of pi.
    cplx f = std::exp(cplx(0.0, r.exponent.imag()));
    r.value = cplx((r.value * f).real(), 0.0);
    r.derivative = cplx((r.derivative * f).real(), 0.0);
    r.exponent = cplx(r.exponent.real(), 0.0);
  }
  return r;
}

AiryValue airy_eval(cplx w) {
  ScaledAiryValue s = airy_eval_scaled(w);
  if (std::abs(s.exponent.real()) > 700.0) {
    std::ostringstream os;
    os << "airy_eval: exp(-2/3 w^{3/2}) out of range at w=" << w << "; use airy_eval_scaled";
    throw AiryRangeError(os.str());
  }
  if (s.exponent == cplx(0.0)) return {s.value, s.derivative, s.method};
  const cplx f = std::exp(s.exponent);
  AiryValue v{s.value * f, s.derivative * f, s.method};
  if (w.imag() == 0.0) {
    v.value = cplx(v.value.real(), 0.0);
    v.derivative = cplx(v.derivative.real(), 0.0);
  }
  return v;
}

double zero_profile(double s) {
  const double t = 3.0 * kPi * (4.0 * s - 1.0) / 8.0;
  return -std::cbrt(t * t);
}

double zero_asymptotic_guess(std::size_t i) {
  const double t = 3.0 * kPi * (4.0 * double(i) - 1.0) / 8.0;
  const double t2 = 1.0 / (t * t);
  return -std::cbrt(t * t) *
         (1.0 + t2 * (5.0 / 48.0 + t2 * (-5.0 / 36.0 + t2 * (77125.0 / 82944.0))));
}

namespace {

double ai_real(double x) { return airy_eval(cplx(x, 0.0)).value.real(); }

// Bracket [lo, hi] containing a_i with a sign change.
void bracket_zero(std::size_t i, double& lo, double& hi) {
  const double g = zero_asymptotic_guess(i);
  double half = 0.5 * kPi / std::sqrt(std::max(1.0, -g));
  hi = std::min(g + half, -0.5);
  lo = g - half;
  for (int tries = 0; tries < 60; ++tries) {
    if (ai_real(lo) * ai_real(hi) <= 0.0) return;
    half *= 0.7;
    lo = g - half;
    hi = std::min(g + half, -0.5);
  }
}

}  // namespace

double airy_zero(std::size_t i) {
  if (i == 0) throw PreconditionError("airy_zero: index is 1-based");
  double lo, hi;
  bracket_zero(i, lo, hi);
  double flo = ai_real(lo);
  double x = zero_asymptotic_guess(i);
  if (x <= lo || x >= hi) x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    AiryValue v = airy_eval(cplx(x, 0.0));
    const double f = v.value.real(), df = v.derivative.real();
    if (f == 0.0) return x;
    if ((f < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = f;
    } else {
      hi = x;
    }
    double xn = x - f / df;
    if (!(xn > lo && xn < hi) || !std::isfinite(xn)) xn = 0.5 * (lo + hi);
    const double step = std::abs(xn - x);
    x = xn;
    if (step <= 4e-16 * std::abs(x) || hi - lo <= 4e-16 * std::abs(x)) break;
  }
  return x;
}

ZeroEnvelope AiryZeroTable::envelope() const {
  ZeroEnvelope e{0.0, 0};
  for (std::size_t k = 0; k < zeros_.size(); ++k) {
    const double i = double(k + 1);
    const double lead = std::cbrt(std::pow(1.5 * kPi * i, 2.0));
    const double v = std::abs(zeros_[k] + lead) * std::cbrt(i);
    if (v > e.constant) {
      e.constant = v;
      e.argmax = k + 1;
    }
  }
  return e;
}

AiryZeroTable airy_zeros(std::size_t count) {
  if (count == 0) throw PreconditionError("airy_zeros: count must be >= 1");
  std::vector<double> z(count);
  for (std::size_t i = 1; i <= count; ++i) z[i - 1] = airy_zero(i);
  return AiryZeroTable(std::move(z));
}

std::shared_ptr<const AiryZeroTable> shared_zero_table(std::size_t min_count) {
  static std::mutex mu;
  static std::shared_ptr<const AiryZeroTable> table;
  std::lock_guard<std::mutex> lock(mu);
  if (!table || table->count() < min_count) {
    std::size_t n = std::max<std::size_t>(min_count, table ? 2 * table->count() : 1024);
    std::vector<double> z = table ? table->zeros() : std::vector<double>{};
    z.reserve(n);
    for (std::size_t i = z.size() + 1; i <= n; ++i) z.push_back(airy_zero(i));
    table = std::make_shared<const AiryZeroTable>(std::move(z));
  }
  return table;
}

namespace {

// Index (1-based) of the zero nearest to x < 0, from the asymptotic inverse.
std::size_t nearest_zero_index(double x, double* zero_out) {
  const double t = (2.0 / 3.0) * std::pow(-x, 1.5);
  long est = std::lround(t / kPi + 0.25);
  std::size_t best = 1;
  double bestd = 1e300, bestz = 0.0;
  for (long i = std::max(1L, est - 1); i <= est + 1; ++i) {
    const double z = airy_zero(std::size_t(i));
    if (std::abs(z - x) < bestd) {
      bestd = std::abs(z - x);
      best = std::size_t(i);
      bestz = z;
    }
  }
  if (zero_out) *zero_out = bestz;
  return best;
}

}  // namespace

cplx airy_log_derivative(cplx w, double pole_tol) {
  if (std::abs(w.imag()) < pole_tol && w.real() < -1.0) {
    double z;
    std::size_t idx = nearest_zero_index(w.real(), &z);
    const double d = std::abs(w - cplx(z, 0.0));
    if (d < pole_tol) {
      std::ostringstream os;
      os << "airy_log_derivative: w=" << w << " within " << d << " of zero a_" << idx;
      throw PoleProximityError(idx, d, os.str());
    }
  }
  ScaledAiryValue s = airy_eval_scaled(w);
  cplx r = -s.derivative / s.value;
  if (w.imag() == 0.0) r = cplx(r.real(), 0.0);
  return r;
}

namespace {

// x-derivative of f_k(x) = k!/(x-w)^{k+1} (k >= 1), f_0(x) = 1/(x-w) - 1/x.
double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

cplx dfk(cplx w, double x, int k) {
  if (k == 0) return -1.0 / ((x - w) * (x - w)) + 1.0 / (x * x);
  return -factorial(k + 1) / std::pow(x - w, k + 2);
}

// d/ds F(s) with F(s) = f_k(g(s)), g the leading-order zero profile.
cplx dF(cplx w, double s, int k) {
  const double x = zero_profile(s);
  const double gp = -kPi / std::sqrt(-x);
  return dfk(w, x, k) * gp;
}

}  // namespace

cplx airy_tail_sum(cplx w, std::size_t N, int k, int tail_order, double* error_estimate) {
  if (error_estimate) *error_estimate = 0.0;
  if (tail_order <= 0) return 0.0;
  const double s0 = double(N) + 0.5;
  const double U = std::sqrt(-zero_profile(s0));
  cplx tail;
  if (k == 0) {
    const cplx sw = std::sqrt(w);
    tail = (w == cplx(0.0)) ? cplx(0.0) : (2.0 / kPi) * sw * std::atan(sw / U);
  } else {
    // (-1)^{k+1} k! (2/pi) int_U^inf u^2/(u^2+w)^{k+1} du, with u = U/t.
    const int m = k + 1;
    auto integrand = [&](double t) -> cplx {
      return U * U * U * std::pow(t, 2 * m - 4) / std::pow(U * U + w * t * t, m);
    };
    auto res = quad::integrate_complex(integrand, 0.0, 1.0, 1e-15, 1e-13);
    tail = ((k % 2 == 1) ? 1.0 : -1.0) * factorial(k) * (2.0 / kPi) * res.value;
  }
  // Zero-location correction: a(s) - g(s) ~ -(5/48) u^{-4} with u^2 = -g(s).
  auto dcorr = [&](double t) -> cplx {
    if (t == 0.0) return 0.0;
    const double x = -U * U / (t * t);
    return dfk(w, x, k);
  };
  auto dres = quad::integrate_complex(dcorr, 0.0, 1.0, 1e-17, 1e-12);
  const cplx delta_term = -(5.0 / (24.0 * kPi)) * dres.value / U;
  tail += delta_term;
  if (tail_order >= 2) tail += dF(w, s0, k) / 24.0;
  if (error_estimate) {
    const cplx d3 = dF(w, s0 + 1.0, k) - 2.0 * dF(w, s0, k) + dF(w, s0 - 1.0, k);
    const double t = 3.0 * kPi * (4.0 * s0 - 1.0) / 8.0;
    double est = (7.0 / 5760.0) * std::abs(d3) + 1.5 * std::abs(delta_term) / (t * t);
    if (tail_order < 2) est += std::abs(dF(w, s0, k)) / 24.0;
    est += dres.error + 1e-16 * std::abs(tail);
    *error_estimate = est;
  }
  return tail;
}

cplx weierstrass_sum(cplx w, const AiryZeroTable& zeros, int tail_order, double tail_tol,
                     double* error_estimate) {
  const auto& a = zeros.zeros();
  const std::size_t N = a.size();
  if (std::abs(w.imag()) < 1e-8 && N > 0) {
    // nearest tabulated zero (table is decreasing)
    auto it = std::lower_bound(a.begin(), a.end(), w.real(), std::greater<double>());
    for (auto j : {it - a.begin() - 1, it - a.begin()}) {
      if (j < 0 || std::size_t(j) >= N) continue;
      const double d = std::abs(w - a[std::size_t(j)]);
      if (d < 1e-8) {
        std::ostringstream os;
        os << "weierstrass_sum: w=" << w << " within " << d << " of zero a_" << (j + 1);
        throw PoleProximityError(std::size_t(j) + 1, d, os.str());
      }
    }
  }
  cplx s = 0.0;
  for (std::size_t i = N; i-- > 0;) s += w / (a[i] * (a[i] - w));
  double est = 0.0;
  cplx tail = airy_tail_sum(w, N, 0, tail_order, &est);
  if (error_estimate) *error_estimate = est;
  if (tail_order > 0 && est > tail_tol) {
    std::ostringstream os;
    os << "weierstrass_sum: tail estimate " << est << " exceeds " << tail_tol << " at w=" << w
       << " with " << N << " zeros";
    throw InsufficientTableError(est, tail_tol, os.str());
  }
  return s + tail + kLogDerivAt0;
}

}  // namespace airyline::airy
