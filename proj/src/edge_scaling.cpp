#include "airyline/edge_scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "airyline/errors.hpp"
#include "airyline/quadrature.hpp"

namespace airyline::edge {

namespace {

constexpr double kPi = std::numbers::pi;

// (V'(z) - V'(x))/(z - x) as an exact polynomial in (z, x).
cplx divided_difference(const std::vector<double>& c, cplx z, double x) {
  cplx total = 0.0;
  for (std::size_t k = 2; k < c.size(); ++k) {
    if (c[k] == 0.0) continue;
    // sum_{j=0}^{k-2} z^j x^{k-2-j}, Horner in z
    cplx s = 0.0;
    double xp = 1.0;
    std::vector<double> xpow(k - 1);
    for (std::size_t j = 0; j + 1 < k; ++j) {
      xpow[j] = xp;
      xp *= x;
    }
    for (std::size_t j = k - 1; j-- > 0;) s = s * z + xpow[k - 2 - j];
    total += double(k) * c[k] * s;
  }
  return total;
}

}  // namespace

EquilibriumMeasure::EquilibriumMeasure(PotentialSpec V, double A_, double B_, std::size_t nodes)
    : A(A_), B(B_), V_(std::move(V)), cos_theta_(quad::ChebyshevGauss(nodes).cos_theta) {
  R_A = r(A) * std::sqrt(B - A);
  R_B = r(B) * std::sqrt(B - A);
}

cplx EquilibriumMeasure::r(cplx z) const {
  const double c = 0.5 * (A + B), h = 0.5 * (B - A);
  cplx s = 0.0;
  for (double u : cos_theta_) s += divided_difference(V_.coeffs(), z, c + h * u);
  // (1/2pi) * (pi/N) * sum
  return s / (2.0 * double(cos_theta_.size()));
}

double EquilibriumMeasure::density(double x) const {
  if (x <= A || x >= B) return 0.0;
  return r(x) / kPi * std::sqrt((x - A) * (B - x));
}

cplx EquilibriumMeasure::m_V(cplx z) const {
  const cplx root = std::sqrt(z - A) * std::sqrt(z - B);
  return 0.5 * (-V_.dV(z) + 2.0 * r(z) * root);
}

double EquilibriumMeasure::cdf(double x) const {
  if (x <= A) return 0.0;
  const double c = 0.5 * (A + B), h = 0.5 * (B - A);
  const double th = x >= B ? kPi : std::acos(std::clamp((c - x) / h, -1.0, 1.0));
  // x = c - h cos(theta): rho dx = (r/pi) h^2 sin^2(theta) dtheta
  auto f = [&](double t) {
    const double s = std::sin(t);
    return r(c - h * std::cos(t)) / kPi * h * h * s * s;
  };
  return quad::integrate(f, 0.0, th, 1e-14, 1e-13).value;
}

double EquilibriumMeasure::quantile(double u) const {
  double lo = A, hi = B;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

EquilibriumMeasure equilibrium_measure(const PotentialSpec& V, const EquilibriumOptions& opt) {
  V.validate();
  const quad::ChebyshevGauss cg(opt.nodes);
  const double N = double(opt.nodes);

  auto residual = [&](double c, double h, double* J) {
    double f1 = 0, f2 = 0, j11 = 0, j12 = 0, j21 = 0, j22 = 0;
    for (double u : cg.cos_theta) {
      const double x = c + h * u;
      const double d1 = V.dV(x), d2 = V.d2V(x);
      f1 += d1;
      f2 += x * d1;
      j11 += d2;
      j12 += u * d2;
      j21 += d1 + x * d2;
      j22 += u * (d1 + x * d2);
    }
    if (J) {
      J[0] = j11 / N;
      J[1] = j12 / N;
      J[2] = j21 / (2 * N);
      J[3] = j22 / (2 * N);
    }
    return std::pair{f1 / N, f2 / (2 * N) - 1.0};
  };

  double c = 0.0;
  double h = 2.0 / std::sqrt(std::max(V.d2V(0.0), 1e-3));
  int it = 0;
  bool ok = false;
  for (; it < opt.max_iter; ++it) {
    double J[4];
    auto [f1, f2] = residual(c, h, J);
    const double norm = std::hypot(f1, f2);
    if (norm < opt.tol) {
      ok = true;
      break;
    }
    const double det = J[0] * J[3] - J[1] * J[2];
    if (!(std::abs(det) > 0.0)) break;
    const double dc = (J[3] * f1 - J[1] * f2) / det;
    const double dh = (-J[2] * f1 + J[0] * f2) / det;
    double lam = 1.0;
    for (int k = 0; k < 40; ++k, lam *= 0.5) {
      const double cn = c - lam * dc, hn = h - lam * dh;
      if (!(hn > 0.0)) continue;
      auto [g1, g2] = residual(cn, hn, nullptr);
      if (std::hypot(g1, g2) < norm * (1.0 - 1e-4 * lam) || lam < 1e-6) {
        c = cn;
        h = hn;
        break;
      }
    }
  }
  if (!ok) {
    std::ostringstream os;
    os << "equilibrium endpoint Newton did not converge after " << it << " iterations (A="
       << c - h << ", B=" << c + h << ")";
    throw EquilibriumError(os.str());
  }
  EquilibriumMeasure em(V, c - h, c + h, opt.nodes);
  em.newton_iterations = it;
  for (int k = 0; k <= 400; ++k) {
    const double x = em.A + (em.B - em.A) * k / 400.0;
    if (!(em.r(x) > 0.0)) {
      std::ostringstream os;
      os << "negative equilibrium density at x=" << x << " (one-cut condition violated)";
      throw EquilibriumError(os.str());
    }
  }
  return em;
}

double mp_density(double x, double n, double m) {
  const double a = std::pow(std::sqrt(m) - std::sqrt(n), 2), b = std::pow(std::sqrt(m) + std::sqrt(n), 2);
  if (x <= a || x >= b) return 0.0;
  return std::sqrt((x - a) * (b - x)) / (2 * kPi * x);
}

double jacobi_density(double x, double n, double m, double p, double q) {
  const double s1 = std::sqrt(p * (m - n)), s2 = std::sqrt(q * n);
  const double a = std::pow((s1 - s2) / m, 2), b = std::pow((s1 + s2) / m, 2);
  if (x <= a || x >= b) return 0.0;
  return m * std::sqrt((x - a) * (b - x)) / (2 * kPi * x * (1 - x));
}

EdgeScaling scaling_for(const ProcessSpec& spec, bool beta_shift_variant) {
  spec.validate();
  EdgeScaling s;
  s.kind = spec.kind;
  s.beta_shift_variant = beta_shift_variant;
  const double n = spec.n;
  const double corr = beta_shift_variant ? 1.0 - 2.0 / spec.beta : 0.0;
  switch (spec.kind) {
    case ProcessKind::dbm: {
      const auto em = equilibrium_measure(spec.V);
      const double R = em.R_B;
      s.E = em.B * std::sqrt(n);
      s.zeta = std::pow(R, -4.0 / 3.0) * std::pow(n, -1.0 / 3.0);
      s.chi = std::pow(R, -2.0 / 3.0) * std::pow(n, -1.0 / 6.0);
      s.shift = std::sqrt(n) * spec.V.dV(em.B) / 2.0;
      s.A = em.A;
      s.B = em.B;
      s.R_A = em.R_A;
      s.R_B = em.R_B;
      break;
    }
    case ProcessKind::laguerre: {
      const double m = spec.m + corr;
      const double sp = std::sqrt(m) + std::sqrt(n);
      s.E = sp * sp;
      s.zeta = 0.5 * std::pow(sp, 2.0 / 3.0) * std::pow(m * n, -1.0 / 3.0);
      s.chi = std::pow(sp, 4.0 / 3.0) * std::pow(m * n, -1.0 / 6.0);
      s.shift = std::sqrt(n) / sp;
      s.A = std::pow(std::sqrt(m) - std::sqrt(n), 2);
      s.B = s.E;
      s.R_B = std::sqrt(s.B - s.A) / (2 * s.B);
      s.R_A = s.A > 0 ? std::sqrt(s.B - s.A) / (2 * s.A) : 0.0;
      break;
    }
    case ProcessKind::jacobi: {
      const double p = spec.p + corr, q = spec.q + corr, m = p + q;
      const double s1 = std::sqrt(p * (m - n)), s2 = std::sqrt(q * n);
      const double E = std::pow((s1 + s2) / m, 2);
      const double pq = p * q * (m - n);
      s.E = E;
      s.zeta = std::cbrt(E * (1 - E)) / (2 * std::cbrt(pq)) * std::pow(n, -1.0 / 3.0);
      s.chi = std::pow(E * (1 - E), 2.0 / 3.0) * std::pow(pq, -1.0 / 6.0) * std::pow(n, -1.0 / 6.0);
      s.shift = (m * E - 2 * n * E + n - p) / (2 * E * (1 - E));
      s.A = std::pow((s1 - s2) / m, 2);
      s.B = E;
      s.R_B = m * std::sqrt(s.B - s.A) / (2 * s.B * (1 - s.B));
      s.R_A = m * std::sqrt(s.B - s.A) / (2 * s.A * (1 - s.A));
      break;
    }
  }
  return s;
}

double rescale_value(double lambda, const EdgeScaling& s) noexcept { return (lambda - s.E) / s.chi; }
double unrescale_value(double lt, const EdgeScaling& s) noexcept { return s.E + s.chi * lt; }

std::vector<double> rescale_particles(const std::vector<double>& lambda, const EdgeScaling& s,
                                      std::size_t top_k) {
  const std::size_t k = std::min(top_k, lambda.size());
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = rescale_value(lambda[i], s);
  return out;
}

std::vector<double> unrescale_particles(const std::vector<double>& lt, const EdgeScaling& s) {
  std::vector<double> out(lt.size());
  for (std::size_t i = 0; i < lt.size(); ++i) out[i] = unrescale_value(lt[i], s);
  return out;
}

RescaledTrajectory rescale(const dynamics::TrajectoryRecord& traj, const EdgeScaling& s,
                           std::size_t top_k, const std::vector<double>& schedule,
                           bool interpolate) {
  RescaledTrajectory r;
  r.top_k = top_k;
  if (schedule.empty()) {
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
      r.times.push_back(traj.times[j] / s.zeta);
      r.particles.push_back(rescale_particles(traj.snapshots[j], s, top_k));
    }
    return r;
  }
  for (double t : schedule) {
    const double tp = t * s.zeta;
    auto it = std::lower_bound(traj.times.begin(), traj.times.end(), tp);
    const double tol = 1e-9 * std::max(std::abs(tp), s.zeta);
    std::size_t hit = traj.times.size();
    if (it != traj.times.end() && std::abs(*it - tp) <= tol) hit = std::size_t(it - traj.times.begin());
    if (it != traj.times.begin() && std::abs(*(it - 1) - tp) <= tol)
      hit = std::size_t(it - traj.times.begin()) - 1;
    if (hit < traj.times.size()) {
      r.times.push_back(t);
      r.particles.push_back(rescale_particles(traj.snapshots[hit], s, top_k));
      continue;
    }
    if (!interpolate || it == traj.times.begin() || it == traj.times.end()) {
      std::ostringstream os;
      os << "schedule mismatch: rescaled time " << t << " (process time " << tp
         << ") is not a recorded time";
      throw PreconditionError(os.str());
    }
    const std::size_t j = std::size_t(it - traj.times.begin());
    const double w = (tp - traj.times[j - 1]) / (traj.times[j] - traj.times[j - 1]);
    auto a = rescale_particles(traj.snapshots[j - 1], s, top_k);
    auto b = rescale_particles(traj.snapshots[j], s, top_k);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = (1 - w) * a[i] + w * b[i];
    r.times.push_back(t);
    r.particles.push_back(std::move(a));
  }
  return r;
}

dynamics::TrajectoryRecord unrescale(const RescaledTrajectory& r, const EdgeScaling& s) {
  dynamics::TrajectoryRecord t;
  for (std::size_t j = 0; j < r.times.size(); ++j) {
    t.times.push_back(r.times[j] * s.zeta);
    t.snapshots.push_back(unrescale_particles(r.particles[j], s));
  }
  return t;
}

cplx delta_from_rescaled(const std::vector<double>& lt, const EdgeScaling& s, cplx w,
                         double pole_tol) {
  cplx sum = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    const cplx d = lt[i] - w;
    if (std::abs(d) < pole_tol) {
      std::ostringstream os;
      os << "rescaled particle " << i + 1 << " within " << std::abs(d) << " of w";
      throw PoleProximityError(i + 1, std::abs(d), os.str());
    }
    sum += 1.0 / d;
  }
  return sum + s.chi * s.shift - std::sqrt(w);
}

cplx delta_transform(const std::vector<double>& lambda, const EdgeScaling& s, cplx w,
                     double pole_tol) {
  return delta_from_rescaled(rescale_particles(lambda, s, lambda.size()), s, w, pole_tol);
}

cplx y_derivative(const std::vector<double>& lt, cplx w, int k) {
  if (k < 1) throw PreconditionError("y_derivative: k must be >= 1");
  double fact = 1.0;
  for (int j = 2; j <= k; ++j) fact *= j;
  cplx s = 0.0;
  for (double x : lt) {
    const cplx inv = 1.0 / (x - w);
    cplx t = inv;
    for (int j = 0; j < k; ++j) t *= inv;
    s += t;
  }
  return fact * s;
}

nevanlinna::NevanlinnaFn rescaled_nevanlinna(const std::vector<double>& lambda,
                                             const EdgeScaling& s) {
  auto m = nevanlinna::ParticleMeasure::from_unsorted(rescale_particles(lambda, s, lambda.size()));
  return nevanlinna::NevanlinnaFn::plain(std::move(m), s.chi * s.shift, 0.0);
}

}  // namespace airyline::edge
