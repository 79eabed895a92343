#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "airyline/dynamics.hpp"
#include "airyline/nevanlinna.hpp"
#include "airyline/process.hpp"

namespace airyline::edge {

using cplx = std::complex<double>;

// One-cut equilibrium measure of V on [A, B]:
//   rho(x) = (r(x)/pi) sqrt((x-A)(B-x)),
//   r(z)   = (1/2pi) int (V'(z)-V'(x))/(z-x) dx/sqrt((x-A)(B-x)),
//   m_V(z) = (-V'(z) + 2 r(z) sqrt((z-A)(z-B)))/2.
class EquilibriumMeasure {
 public:
  double A = 0.0, B = 0.0, R_A = 0.0, R_B = 0.0;
  int newton_iterations = 0;

  EquilibriumMeasure() = default;
  EquilibriumMeasure(PotentialSpec V, double A, double B, std::size_t nodes);

  cplx r(cplx z) const;
  double r(double x) const { return r(cplx(x, 0.0)).real(); }
  double density(double x) const;
  cplx m_V(cplx z) const;
  // int_A^x rho (adaptive quadrature after the arcsine substitution).
  double cdf(double x) const;
  double total_mass() const { return cdf(B); }
  // x with cdf(x) = u.
  double quantile(double u) const;
  const PotentialSpec& potential() const noexcept { return V_; }

 private:
  PotentialSpec V_;
  std::vector<double> cos_theta_;
};

struct EquilibriumOptions {
  std::size_t nodes = 256;   // Chebyshev-Gauss nodes
  double tol = 1e-13;
  int max_iter = 100;
};

// Damped Newton on (center, half-width). Throws EquilibriumError on
// non-convergence or a sign change of r on [A, B].
EquilibriumMeasure equilibrium_measure(const PotentialSpec& V, const EquilibriumOptions& opt = {});

struct EdgeScaling {
  ProcessKind kind = ProcessKind::dbm;
  double E = 0.0;      // spectral units
  double zeta = 0.0;   // time units
  double chi = 0.0;    // spectral units
  double shift = 0.0;  // stieltjes shift: Delta + sqrt w = sum 1/(lt_i - w) + chi*shift
  // Support and edge coefficients in the units of the limiting density
  // (DBM: equilibrium measure of V; Laguerre/Jacobi: spectral units).
  double A = 0.0, B = 0.0, R_A = 0.0, R_B = 0.0;
  bool beta_shift_variant = false;
};

// m -> m+1-2/beta, p -> p+1-2/beta, q -> q+1-2/beta when beta_shift_variant.
EdgeScaling scaling_for(const ProcessSpec& spec, bool beta_shift_variant = false);

// Limiting bulk densities in spectral units (mass n).
double mp_density(double x, double n, double m);
double jacobi_density(double x, double n, double m, double p, double q);

double rescale_value(double lambda, const EdgeScaling& s) noexcept;
double unrescale_value(double lt, const EdgeScaling& s) noexcept;
// Top top_k particles, rescaled.
std::vector<double> rescale_particles(const std::vector<double>& lambda, const EdgeScaling& s,
                                      std::size_t top_k);
std::vector<double> unrescale_particles(const std::vector<double>& lt, const EdgeScaling& s);

struct RescaledTrajectory {
  std::vector<double> times;  // rescaled time t/zeta
  std::vector<std::vector<double>> particles;
  std::size_t top_k = 0;
};

// Without a schedule every recorded time is relabelled. With one, each
// requested rescaled time must match a recorded time to rel. 1e-9 unless
// interpolate is set (linear in time); otherwise PreconditionError.
RescaledTrajectory rescale(const dynamics::TrajectoryRecord& traj, const EdgeScaling& s,
                           std::size_t top_k, const std::vector<double>& schedule = {},
                           bool interpolate = false);
dynamics::TrajectoryRecord unrescale(const RescaledTrajectory& r, const EdgeScaling& s);

// Delta(w) = chi (sum 1/(lambda_i - E - chi w) + shift) - sqrt(w).
// Throws PoleProximityError when a rescaled particle is within pole_tol of w.
cplx delta_transform(const std::vector<double>& lambda, const EdgeScaling& s, cplx w,
                     double pole_tol = 1e-12);
// Same, from already-rescaled particles.
cplx delta_from_rescaled(const std::vector<double>& lt, const EdgeScaling& s, cplx w,
                         double pole_tol = 1e-12);
// d^k/dw^k (Delta + sqrt w) = sum k!/(lt_i - w)^{k+1}, k >= 1 (term-wise).
cplx y_derivative(const std::vector<double>& lt, cplx w, int k);

// Particle-generated Nevanlinna function of the rescaled particles with b = chi*shift.
nevanlinna::NevanlinnaFn rescaled_nevanlinna(const std::vector<double>& lambda,
                                             const EdgeScaling& s);

}  // namespace airyline::edge
