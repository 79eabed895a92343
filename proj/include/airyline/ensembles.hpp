#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "airyline/dynamics.hpp"
#include "airyline/process.hpp"
#include "airyline/rng.hpp"

namespace airyline::ensembles {

using ParticleState = dynamics::SdeState;

// Tridiagonal model: diagonal sqrt(2/beta) N(0,1), off-diagonal chi_{beta(n-k)}/sqrt(beta).
// Stationary law of the Gaussian DBM (weight e^{-beta x^2/4}, bulk [-2 sqrt n, 2 sqrt n]).
ParticleState sample_gaussian_beta(int n, double beta, io::Stream& rng);
// Largest k eigenvalues only (bisection), non-increasing. Same draws as above.
std::vector<double> gaussian_top_k(int n, double beta, int k, io::Stream& rng);

// Bidiagonal model B (diag chi_{beta(m-i)}, subdiag chi_{beta(n-1-i)}), lambda = sv(B)^2/beta.
ParticleState sample_laguerre_beta(int n, int m, double beta, io::Stream& rng);
std::vector<double> laguerre_top_k(int n, int m, double beta, int k, io::Stream& rng);

struct BurnInOptions {
  double burnin = -1.0;  // process time; < 0 selects the default
  dynamics::IntegratorConfig cfg{};
  bool use_default_dt = true;
  bool diagnostic = false;  // split-chain R-hat on the top particle
};

struct BurnInReport {
  double burnin = 0.0;
  std::size_t steps = 0;
  double rhat = 0.0;  // 0 unless requested
  dynamics::EventLog log;
};

// Default burn-in: 10 time units (DBM) or 10 relaxation times 10/m (Jacobi).
double default_burnin(const ProcessSpec& spec);

// Evolves from (n+1-i)/(n+1).
ParticleState sample_jacobi_beta(int n, int p, int q, double beta, io::Stream& rng,
                                 const BurnInOptions& opt = {}, BurnInReport* report = nullptr,
                                 JacobiPairing pairing = JacobiPairing::matrix);
// Evolves from semicircle quantiles mapped onto the equilibrium support sqrt(n)[A, B].
ParticleState sample_dbm_general_potential(int n, const PotentialSpec& V, double beta,
                                           io::Stream& rng, const BurnInOptions& opt = {},
                                           BurnInReport* report = nullptr);

// Dispatch on spec.kind (Gaussian DBM uses the tridiagonal model).
ParticleState sample(const ProcessSpec& spec, io::Stream& rng, const BurnInOptions& opt = {});

// ---- statistics ----

double semicircle_cdf(double x);  // on [-2, 2]
double semicircle_quantile(double u);

// CDF of a density g(x) sqrt((x-a)(b-x)) on [a, b], tabulated in the arcsine
// angle and normalized to total mass 1.
class ArcsineCdf {
 public:
  ArcsineCdf(std::function<double(double)> g, double a, double b, std::size_t panels = 2048);
  double operator()(double x) const;
  double mass() const noexcept { return mass_; }  // unnormalized total
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

 private:
  double a_, b_, mass_ = 0.0;
  std::vector<double> cum_;  // at theta_k = pi k / panels
};

ArcsineCdf marchenko_pastur_cdf(double n, double m);
ArcsineCdf jacobi_cdf(double n, double m, double p, double q);

// sup |F_emp - F| (two-sided).
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
// Two-sample KS.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct Moments {
  std::size_t count = 0;
  double mean = 0, var = 0, skew = 0;
  double se_mean = 0, se_var = 0;
};
Moments summarize(const std::vector<double>& x);

// Split-chain potential scale reduction for equally long chains.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

}  // namespace airyline::ensembles
