#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "airyline/dynamics.hpp"
#include "airyline/edge_scaling.hpp"
#include "airyline/process.hpp"

namespace airyline::experiments {

using cplx = std::complex<double>;
using json = nlohmann::json;

struct Criterion {
  std::string name;
  double measured = 0.0;
  double lo = 0.0, hi = 0.0;  // pass iff lo <= measured <= hi
  bool pass = false;
};

struct ExperimentReport {
  std::string name;
  json parameters = json::object();
  json statistics = json::object();  // NaN is rejected on serialization
  std::vector<Criterion> criteria;
  std::vector<std::string> artifacts;

  void stat(const std::string& key, double v) { statistics[key] = v; }
  void stat_null(const std::string& key) { statistics[key] = nullptr; }
  const Criterion& check(const std::string& name, double measured, double lo, double hi);
  const Criterion& check_le(const std::string& name, double measured, double hi);
  const Criterion& check_ge(const std::string& name, double measured, double lo);
  bool pass() const;
  const Criterion* find(const std::string& name) const;
  json to_json() const;
};

struct RunOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// ---- exact generator of the rescaled Stieltjes observable ----

// Rescaled drift b~ = (zeta/chi) b and squared diffusion s~^2 = (zeta/chi^2) s^2
// of every particle.
void rescaled_coefficients(const dynamics::Model& model, const std::vector<double>& lambda,
                           const edge::EdgeScaling& s, std::vector<double>& drift,
                           std::vector<double>& diff2);

struct DriftDecomposition {
  cplx Y;          // Delta + sqrt w
  cplx generator;  // L Y = sum [-b~/(lt-w)^2 + s~^2/(lt-w)^3]
  cplx limiting;   // (2-beta)/(2beta) Y'' + Y Y' - 1/2
  cplx error() const { return generator - limiting; }
};

DriftDecomposition drift_decomposition(const dynamics::Model& model,
                                       const std::vector<double>& lambda,
                                       const edge::EdgeScaling& s, double beta, cplx w);

// ---- tw_statistics ----

struct TwReference {
  double mean = 0.0, var = 0.0;
  double tol_mean = 0.05, tol_var = 0.10;
};

// Top-two rescaled particles at stationarity. Samples returned through `top`.
ExperimentReport tw_statistics(const ProcessSpec& spec, std::size_t replicas, const RunOptions& run,
                               const TwReference* reference = nullptr,
                               std::vector<std::pair<double, double>>* top = nullptr);

// ---- Airy-like envelope at equilibrium ----

// w = a + i b with |w| <= n^{1/6}, b >= c_dom sqrt(max(a,0)+1).
std::vector<cplx> local_law_grid(double n, double c_dom = 1.0, std::size_t na = 24,
                                 std::size_t nb = 24);
// max |Delta| Im w / Im[sqrt w]^{1/2} over the grid.
double fitted_envelope_constant(const std::vector<cplx>& grid, const std::vector<cplx>& delta);

struct AiryLikeOptions {
  std::size_t replicas = 50;
  double c_dom = 1.0;
  double rescaled_shift = 0.0;  // added to every rescaled particle (detector check)
};

ExperimentReport airy_like_at_equilibrium(const ProcessSpec& spec, const AiryLikeOptions& opt,
                                          const RunOptions& run,
                                          std::vector<double>* constants = nullptr);
// Runs the above for each n and regresses the 95th percentile on log n.
ExperimentReport airy_like_across_n(const ProcessSpec& base, const std::vector<int>& n_values,
                                    const AiryLikeOptions& opt, const RunOptions& run);
// Deterministic configuration: Airy zeros (+ shift) against exact -Ai'/Ai.
ExperimentReport airy_like_deterministic(double n_equiv, double shift, double c_dom = 1.0);

// ---- rigidity / Wegner ----

struct RigidityStats {
  double rigidity = 0.0;  // sup_t max_i |x_i(t) - a_i| i^delta
  double wegner = 0.0;    // sup_t sup_y #{x_i in [y-1,y+1]} / sqrt(|y|+1)
};

RigidityStats rigidity_wegner_stats(const edge::RescaledTrajectory& traj, double delta);
ExperimentReport rigidity_and_wegner(const std::vector<edge::RescaledTrajectory>& trajs,
                                     double delta, double C);

// ---- trajectory drivers ----

// Records the rescaled top_k particles every `every` steps (and at step 0).
edge::RescaledTrajectory record_top_k(const ProcessSpec& spec, const dynamics::SdeState& state0,
                                      std::size_t steps, const dynamics::IntegratorConfig& cfg,
                                      const dynamics::NoiseBlock& noise, std::size_t top_k,
                                      std::size_t every = 1, dynamics::EventLog* log = nullptr);

// Stationary start from stream (seed, r, "sample"), noise from (seed, r, "noise");
// rescaled horizon T and step dt.
edge::RescaledTrajectory stationary_top_k(const ProcessSpec& spec, double T, double dt,
                                          std::size_t top_k, std::uint64_t seed, std::size_t r,
                                          std::size_t every = 1);

ExperimentReport rigidity_experiment(const ProcessSpec& spec, std::size_t top_k, double T,
                                     double dt, std::size_t replicas, double delta, double C,
                                     const RunOptions& run);

// ---- Holder exponent ----

struct LineFit {
  double slope = 0.0, intercept = 0.0, slope_se = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Windows are in the trajectory's time units; need >= 2 decades (PreconditionError).
// Uses disjoint origins inside each trajectory to average max increments.
ExperimentReport holder_exponent(const std::vector<edge::RescaledTrajectory>& trajs,
                                 const std::vector<int>& ks, const std::vector<double>& windows,
                                 double slope_target = 0.5, double slope_tol = 0.1,
                                 double k_target = 2.0 / 3.0, double k_tol = 0.2);

// Stationary trajectories of the top max(ks) particles, rescaled T and dt.
ExperimentReport holder_experiment(const ProcessSpec& spec, const std::vector<int>& ks,
                                   const std::vector<double>& windows, double T, double dt,
                                   std::size_t replicas, const RunOptions& run);

// ---- SDE residual / quadratic variation ----

struct ResidualOptions {
  cplx w{0.0, 1.0};
  cplx w2{0.5, 1.5};        // second point for the cross variation
  double T = 0.5;           // rescaled
  double dt = 5e-4;         // rescaled
  std::size_t replicas = 200;
  int max_retries = 0;      // 0: integrator default
  double min_gap = -1.0;    // process units; < 0: integrator default
  double z_max = 3.0;       // drift check |z| <= z_max
  double qv_tol = 0.15;     // |ratio - 1| <= qv_tol
};

ExperimentReport sde_residual_check(const ProcessSpec& spec, const ResidualOptions& opt,
                                    const RunOptions& run);

// Mean |E(w)| at stationarity for each n, fitted decay exponent.
ExperimentReport error_term_scaling(const ProcessSpec& base, const std::vector<int>& n_values,
                                    std::size_t replicas, cplx w, const RunOptions& run,
                                    double min_exponent = 0.25);

// ---- characteristics ----

struct CharacteristicSample {
  double t;
  cplx w;
  cplx delta;
  double kappa;
};

struct CharacteristicTrack {
  cplx w0;
  double eta = 0.0;
  std::vector<CharacteristicSample> samples;
};

// sqrt(w_t) = sqrt(w0) - t/2. Throws PreconditionError when Re sqrt(w0) <= T/2.
cplx characteristic_point(cplx sqrt_w0, double t);

// traj holds full configurations in process units; times are mapped by zeta.
std::pair<CharacteristicTrack, ExperimentReport> characteristic_track(
    const dynamics::TrajectoryRecord& traj, const edge::EdgeScaling& s, cplx sqrt_w0, double T,
    double delta);

// Runs characteristic_track on `replicas` stationary runs; snapshots every
// `every` steps of rescaled size dt.
ExperimentReport characteristic_experiment(const ProcessSpec& spec, cplx sqrt_w0, double T,
                                           double dt, std::size_t every, std::size_t replicas,
                                           double delta, const RunOptions& run);

// ---- collisions ----

struct GapTrace {
  double dt = 0.0;
  std::vector<double> min_gap;  // after every step
};

GapTrace min_gap_trace(const ProcessSpec& spec, const dynamics::SdeState& state0, double T,
                       const dynamics::IntegratorConfig& cfg, const dynamics::NoiseBlock& noise,
                       dynamics::EventLog* log = nullptr);
// Lebesgue measure of {t : min gap <= threshold}, averaged over traces; fitted
// exponent of measure vs threshold over thresholds with positive measure.
ExperimentReport collision_measure(const std::vector<GapTrace>& traces,
                                   const std::vector<double>& thresholds);
ExperimentReport collision_experiment(const ProcessSpec& spec, double T, std::size_t replicas,
                                      const std::vector<double>& thresholds,
                                      const dynamics::IntegratorConfig& cfg, const RunOptions& run);

// ---- coupling ----

struct CouplingOptions {
  std::size_t top_k = 10;
  double T = 5.0;  // rescaled
  std::size_t replicas = 100;
  std::size_t domination_replicas = 20;
  double contraction_min = 0.9;
  double domination_min = 0.99;
};

// d(t) and the domination check both use the top_k particles; the all-particle
// domination rate is reported as a statistic.
ExperimentReport coupling_contraction(const ProcessSpec& spec, const CouplingOptions& opt,
                                      const dynamics::IntegratorConfig& cfg, const RunOptions& run);

}  // namespace airyline::experiments
