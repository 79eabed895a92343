#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "airyline/process.hpp"
#include "airyline/rng.hpp"

namespace airyline::dynamics {

enum class Constraint { none, positive, unit_interval };

struct SdeState {
  double t = 0.0;
  std::vector<double> particles;  // non-increasing
  Constraint constraint = Constraint::none;
};

Constraint constraint_for(const ProcessSpec& spec) noexcept;

enum class Scheme { euler_maruyama, split_step };
const char* to_string(Scheme s) noexcept;

struct IntegratorConfig {
  double dt = 1e-4;
  double min_gap = 0.0;
  int max_retries = 20;
  Scheme scheme = Scheme::euler_maruyama;
  // After max_retries: false = sort/clamp and log, true = throw StepFailure.
  bool fail_on_exhaust = false;

  // dt = 1e-4 * characteristic time (1, or 1/m for Jacobi); min_gap 1e-9 for beta < 1.
  static IntegratorConfig defaults_for(const ProcessSpec& spec);
  void validate() const;
};

// Standard normals Z(step, particle), generated on demand from a counter-based
// stream, so the block is reproducible from (key, shape) and can be shared by
// reference between paired runs. Bridge refinements use a separate lane.
class NoiseBlock {
 public:
  NoiseBlock() = default;
  NoiseBlock(io::Stream base, std::size_t steps, std::size_t particles);

  double normal(std::size_t step, std::size_t particle) const;
  double bridge_normal(std::size_t step, std::size_t particle, std::uint64_t node) const;

  std::size_t steps() const noexcept { return steps_; }
  std::size_t particles() const noexcept { return particles_; }
  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_ = 0, bridge_key_ = 0;
  std::size_t steps_ = 0, particles_ = 0;
};

// One row of increments. Either a view into a NoiseBlock or explicit values.
class NoiseRow {
 public:
  static NoiseRow from_block(const NoiseBlock& block, std::size_t step);
  static NoiseRow fixed(std::vector<double> z, std::uint64_t bridge_key = 0);

  double z(std::size_t i) const;
  double bridge(std::size_t i, std::uint64_t node) const;
  std::size_t step() const noexcept { return step_; }

 private:
  const NoiseBlock* block_ = nullptr;
  std::size_t step_ = 0;
  std::vector<double> fixed_;
  std::uint64_t bridge_key_ = 0;
};

struct Event {
  double t;
  std::string kind;  // "retry" | "clamp" | "sort"
  std::vector<std::size_t> indices;
};

struct EventLog {
  std::vector<Event> events;
  std::size_t retries = 0, sorts = 0, clamps = 0;
  void add(double t, std::string kind, std::vector<std::size_t> idx);
};

// Drift/diffusion of an interacting particle system.
struct Model {
  enum class Pairing { unit, laguerre, jacobi_matrix, jacobi_displayed };
  Pairing pairing = Pairing::unit;
  Constraint constraint = Constraint::none;
  double beta = 2.0;
  // dbm
  const PotentialSpec* V = nullptr;
  double n_scale = 1.0;  // the n in sqrt(n)/2 V'(x/sqrt n)
  // laguerre / jacobi
  double m = 0.0, p = 0.0;
  bool stationary = true;
  // localized dbm
  const std::function<double(double)>* W = nullptr;

  static Model from_spec(const ProcessSpec& spec);
  void drift(const double* x, std::size_t n, double* out) const;
  double sigma(double x) const;
};

SdeState step_model(const Model& model, const SdeState& state, const IntegratorConfig& cfg,
                    const NoiseRow& row, EventLog* log = nullptr);

SdeState step_dbm(const SdeState& state, const PotentialSpec& V, int n, double beta,
                  const IntegratorConfig& cfg, const NoiseRow& row, EventLog* log = nullptr);
SdeState step_laguerre(const SdeState& state, int n, double m, double beta, bool stationary,
                       const IntegratorConfig& cfg, const NoiseRow& row, EventLog* log = nullptr);
SdeState step_jacobi(const SdeState& state, int n, double m, double p, double q,
                     const IntegratorConfig& cfg, double beta, const NoiseRow& row,
                     EventLog* log = nullptr, JacobiPairing pairing = JacobiPairing::matrix);
// k-particle DBM with external drift W evaluated at each particle.
SdeState step_localized_dbm(const SdeState& state, const std::function<double(double)>& W,
                            double beta, const IntegratorConfig& cfg, const NoiseRow& row,
                            EventLog* log = nullptr);

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<std::vector<double>> snapshots;
  EventLog log;
  std::size_t steps = 0;
};

std::size_t steps_for(double T, double dt);

// Snapshot indices: nearest step to each schedule time.
std::vector<std::size_t> schedule_steps(const std::vector<double>& schedule, double dt,
                                        std::size_t nsteps);

using Observer = std::function<void(std::size_t step, const SdeState& state)>;

// Runs nsteps steps from state0 using rows 0..nsteps-1 of `noise`; calls
// `observer` after every accepted step (and once with step 0 before stepping).
SdeState run(const ProcessSpec& spec, const SdeState& state0, std::size_t nsteps,
             const IntegratorConfig& cfg, const NoiseBlock& noise, const Observer& observer,
             EventLog* log = nullptr);

TrajectoryRecord evolve(const ProcessSpec& spec, const SdeState& state0, double T,
                        const IntegratorConfig& cfg, const io::Stream& rng,
                        const std::vector<double>& schedule);
TrajectoryRecord evolve(const ProcessSpec& spec, const SdeState& state0, double T,
                        const IntegratorConfig& cfg, const NoiseBlock& noise,
                        const std::vector<double>& schedule);

std::pair<TrajectoryRecord, TrajectoryRecord> evolve_paired(
    const ProcessSpec& specA, const ProcessSpec& specB, const SdeState& state0A,
    const SdeState& state0B, double T, const IntegratorConfig& cfg, const NoiseBlock& shared_noise,
    const std::vector<double>& schedule);

}  // namespace airyline::dynamics
