#include "airyline/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "airyline/errors.hpp"

namespace airyline::dynamics {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

Constraint constraint_for(const ProcessSpec& spec) noexcept {
  switch (spec.kind) {
    case ProcessKind::dbm: return Constraint::none;
    case ProcessKind::laguerre: return Constraint::positive;
    case ProcessKind::jacobi: return Constraint::unit_interval;
  }
  return Constraint::none;
}

const char* to_string(Scheme s) noexcept {
  return s == Scheme::euler_maruyama ? "euler_maruyama" : "split_step";
}

IntegratorConfig IntegratorConfig::defaults_for(const ProcessSpec& spec) {
  IntegratorConfig c;
  c.dt = spec.kind == ProcessKind::jacobi ? 1e-4 / double(spec.m) : 1e-4;
  c.min_gap = spec.beta < 1.0 ? 1e-9 : 0.0;
  return c;
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be > 0");
  if (!(min_gap >= 0.0)) throw ConfigError("min_gap", "must be >= 0");
  if (max_retries < 1) throw ConfigError("max_retries", "must be >= 1");
}

NoiseBlock::NoiseBlock(io::Stream base, std::size_t steps, std::size_t particles)
    : key_(base.key()),
      bridge_key_(io::mix64(base.key() ^ io::fnv1a64("bridge"))),
      steps_(steps),
      particles_(particles) {}

double NoiseBlock::normal(std::size_t step, std::size_t particle) const {
  const std::uint64_t c = std::uint64_t(step) * std::uint64_t(particles_) + particle;
  return io::unit_to_normal(io::u64_to_unit(io::hash_draw(key_, c)));
}

double NoiseBlock::bridge_normal(std::size_t step, std::size_t particle, std::uint64_t node) const {
  const std::uint64_t k = io::mix64(bridge_key_ + node * kGolden);
  const std::uint64_t c = std::uint64_t(step) * std::uint64_t(particles_) + particle;
  return io::unit_to_normal(io::u64_to_unit(io::hash_draw(k, c)));
}

NoiseRow NoiseRow::from_block(const NoiseBlock& block, std::size_t step) {
  NoiseRow r;
  r.block_ = &block;
  r.step_ = step;
  return r;
}

NoiseRow NoiseRow::fixed(std::vector<double> z, std::uint64_t bridge_key) {
  NoiseRow r;
  r.fixed_ = std::move(z);
  r.bridge_key_ = bridge_key;
  return r;
}

double NoiseRow::z(std::size_t i) const {
  return block_ ? block_->normal(step_, i) : fixed_.at(i);
}

double NoiseRow::bridge(std::size_t i, std::uint64_t node) const {
  if (block_) return block_->bridge_normal(step_, i, node);
  const std::uint64_t k = io::mix64(bridge_key_ + node * kGolden);
  return io::unit_to_normal(io::u64_to_unit(io::hash_draw(k, i)));
}

void EventLog::add(double t, std::string kind, std::vector<std::size_t> idx) {
  if (kind == "retry") ++retries;
  else if (kind == "sort") ++sorts;
  else if (kind == "clamp") ++clamps;
  events.push_back({t, std::move(kind), std::move(idx)});
}

Model Model::from_spec(const ProcessSpec& spec) {
  Model m;
  m.beta = spec.beta;
  m.constraint = constraint_for(spec);
  switch (spec.kind) {
    case ProcessKind::dbm:
      m.pairing = Pairing::unit;
      m.V = &spec.V;
      m.n_scale = spec.n;
      break;
    case ProcessKind::laguerre:
      m.pairing = Pairing::laguerre;
      m.m = spec.m;
      m.stationary = spec.stationary;
      break;
    case ProcessKind::jacobi:
      m.pairing = spec.pairing == JacobiPairing::matrix ? Pairing::jacobi_matrix
                                                        : Pairing::jacobi_displayed;
      m.m = spec.m;
      m.p = spec.p;
      break;
  }
  return m;
}

namespace {

template <class H>
void pair_sum(const double* x, std::size_t n, double* out, H h) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double t = h(xi, x[j]) / (xi - x[j]);
      acc += t;
      out[j] -= t;
    }
    out[i] += acc;
  }
}

}  // namespace

void Model::drift(const double* x, std::size_t n, double* out) const {
  std::fill(out, out + n, 0.0);
  switch (pairing) {
    case Pairing::unit:
      pair_sum(x, n, out, [](double, double) { return 1.0; });
      break;
    case Pairing::laguerre:
      pair_sum(x, n, out, [](double a, double b) { return a + b; });
      break;
    case Pairing::jacobi_matrix:
      pair_sum(x, n, out, [](double a, double b) { return a + b - 2.0 * a * b; });
      break;
    case Pairing::jacobi_displayed:
      pair_sum(x, n, out, [](double a, double b) { return a * (1.0 - a) + b * (1.0 - b); });
      break;
  }
  switch (pairing) {
    case Pairing::unit:
      if (V) {
        if (V->is_gaussian()) {
          for (std::size_t i = 0; i < n; ++i) out[i] -= 0.5 * x[i];
        } else {
          const double s = std::sqrt(n_scale);
          for (std::size_t i = 0; i < n; ++i) out[i] -= 0.5 * s * V->dV(x[i] / s);
        }
      }
      if (W)
        for (std::size_t i = 0; i < n; ++i) out[i] += (*W)(x[i]);
      break;
    case Pairing::laguerre:
      for (std::size_t i = 0; i < n; ++i) out[i] += m - (stationary ? x[i] : 0.0);
      break;
    case Pairing::jacobi_matrix:
    case Pairing::jacobi_displayed:
      for (std::size_t i = 0; i < n; ++i) out[i] += p - m * x[i];
      break;
  }
}

double Model::sigma(double x) const {
  switch (pairing) {
    case Pairing::unit: return std::sqrt(2.0 / beta);
    case Pairing::laguerre: return 2.0 / std::sqrt(beta) * std::sqrt(std::max(x, 0.0));
    default: return 2.0 / std::sqrt(beta) * std::sqrt(std::max(x * (1.0 - x), 0.0));
  }
}

namespace {

class Stepper {
 public:
  Stepper(const Model& model, const IntegratorConfig& cfg) : model_(model), cfg_(cfg) {}

  void advance(std::vector<double>& x, double t, const NoiseRow& row, EventLog* log) {
    const std::size_t n = x.size();
    dB_.resize(n);
    const double sdt = std::sqrt(cfg_.dt);
    for (std::size_t i = 0; i < n; ++i) dB_[i] = sdt * row.z(i);
    budget_ = cfg_.max_retries;
    logged_retry_ = false;
    t_ = t;
    substep(x, cfg_.dt, dB_, 1, row, log);
  }

 private:
  void propose(const std::vector<double>& x, double h, const std::vector<double>& dB,
               std::vector<double>& out) {
    const std::size_t n = x.size();
    drift_.resize(n);
    out.resize(n);
    if (cfg_.scheme == Scheme::euler_maruyama) {
      model_.drift(x.data(), n, drift_.data());
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + drift_[i] * h + model_.sigma(x[i]) * dB[i];
    } else {
      // half drift, noise at the half-drifted state, half drift
      half_.resize(n);
      model_.drift(x.data(), n, drift_.data());
      for (std::size_t i = 0; i < n; ++i) half_[i] = x[i] + 0.5 * h * drift_[i];
      for (std::size_t i = 0; i < n; ++i) half_[i] += model_.sigma(half_[i]) * dB[i];
      model_.drift(half_.data(), n, drift_.data());
      for (std::size_t i = 0; i < n; ++i) out[i] = half_[i] + 0.5 * h * drift_[i];
    }
  }

  // Indices violating ordering / gap / constraint / finiteness.
  std::vector<std::size_t> violations(const std::vector<double>& y) const {
    std::vector<std::size_t> bad;
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) {
      bool b = !std::isfinite(y[i]);
      if (model_.constraint == Constraint::positive && !(y[i] > 0.0)) b = true;
      if (model_.constraint == Constraint::unit_interval && !(y[i] > 0.0 && y[i] < 1.0)) b = true;
      if (i + 1 < n) {
        const double g = y[i] - y[i + 1];
        if (cfg_.min_gap > 0.0 ? !(g >= cfg_.min_gap) : !(g > 0.0)) {
          bad.push_back(i);
          bad.push_back(i + 1);
          continue;
        }
      }
      if (b) bad.push_back(i);
    }
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    return bad;
  }

  void substep(std::vector<double>& x, double h, const std::vector<double>& dB,
               std::uint64_t node, const NoiseRow& row, EventLog* log) {
    std::vector<double> trial;
    propose(x, h, dB, trial);
    auto bad = violations(trial);
    if (bad.empty()) {
      x.swap(trial);
      return;
    }
    if (budget_ > 0 && node < (std::uint64_t(1) << 62)) {
      --budget_;
      if (log && !logged_retry_) {
        log->add(t_, "retry", bad);
        logged_retry_ = true;
      } else if (log) {
        ++log->retries;
      }
      const std::size_t n = x.size();
      std::vector<double> d1(n), d2(n);
      const double s = std::sqrt(0.25 * h);
      for (std::size_t i = 0; i < n; ++i) {
        d1[i] = 0.5 * dB[i] + s * row.bridge(i, node);
        d2[i] = dB[i] - d1[i];
      }
      substep(x, 0.5 * h, d1, 2 * node, row, log);
      substep(x, 0.5 * h, d2, 2 * node + 1, row, log);
      return;
    }
    repair(trial, bad, log);
    x.swap(trial);
  }

  void repair(std::vector<double>& y, const std::vector<std::size_t>& bad, EventLog* log) {
    for (double v : y)
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "step failure at t=" << t_ << ": non-finite particle after " << cfg_.max_retries
           << " retries";
        throw StepFailure(t_, bad, os.str());
      }
    if (cfg_.fail_on_exhaust) {
      std::ostringstream os;
      os << "step failure at t=" << t_ << ": ordering/constraint violated after "
         << cfg_.max_retries << " retries";
      throw StepFailure(t_, bad, os.str());
    }
    bool clamped = false;
    for (double& v : y) {
      if (model_.constraint == Constraint::positive && !(v > 0.0)) {
        v = v < 0.0 ? -v : 1e-300;  // reflect at 0
        clamped = true;
      } else if (model_.constraint == Constraint::unit_interval && !(v > 0.0 && v < 1.0)) {
        v = std::clamp(v, 1e-12, 1.0 - 1e-12);
        clamped = true;
      }
    }
    bool sorted = !std::is_sorted(y.begin(), y.end(), std::greater<double>());
    if (sorted) std::sort(y.begin(), y.end(), std::greater<double>());
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
      const double g = std::max(cfg_.min_gap, 1e-12 * std::max(1.0, std::abs(y[i])));
      if (y[i] - y[i + 1] < g) {
        y[i + 1] = y[i] - g;
        sorted = true;
      }
    }
    if (log) {
      if (sorted) log->add(t_, "sort", bad);
      if (clamped) log->add(t_, "clamp", bad);
    }
  }

  const Model& model_;
  const IntegratorConfig& cfg_;
  std::vector<double> dB_, drift_, half_;
  int budget_ = 0;
  bool logged_retry_ = false;
  double t_ = 0.0;
};

void check_state(const SdeState& s) {
  for (std::size_t i = 1; i < s.particles.size(); ++i)
    if (!(s.particles[i] <= s.particles[i - 1]))
      throw PreconditionError("SdeState: particles must be non-increasing");
}

}  // namespace

SdeState step_model(const Model& model, const SdeState& state, const IntegratorConfig& cfg,
                    const NoiseRow& row, EventLog* log) {
  cfg.validate();
  check_state(state);
  SdeState out = state;
  Stepper st(model, cfg);
  st.advance(out.particles, state.t, row, log);
  out.t = state.t + cfg.dt;
  return out;
}

SdeState step_dbm(const SdeState& state, const PotentialSpec& V, int n, double beta,
                  const IntegratorConfig& cfg, const NoiseRow& row, EventLog* log) {
  Model m;
  m.pairing = Model::Pairing::unit;
  m.V = &V;
  m.n_scale = n;
  m.beta = beta;
  m.constraint = Constraint::none;
  return step_model(m, state, cfg, row, log);
}

SdeState step_laguerre(const SdeState& state, int /*n*/, double m, double beta, bool stationary,
                       const IntegratorConfig& cfg, const NoiseRow& row, EventLog* log) {
  Model md;
  md.pairing = Model::Pairing::laguerre;
  md.m = m;
  md.beta = beta;
  md.stationary = stationary;
  md.constraint = Constraint::positive;
  return step_model(md, state, cfg, row, log);
}

SdeState step_jacobi(const SdeState& state, int /*n*/, double m, double p, double q,
                     const IntegratorConfig& cfg, double beta, const NoiseRow& row, EventLog* log,
                     JacobiPairing pairing) {
  if (std::abs(p + q - m) > 1e-12 * m) throw ConfigError("p", "constraint p+q=m violated");
  Model md;
  md.pairing = pairing == JacobiPairing::matrix ? Model::Pairing::jacobi_matrix
                                                : Model::Pairing::jacobi_displayed;
  md.m = m;
  md.p = p;
  md.beta = beta;
  md.constraint = Constraint::unit_interval;
  return step_model(md, state, cfg, row, log);
}

SdeState step_localized_dbm(const SdeState& state, const std::function<double(double)>& W,
                            double beta, const IntegratorConfig& cfg, const NoiseRow& row,
                            EventLog* log) {
  Model m;
  m.pairing = Model::Pairing::unit;
  m.W = &W;
  m.beta = beta;
  return step_model(m, state, cfg, row, log);
}

std::size_t steps_for(double T, double dt) {
  if (!(T > 0.0)) throw PreconditionError("evolve: T must be > 0");
  return std::size_t(std::llround(T / dt));
}

std::vector<std::size_t> schedule_steps(const std::vector<double>& schedule, double dt,
                                        std::size_t nsteps) {
  std::vector<std::size_t> s;
  for (double t : schedule) {
    if (t < -1e-12 || t > double(nsteps) * dt * (1.0 + 1e-12) + 1e-12)
      throw PreconditionError("evolve: schedule time outside [0, T]");
    s.push_back(std::size_t(std::llround(t / dt)));
  }
  return s;
}

SdeState run(const ProcessSpec& spec, const SdeState& state0, std::size_t nsteps,
             const IntegratorConfig& cfg, const NoiseBlock& noise, const Observer& observer,
             EventLog* log) {
  cfg.validate();
  check_state(state0);
  if (noise.particles() < state0.particles.size() || noise.steps() < nsteps)
    throw PreconditionError("run: noise block smaller than the requested run");
  const Model model = Model::from_spec(spec);
  Stepper st(model, cfg);
  SdeState s = state0;
  if (observer) observer(0, s);
  for (std::size_t k = 0; k < nsteps; ++k) {
    st.advance(s.particles, s.t, NoiseRow::from_block(noise, k), log);
    s.t = state0.t + double(k + 1) * cfg.dt;
    if (observer) observer(k + 1, s);
  }
  return s;
}

TrajectoryRecord evolve(const ProcessSpec& spec, const SdeState& state0, double T,
                        const IntegratorConfig& cfg, const NoiseBlock& noise,
                        const std::vector<double>& schedule) {
  const std::size_t nsteps = steps_for(T, cfg.dt);
  auto snap = schedule_steps(schedule, cfg.dt, nsteps);
  TrajectoryRecord rec;
  rec.steps = nsteps;
  std::size_t next = 0;
  std::vector<std::size_t> order(snap.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return snap[a] < snap[b]; });
  auto obs = [&](std::size_t k, const SdeState& s) {
    while (next < order.size() && snap[order[next]] == k) {
      rec.times.push_back(s.t);
      rec.snapshots.push_back(s.particles);
      ++next;
    }
  };
  run(spec, state0, nsteps, cfg, noise, obs, &rec.log);
  return rec;
}

TrajectoryRecord evolve(const ProcessSpec& spec, const SdeState& state0, double T,
                        const IntegratorConfig& cfg, const io::Stream& rng,
                        const std::vector<double>& schedule) {
  const std::size_t nsteps = steps_for(T, cfg.dt);
  NoiseBlock nb(rng, nsteps, state0.particles.size());
  return evolve(spec, state0, T, cfg, nb, schedule);
}

std::pair<TrajectoryRecord, TrajectoryRecord> evolve_paired(
    const ProcessSpec& specA, const ProcessSpec& specB, const SdeState& state0A,
    const SdeState& state0B, double T, const IntegratorConfig& cfg, const NoiseBlock& shared_noise,
    const std::vector<double>& schedule) {
  if (state0A.particles.size() != state0B.particles.size())
    throw PreconditionError("evolve_paired: particle counts differ");
  return {evolve(specA, state0A, T, cfg, shared_noise, schedule),
          evolve(specB, state0B, T, cfg, shared_noise, schedule)};
}

}  // namespace airyline::dynamics
