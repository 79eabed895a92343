#include "airyline/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "airyline/ensembles.hpp"
#include "airyline/errors.hpp"
#include "airyline/rng.hpp"

namespace airyline::verify {

namespace {

using experiments::cplx;
using experiments::ExperimentReport;

cplx point(const io::Config& cfg, const std::string& key) {
  const auto v = cfg.real_list(key);
  if (v.size() != 2) throw ConfigError(key, "expected [re, im]");
  return {v[0], v[1]};
}

std::vector<int> ints(const io::Config& cfg, const std::string& key) {
  if (!cfg.has(key)) throw ConfigError(key, "required for this experiment");
  std::vector<int> out;
  for (double x : cfg.real_list(key)) {
    if (x != std::floor(x) || x < 1) throw ConfigError(key, "entries must be positive integers");
    out.push_back(int(x));
  }
  return out;
}

std::vector<double> reals(const io::Config& cfg, const std::string& key) {
  if (!cfg.has(key)) throw ConfigError(key, "required for this experiment");
  return cfg.real_list(key);
}

double rescaled_dt(const io::Config& cfg, double fallback) {
  return cfg.has("rescaled_dt") ? cfg.real("rescaled_dt") : fallback;
}

std::size_t replicas(const io::Config& cfg) {
  const auto r = cfg.integer("replicas");
  if (r < 1) throw ConfigError("replicas", "must be >= 1");
  return std::size_t(r);
}

void stats_table(const ExperimentReport& rep, RawTables* raw) {
  if (!raw) return;
  Table t{{"statistic", "value"}, {}, {}};
  for (auto it = rep.statistics.begin(); it != rep.statistics.end(); ++it)
    if (it.value().is_number()) {
      t.labels.push_back(it.key());
      t.rows.push_back({it.value().get<double>()});
    }
  (*raw)["statistics.csv"] = std::move(t);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "tw",       "airy_like",      "airy_like_n",    "airy_deterministic", "rigidity",
      "holder",   "residual",       "error_scaling",  "characteristic",     "collision",
      "coupling"};
  return names;
}

ExperimentReport run_report(const std::string& name, const io::Config& cfg, unsigned threads,
                            RawTables* raw) {
  const experiments::RunOptions run{cfg.seed(), threads};
  ExperimentReport rep;
  if (name == "airy_deterministic") {
    rep = experiments::airy_like_deterministic(double(cfg.integer("n")), cfg.real("rescaled_shift"),
                                               cfg.real("c_dom"));
    stats_table(rep, raw);
    return rep;
  }
  const ProcessSpec spec = cfg.process();
  if (name == "tw") {
    std::vector<std::pair<double, double>> top;
    rep = experiments::tw_statistics(spec, replicas(cfg), run, nullptr, &top);
    if (raw) {
      Table t{{"replica", "x1", "x2"}, {}, {}};
      for (std::size_t r = 0; r < top.size(); ++r) t.rows.push_back({double(r), top[r].first, top[r].second});
      (*raw)["top.csv"] = std::move(t);
    }
  } else if (name == "airy_like" || name == "airy_like_n") {
    experiments::AiryLikeOptions o;
    o.replicas = replicas(cfg);
    o.c_dom = cfg.real("c_dom");
    o.rescaled_shift = cfg.real("rescaled_shift");
    if (name == "airy_like") {
      std::vector<double> c;
      rep = experiments::airy_like_at_equilibrium(spec, o, run, &c);
      if (raw) {
        Table t{{"replica", "C"}, {}, {}};
        for (std::size_t r = 0; r < c.size(); ++r) t.rows.push_back({double(r), c[r]});
        (*raw)["constants.csv"] = std::move(t);
      }
    } else {
      rep = experiments::airy_like_across_n(spec, ints(cfg, "n_values"), o, run);
    }
  } else if (name == "rigidity") {
    rep = experiments::rigidity_experiment(spec, std::size_t(cfg.integer("top_k")), cfg.real("T"),
                                           rescaled_dt(cfg, 1e-3), replicas(cfg), cfg.real("delta"),
                                           cfg.real("c_star"), run);
  } else if (name == "holder") {
    rep = experiments::holder_experiment(spec, ints(cfg, "k_values"), reals(cfg, "windows"),
                                         cfg.real("T"), rescaled_dt(cfg, 2e-5), replicas(cfg), run);
  } else if (name == "residual") {
    experiments::ResidualOptions o;
    o.w = point(cfg, "w");
    o.w2 = point(cfg, "w2");
    o.T = cfg.real("T");
    o.dt = rescaled_dt(cfg, o.dt);
    o.replicas = replicas(cfg);
    o.max_retries = int(cfg.integer("max_retries"));
    if (cfg.has("min_gap")) o.min_gap = cfg.real("min_gap");
    rep = experiments::sde_residual_check(spec, o, run);
  } else if (name == "error_scaling") {
    rep = experiments::error_term_scaling(spec, ints(cfg, "n_values"), replicas(cfg), point(cfg, "w"), run);
  } else if (name == "characteristic") {
    rep = experiments::characteristic_experiment(spec, point(cfg, "sqrt_w0"), cfg.real("T"),
                                                 rescaled_dt(cfg, 1e-3),
                                                 std::size_t(cfg.integer("record_every")),
                                                 replicas(cfg), cfg.real("delta"), run);
  } else if (name == "collision") {
    rep = experiments::collision_experiment(spec, cfg.real("T"), replicas(cfg), reals(cfg, "thresholds"),
                                            cfg.integrator(), run);
  } else if (name == "coupling") {
    experiments::CouplingOptions o;
    o.top_k = std::size_t(cfg.integer("top_k"));
    o.T = cfg.real("T");
    o.replicas = replicas(cfg);
    o.domination_replicas = std::size_t(cfg.integer("domination_replicas"));
    auto ic = cfg.integrator();
    if (cfg.has("rescaled_dt")) ic.dt = edge::scaling_for(spec).zeta * cfg.real("rescaled_dt");
    rep = experiments::coupling_contraction(spec, o, ic, run);
  } else {
    throw ConfigError("experiment", "unknown experiment '" + name + "'");
  }
  stats_table(rep, raw);
  return rep;
}

dynamics::SdeState sample_from_config(const io::Config& cfg) {
  ensembles::BurnInOptions o;
  if (cfg.has("burnin")) o.burnin = cfg.real("burnin");
  auto rng = io::derive_stream(cfg.seed(), 0, "sample");
  return ensembles::sample(cfg.process(), rng, o);
}

dynamics::TrajectoryRecord evolve_from_config(const io::Config& cfg) {
  const auto ic = cfg.integrator();
  const double T = cfg.real("T");
  std::vector<double> schedule;
  if (cfg.has("schedule")) {
    schedule = cfg.real_list("schedule");
  } else {
    const double every = double(cfg.integer("record_every")) * ic.dt;
    const auto count = std::size_t(std::ceil(T / every - 1e-9));
    for (std::size_t i = 0; i <= count; ++i) schedule.push_back(std::min(T, double(i) * every));
  }
  auto tr = dynamics::evolve(cfg.process(), sample_from_config(cfg), T, ic,
                             io::derive_stream(cfg.seed(), 0, "noise"), schedule);
  const auto k = std::size_t(cfg.integer("top_k"));
  if (k > 0)
    for (auto& s : tr.snapshots)
      if (s.size() > k) s.resize(k);
  return tr;
}

VerifyOutput run(const std::string& name, const io::Config& cfg, unsigned threads,
                 const std::string& out_dir, const std::string& command) {
  RawTables raw;
  VerifyOutput out;
  out.report = run_report(name, cfg, threads, &raw);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, "cannot create directory: " + ec.message());
  std::vector<std::string> files;
  for (const auto& [file, t] : raw) {
    io::write_table_csv((std::filesystem::path(out_dir) / file).string(), t.header, t.rows, t.labels);
    out.report.artifacts.push_back(file);
    files.push_back(file);
  }
  io::write_json((std::filesystem::path(out_dir) / "report.json").string(), out.report.to_json());
  files.insert(files.begin(), "report.json");

  auto& m = out.manifest;
  m.command = command;
  m.config = cfg.values;
  m.config_hash = cfg.hash();
  m.master_seed = cfg.seed();
  m.wall_clock = io::utc_now_iso8601();
  if (name != "airy_deterministic") {
    const std::size_t R = replicas(cfg);
    const std::vector<std::string> purposes =
        name == "coupling" ? std::vector<std::string>{"sample_a", "sample_b", "noise"}
                           : std::vector<std::string>{"sample", "noise"};
    for (std::size_t r = 0; r < R; ++r)
      for (const auto& p : purposes)
        m.streams.push_back({r, p, io::derive_stream(m.master_seed, r, p).key()});
  }
  io::digest_outputs(m, out_dir, files);
  io::write_json((std::filesystem::path(out_dir) / "manifest.json").string(), m.to_json());
  return out;
}

}  // namespace airyline::verify
