// airyline command-line front end.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "airyline/edge_scaling.hpp"
#include "airyline/errors.hpp"
#include "airyline/io.hpp"
#include "airyline/nevanlinna.hpp"
#include "airyline/rng.hpp"
#include "airyline/special_airy.hpp"
#include "airyline/verify.hpp"

namespace fs = std::filesystem;
using namespace airyline;
using json = nlohmann::json;

namespace {

enum Exit { kPass = 0, kCriterion = 1, kUsage = 2, kNumerical = 3 };

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out;
};

std::string joined_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

void emit_json(const json& j, const std::string& path) {
  if (path.empty())
    std::cout << io::dump_json(j);
  else
    io::write_json(path, j);
}

// Process flags shared by sample and scaling.
struct ProcessFlags {
  std::string config, kind = "gaussian", potential;
  int n = 0;
  double beta = 2.0;
  std::optional<int> m, p, q;
  std::optional<double> burnin;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON config file (flags below override)");
    app->add_option("--kind", kind, "gaussian | dbm | laguerre | jacobi");
    app->add_option("--n", n, "number of particles");
    app->add_option("--beta", beta, "inverse temperature");
    app->add_option("--m", m);
    app->add_option("--p", p);
    app->add_option("--q", q);
    app->add_option("--potential", potential, "JSON file: coefficient list or {\"potential\": [...]}");
    app->add_option("--burnin", burnin, "burn-in time (process units)");
  }

  io::Config build(const Globals& g, CLI::App* app) const {
    json doc = config.empty() ? json::object() : io::read_json(config);
    if (config.empty() || app->count("--kind")) doc["kind"] = kind;
    if (config.empty() || app->count("--n")) doc["n"] = n;
    if (config.empty() || app->count("--beta")) doc["beta"] = beta;
    if (m) doc["m"] = *m;
    if (p) doc["p"] = *p;
    if (q) doc["q"] = *q;
    if (burnin) doc["burnin"] = *burnin;
    if (!potential.empty()) {
      const json pj = io::read_json(potential);
      doc["potential"] = pj.is_array() ? pj : pj.at("potential");
      if (!app->count("--kind") && config.empty()) doc["kind"] = "dbm";
    }
    if (g.seed) doc["seed"] = *g.seed;
    return io::make_config(doc);
  }
};

io::Config load_with_overrides(const std::string& path, const Globals& g) {
  json doc = io::read_json(path);
  if (g.seed) doc["seed"] = *g.seed;
  return io::make_config(doc);
}

int cmd_airy_eval(const std::vector<double>& w, const std::string& out) {
  if (w.size() != 2) throw ConfigError("w", "expected re,im");
  const airy::cplx z(w[0], w[1]);
  const auto v = airy::airy_eval_scaled(z);
  json j = {{"w", w},
            {"log_abs", v.log_abs()},
            {"phase", v.phase()},
            {"method", airy::to_string(v.method)}};
  try {
    const auto u = airy::airy_eval(z);
    j["value"] = {u.value.real(), u.value.imag()};
    j["derivative"] = {u.derivative.real(), u.derivative.imag()};
  } catch (const AiryRangeError&) {
    j["value"] = nullptr;
    j["derivative"] = nullptr;
  }
  const auto ld = airy::airy_log_derivative(z);
  j["log_derivative"] = {ld.real(), ld.imag()};
  emit_json(j, out);
  return kPass;
}

int cmd_airy_zeros(std::size_t count, const std::string& out) {
  if (count < 1) throw ConfigError("count", "must be >= 1");
  const auto table = airy::airy_zeros(count);
  std::vector<io::ZeroRow> rows;
  for (std::size_t i = 1; i <= count; ++i) {
    const double a = table[i];
    rows.push_back({i, a, airy::zero_asymptotic_guess(i), std::abs(airy::airy_eval(a).value)});
  }
  if (out.empty()) {
    std::cout << "index,zero,asymptotic_guess,residual\n";
    for (const auto& r : rows)
      std::cout << r.index << ',' << io::format_double(r.zero) << ','
                << io::format_double(r.asymptotic_guess) << ',' << io::format_double(r.residual)
                << '\n';
  } else {
    io::write_zeros_csv(out, rows);
  }
  return kPass;
}

int cmd_sample(const io::Config& cfg, const std::string& out, const std::string& command) {
  if (out.empty()) throw ConfigError("out", "sample requires --out FILE");
  const auto st = verify::sample_from_config(cfg);
  io::write_particles_csv(out, st.particles);
  io::RunManifest m;
  m.command = command;
  m.config = cfg.values;
  m.config_hash = cfg.hash();
  m.master_seed = cfg.seed();
  m.streams.push_back({0, "sample", io::derive_stream(cfg.seed(), 0, "sample").key()});
  m.wall_clock = io::utc_now_iso8601();
  const fs::path p(out);
  io::digest_outputs(m, p.parent_path().empty() ? "." : p.parent_path().string(),
                     {p.filename().string()});
  io::write_json(out + ".manifest.json", m.to_json());
  return kPass;
}

int cmd_evolve(const io::Config& cfg, const std::string& out_dir, const std::string& command) {
  const auto tr = verify::evolve_from_config(cfg);
  fs::create_directories(out_dir);
  io::write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(), tr.times, tr.snapshots);
  io::write_events_jsonl((fs::path(out_dir) / "events.jsonl").string(), tr.log.events);
  io::RunManifest m;
  m.command = command;
  m.config = cfg.values;
  m.config_hash = cfg.hash();
  m.master_seed = cfg.seed();
  for (const char* p : {"sample", "noise"})
    m.streams.push_back({0, p, io::derive_stream(cfg.seed(), 0, p).key()});
  m.wall_clock = io::utc_now_iso8601();
  io::digest_outputs(m, out_dir, {"trajectory.csv", "events.jsonl"});
  io::write_json((fs::path(out_dir) / "manifest.json").string(), m.to_json());
  return kPass;
}

int cmd_scaling(const io::Config& cfg, bool variant, const std::string& out) {
  const auto s = edge::scaling_for(cfg.process(), variant);
  emit_json({{"E", s.E},
             {"zeta", s.zeta},
             {"chi", s.chi},
             {"shift", s.shift},
             {"A", s.A},
             {"B", s.B},
             {"R_A", s.R_A},
             {"R_B", s.R_B}},
            out);
  return kPass;
}

int cmd_nevanlinna_check(const std::string& particles, double dd, double cstar,
                         const std::string& repr, const std::string& tail, const std::string& out) {
  auto xs = io::read_particles_csv(particles);
  const auto tm = tail == "airy" ? nevanlinna::TailMode::airy_tail : nevanlinna::TailMode::none;
  auto measure = nevanlinna::ParticleMeasure::from_unsorted(std::move(xs), tm);
  const auto fn = repr == "plain" ? nevanlinna::NevanlinnaFn::plain(std::move(measure))
                                  : nevanlinna::NevanlinnaFn::airy_anchored(std::move(measure));
  const auto r = nevanlinna::check_airy_like(fn, {dd, cstar});
  json v = json::array();
  for (const auto& e : r.envelope_violations)
    v.push_back({{"w", {e.w.real(), e.w.imag()}}, {"deviation", e.deviation}, {"bound", e.bound}});
  emit_json({{"pass", r.pass},
             {"poles_bounded", r.poles_bounded},
             {"max_pole", r.max_pole},
             {"violations", v},
             {"fitted_constant", r.fitted_constant},
             {"grid_points", r.grid_points}},
            out);
  return r.pass ? kPass : kCriterion;
}

int cmd_verify(const std::string& name, const io::Config& cfg, unsigned threads,
               const std::string& out_dir, const std::string& command) {
  const auto res = verify::run(name, cfg, threads, out_dir, command);
  for (const auto& c : res.report.criteria)
    std::cout << (c.pass ? "PASS " : "FAIL ") << res.report.name << '.' << c.name
              << " measured=" << io::format_double(c.measured) << '\n';
  return res.report.pass() ? kPass : kCriterion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"airyline: edge dynamics of beta-ensembles"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "master seed (overrides config)");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_option("--out", g.out, "output file or directory");

  auto* airy_cmd = app.add_subcommand("airy", "Airy function evaluation and zeros")->fallthrough();
  airy_cmd->require_subcommand(1);
  std::vector<double> w;
  auto* eval_cmd = airy_cmd->add_subcommand("eval", "Ai, Ai', -Ai'/Ai at a point")->fallthrough();
  eval_cmd->add_option("--w", w, "re,im")->delimiter(',')->required();
  std::size_t count = 10;
  auto* zeros_cmd = airy_cmd->add_subcommand("zeros", "first N zeros as CSV")->fallthrough();
  zeros_cmd->add_option("--count", count, "number of zeros")->required();

  ProcessFlags sflags;
  auto* sample_cmd = app.add_subcommand("sample", "stationary sample to CSV")->fallthrough();
  sflags.add(sample_cmd);

  std::string evolve_config;
  auto* evolve_cmd = app.add_subcommand("evolve", "simulate a trajectory")->fallthrough();
  evolve_cmd->add_option("--config", evolve_config, "JSON config")->required();

  ProcessFlags cflags;
  bool variant = false;
  auto* scaling_cmd = app.add_subcommand("scaling", "edge scaling constants as JSON")->fallthrough();
  cflags.add(scaling_cmd);
  scaling_cmd->add_flag("--beta-shift-variant", variant, "use m,p,q + 1 - 2/beta");

  auto* nev_cmd = app.add_subcommand("nevanlinna", "Nevanlinna-function checks")->fallthrough();
  nev_cmd->require_subcommand(1);
  std::string particles, repr = "anchored", tail = "airy";
  double dd = 0.5, cstar = 10.0;
  auto* check_cmd = nev_cmd->add_subcommand("check", "Airy-like check of a particle file")->fallthrough();
  check_cmd->add_option("--particles", particles, "CSV index,value")->required();
  check_cmd->add_option("--dd", dd, "exponent d");
  check_cmd->add_option("--cstar", cstar, "constant C_*");
  check_cmd->add_option("--representation", repr, "anchored | plain")
      ->check(CLI::IsMember({"anchored", "plain"}));
  check_cmd->add_option("--tail", tail, "airy | none")->check(CLI::IsMember({"airy", "none"}));

  std::string experiment, verify_config;
  auto* verify_cmd = app.add_subcommand("verify", "run an experiment and write report.json")->fallthrough();
  verify_cmd->add_option("experiment", experiment, "experiment name")
      ->required()
      ->check(CLI::IsMember(verify::experiment_names()));
  verify_cmd->add_option("--config", verify_config, "JSON config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  const std::string command = joined_args(argc, argv);
  try {
    if (*airy_cmd) {
      if (*eval_cmd) return cmd_airy_eval(w, g.out);
      return cmd_airy_zeros(count, g.out);
    }
    if (*sample_cmd) return cmd_sample(sflags.build(g, sample_cmd), g.out, command);
    if (*evolve_cmd) {
      if (g.out.empty()) throw ConfigError("out", "evolve requires --out DIR");
      return cmd_evolve(load_with_overrides(evolve_config, g), g.out, command);
    }
    if (*scaling_cmd) return cmd_scaling(cflags.build(g, scaling_cmd), variant, g.out);
    if (*nev_cmd) return cmd_nevanlinna_check(particles, dd, cstar, repr, tail, g.out);
    if (*verify_cmd) {
      if (g.out.empty()) throw ConfigError("out", "verify requires --out DIR");
      const auto cfg = load_with_overrides(verify_config, g);
      const unsigned threads =
          app.count("--threads") ? g.threads : unsigned(cfg.integer("threads"));
      return cmd_verify(experiment, cfg, threads, g.out, command);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
