#pragma once

#include <map>
#include <string>
#include <vector>

#include "airyline/experiments.hpp"
#include "airyline/io.hpp"

// Config-driven experiment runs, shared by the CLI and the Python module.
namespace airyline::verify {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;  // optional first column
};
using RawTables = std::map<std::string, Table>;  // file name -> contents

const std::vector<std::string>& experiment_names();

// Throws ConfigError("experiment", ...) for unknown names.
experiments::ExperimentReport run_report(const std::string& experiment, const io::Config& cfg,
                                         unsigned threads, RawTables* raw = nullptr);

// Stationary sample from stream (seed, 0, "sample"); honours "burnin".
dynamics::SdeState sample_from_config(const io::Config& cfg);
// Trajectory from a stationary start, noise stream (seed, 0, "noise"). Without a
// "schedule" key, snapshots every record_every steps; top_k > 0 truncates them.
dynamics::TrajectoryRecord evolve_from_config(const io::Config& cfg);

struct VerifyOutput {
  experiments::ExperimentReport report;
  io::RunManifest manifest;
};

// Writes report.json, the raw CSVs and manifest.json into out_dir.
VerifyOutput run(const std::string& experiment, const io::Config& cfg, unsigned threads,
                 const std::string& out_dir, const std::string& command);

}  // namespace airyline::verify
