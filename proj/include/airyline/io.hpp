#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "airyline/dynamics.hpp"
#include "airyline/process.hpp"

namespace airyline::io {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "airyline 0.1.0";

// ---- configuration ----

enum class ValueType { integer, real, boolean, string, real_list };

struct SchemaEntry {
  ValueType type;
  json default_value;  // null = no default (optional)
  const char* help;
};

// Flat schema: every accepted key with its type and default.
const std::map<std::string, SchemaEntry>& config_schema();

struct Config {
  json values;  // validated, defaults applied, keys sorted

  std::int64_t integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::string string(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;
  bool has(const std::string& key) const;

  ProcessSpec process() const;
  dynamics::IntegratorConfig integrator() const;
  std::uint64_t seed() const { return std::uint64_t(integer("seed")); }
  // Canonical serialization (sorted keys, shortest round-trip numbers).
  std::string canonical() const;
  std::string hash() const;  // sha256 of canonical()
};

// Validates against config_schema(): unknown keys, types, ranges and
// process constraints. Throws ConfigError naming the key.
Config make_config(const json& doc);
Config load_config(const std::string& path);  // IoError / ConfigError

// ---- hashing ----
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

// ---- number formatting ----
std::string format_double(double v);  // %.17g, rejects non-finite
double parse_double(const std::string& s, const std::string& where);

// ---- CSV ----
void write_particles_csv(const std::string& path, const std::vector<double>& values);
std::vector<double> read_particles_csv(const std::string& path);
// Numeric table; optional string labels form the first column.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<std::string>& labels = {});

struct ZeroRow {
  std::size_t index;
  double zero, asymptotic_guess, residual;
};
void write_zeros_csv(const std::string& path, const std::vector<ZeroRow>& rows);

void write_trajectory_csv(const std::string& path, const std::vector<double>& times,
                          const std::vector<std::vector<double>>& snapshots);
void read_trajectory_csv(const std::string& path, std::vector<double>& times,
                         std::vector<std::vector<double>>& snapshots);

void write_events_jsonl(const std::string& path, const std::vector<dynamics::Event>& events);
std::vector<dynamics::Event> read_events_jsonl(const std::string& path);

// ---- JSON ----
// Throws NumericalError naming the JSON path of any NaN/Inf value.
void check_finite(const json& j, const std::string& path = "");
std::string dump_json(const json& j);  // check_finite + 2-space indent + newline
void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

// ---- manifests ----
struct StreamRecord {
  std::uint64_t replica;
  std::string purpose;
  std::uint64_t key;
};

struct OutputDigest {
  std::string path;  // relative to the run directory
  std::string sha256;
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::string config_hash;
  json config;  // full config: enough to rerun
  std::uint64_t master_seed = 0;
  std::vector<StreamRecord> streams;
  std::string wall_clock;  // ISO-8601 UTC
  std::vector<OutputDigest> outputs;

  json to_json() const;
  static RunManifest from_json(const json& j);
};

// Digests each file (relative to dir) and fills outputs.
void digest_outputs(RunManifest& m, const std::string& dir, const std::vector<std::string>& files);
std::string utc_now_iso8601();

}  // namespace airyline::io
