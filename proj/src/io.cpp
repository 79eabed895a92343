#include "airyline/io.hpp"

#include <openssl/evp.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "airyline/errors.hpp"

namespace airyline::io {

namespace {

json null_v() { return json(nullptr); }

}  // namespace

const std::map<std::string, SchemaEntry>& config_schema() {
  static const std::map<std::string, SchemaEntry> schema = {
      // process
      {"kind", {ValueType::string, null_v(), "gaussian | dbm | laguerre | jacobi (required)"}},
      {"n", {ValueType::integer, null_v(), "number of particles (required)"}},
      {"beta", {ValueType::real, 2.0, "inverse temperature > 0"}},
      {"m", {ValueType::integer, null_v(), "laguerre m >= n; jacobi m = p + q"}},
      {"p", {ValueType::integer, null_v(), "jacobi p >= n + 1"}},
      {"q", {ValueType::integer, null_v(), "jacobi q >= n + 1"}},
      {"stationary", {ValueType::boolean, true, "laguerre: include the -lambda drift"}},
      {"jacobi_pairing", {ValueType::string, "matrix", "matrix | as_displayed"}},
      {"potential", {ValueType::real_list, null_v(), "dbm polynomial coefficients c0, c1, ..."}},
      {"potential_lo", {ValueType::real, -3.0, "convexity check interval, lower end"}},
      {"potential_hi", {ValueType::real, 3.0, "convexity check interval, upper end"}},
      {"beta_shift_variant", {ValueType::boolean, false, "m,p,q -> +1-2/beta in scalings"}},
      // integrator
      {"dt", {ValueType::real, null_v(), "time step (default 1e-4, jacobi 1e-4/m)"}},
      {"min_gap", {ValueType::real, null_v(), "gap floor (default 0, or 1e-9 if beta < 1)"}},
      {"max_retries", {ValueType::integer, 20, "bridge refinements per step"}},
      {"scheme", {ValueType::string, "euler_maruyama", "euler_maruyama | split_step"}},
      {"fail_on_exhaust", {ValueType::boolean, false, "throw instead of sort/clamp"}},
      // run
      {"seed", {ValueType::integer, 0, "master seed"}},
      {"replicas", {ValueType::integer, 100, "Monte-Carlo replicas"}},
      {"threads", {ValueType::integer, 1, "worker threads (0 = all cores)"}},
      {"T", {ValueType::real, 1.0, "horizon (rescaled units for edge experiments)"}},
      {"burnin", {ValueType::real, null_v(), "burn-in time in process units"}},
      {"top_k", {ValueType::integer, 10, "tracked top particles"}},
      {"rescaled_dt", {ValueType::real, null_v(), "step in rescaled time units"}},
      {"schedule", {ValueType::real_list, null_v(), "snapshot times"}},
      // experiment parameters
      {"w", {ValueType::real_list, json::array({0.0, 1.0}), "spectral point [re, im]"}},
      {"sqrt_w0", {ValueType::real_list, json::array({3.0, 2.0}), "characteristic start [re, im]"}},
      {"windows", {ValueType::real_list, null_v(), "Holder windows xi"}},
      {"k_values", {ValueType::real_list, null_v(), "particle indices"}},
      {"thresholds", {ValueType::real_list, null_v(), "collision gap thresholds"}},
      {"n_values", {ValueType::real_list, null_v(), "system sizes"}},
      {"delta", {ValueType::real, 0.5, "rigidity / characteristic exponent"}},
      {"frak_d", {ValueType::real, 0.5, "Airy-like exponent d"}},
      {"c_star", {ValueType::real, 10.0, "Airy-like constant C_*"}},
      {"w2", {ValueType::real_list, json::array({0.5, 1.5}), "second spectral point [re, im]"}},
      {"c_dom", {ValueType::real, 1.0, "local-law domain constant"}},
      {"rescaled_shift", {ValueType::real, 0.0, "shift added to rescaled particles"}},
      {"domination_replicas", {ValueType::integer, 20, "coupling: ordered-start replicas"}},
      {"record_every", {ValueType::integer, 1, "snapshot stride in steps"}},
      {"particles_file", {ValueType::string, null_v(), "CSV index,value"}},
      {"count", {ValueType::integer, 10, "number of Airy zeros"}},
      {"out", {ValueType::string, ".", "output directory or file"}},
  };
  return schema;
}

namespace {

bool type_ok(const json& v, ValueType t) {
  switch (t) {
    case ValueType::integer: return v.is_number_integer();
    case ValueType::real: return v.is_number();
    case ValueType::boolean: return v.is_boolean();
    case ValueType::string: return v.is_string();
    case ValueType::real_list:
      if (!v.is_array()) return false;
      for (const auto& e : v)
        if (!e.is_number()) return false;
      return true;
  }
  return false;
}

const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::integer: return "integer";
    case ValueType::real: return "real";
    case ValueType::boolean: return "boolean";
    case ValueType::string: return "string";
    case ValueType::real_list: return "list of reals";
  }
  return "?";
}

}  // namespace

Config make_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a key/value object");
  const auto& schema = config_schema();
  json v = json::object();
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    auto s = schema.find(it.key());
    if (s == schema.end()) throw ConfigError(it.key(), "unknown key");
    if (it.value().is_null()) continue;
    if (!type_ok(it.value(), s->second.type))
      throw ConfigError(it.key(), std::string("expected ") + type_name(s->second.type));
    if (it.value().is_number_float() && !std::isfinite(it.value().get<double>()))
      throw ConfigError(it.key(), "must be finite");
    v[it.key()] = it.value();
  }
  for (const auto& [k, e] : schema)
    if (!v.contains(k) && !e.default_value.is_null()) v[k] = e.default_value;

  for (const char* k : {"kind", "n"})
    if (!v.contains(k)) throw ConfigError(k, "required key missing");
  const std::string kind = v["kind"];
  if (kind != "gaussian" && kind != "dbm" && kind != "laguerre" && kind != "jacobi")
    throw ConfigError("kind", "must be gaussian, dbm, laguerre or jacobi");
  if (v["n"].get<std::int64_t>() < 1) throw ConfigError("n", "must be >= 1");
  if (!(v["beta"].get<double>() > 0.0)) throw ConfigError("beta", "must be > 0");
  if (kind == "laguerre" && !v.contains("m")) throw ConfigError("m", "required for laguerre");
  if (kind == "jacobi") {
    if (!v.contains("p") || !v.contains("q")) throw ConfigError("p", "jacobi requires p and q");
    const auto p = v["p"].get<std::int64_t>(), q = v["q"].get<std::int64_t>();
    if (v.contains("m") && v["m"].get<std::int64_t>() != p + q)
      throw ConfigError("m", "constraint p+q=m violated");
    v["m"] = p + q;
  }
  if (kind == "dbm" && !v.contains("potential")) v["potential"] = json::array({0.0, 0.0, 0.5});
  const std::string pairing = v["jacobi_pairing"];
  if (pairing != "matrix" && pairing != "as_displayed")
    throw ConfigError("jacobi_pairing", "must be matrix or as_displayed");
  const std::string scheme = v["scheme"];
  if (scheme != "euler_maruyama" && scheme != "split_step")
    throw ConfigError("scheme", "must be euler_maruyama or split_step");
  if (v["max_retries"].get<std::int64_t>() < 1) throw ConfigError("max_retries", "must be >= 1");
  if (v["replicas"].get<std::int64_t>() < 1) throw ConfigError("replicas", "must be >= 1");
  if (v["threads"].get<std::int64_t>() < 0) throw ConfigError("threads", "must be >= 0");
  if (v["seed"].get<std::int64_t>() < 0) throw ConfigError("seed", "must be >= 0");
  if (v["top_k"].get<std::int64_t>() < 1) throw ConfigError("top_k", "must be >= 1");
  if (!(v["T"].get<double>() > 0.0)) throw ConfigError("T", "must be > 0");
  for (const char* k : {"w", "sqrt_w0"})
    if (v[k].size() != 2) throw ConfigError(k, "expected [re, im]");

  Config c;
  c.values = v;
  const ProcessSpec spec = c.process();  // validates constraints, naming the key
  const auto d = dynamics::IntegratorConfig::defaults_for(spec);
  if (!c.values.contains("dt")) c.values["dt"] = d.dt;
  if (!c.values.contains("min_gap")) c.values["min_gap"] = d.min_gap;
  c.integrator().validate();
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path + ": parse error: " + e.what());
  }
  return make_config(doc);
}

bool Config::has(const std::string& key) const { return values.contains(key); }

namespace {
const json& need(const json& v, const std::string& key) {
  if (!v.contains(key)) throw ConfigError(key, "missing value");
  return v.at(key);
}
}  // namespace

std::int64_t Config::integer(const std::string& key) const {
  return need(values, key).get<std::int64_t>();
}
double Config::real(const std::string& key) const { return need(values, key).get<double>(); }
bool Config::boolean(const std::string& key) const { return need(values, key).get<bool>(); }
std::string Config::string(const std::string& key) const {
  return need(values, key).get<std::string>();
}
std::vector<double> Config::real_list(const std::string& key) const {
  return need(values, key).get<std::vector<double>>();
}

ProcessSpec Config::process() const {
  const std::string kind = string("kind");
  const int n = int(integer("n"));
  const double beta = real("beta");
  ProcessSpec s;
  s.n = n;
  s.beta = beta;
  if (kind == "gaussian") {
    s.kind = ProcessKind::dbm;
    s.V = PotentialSpec::gaussian();
  } else if (kind == "dbm") {
    s.kind = ProcessKind::dbm;
    s.V = PotentialSpec(real_list("potential"), real("potential_lo"), real("potential_hi"));
  } else if (kind == "laguerre") {
    s.kind = ProcessKind::laguerre;
    s.m = int(integer("m"));
    s.stationary = boolean("stationary");
  } else {
    s.kind = ProcessKind::jacobi;
    s.p = int(integer("p"));
    s.q = int(integer("q"));
    s.m = s.p + s.q;
    s.pairing = string("jacobi_pairing") == "matrix" ? JacobiPairing::matrix
                                                      : JacobiPairing::as_displayed;
  }
  s.validate();
  return s;
}

dynamics::IntegratorConfig Config::integrator() const {
  dynamics::IntegratorConfig c;
  c.dt = real("dt");
  c.min_gap = real("min_gap");
  c.max_retries = int(integer("max_retries"));
  c.scheme = string("scheme") == "split_step" ? dynamics::Scheme::split_step
                                               : dynamics::Scheme::euler_maruyama;
  c.fail_on_exhaust = boolean("fail_on_exhaust");
  return c;
}

std::string Config::canonical() const { return values.dump(); }
std::string Config::hash() const { return sha256_hex(canonical()); }

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for hashing");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(data);
}

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericalError("refusing to serialize non-finite value");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  // ERANGE on underflow still yields the correctly rounded subnormal
  if (s.empty() || end != s.c_str() + s.size() || (errno == ERANGE && std::isinf(v)))
    throw IoError(where, "invalid number '" + s + "'");
  return v;
}

namespace {

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> f;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      f.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  f.push_back(cur);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return in;
}

std::string loc(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

}  // namespace

void write_particles_csv(const std::string& path, const std::vector<double>& values) {
  auto out = open_out(path);
  out << "index,value\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    out << i + 1 << ',' << format_double(values[i]) << '\n';
  finish(out, path);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<std::string>& labels) {
  const std::size_t lab = labels.empty() ? 0 : 1;
  if (lab && labels.size() != rows.size()) throw IoError(path, "label count does not match rows");
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (r.size() + lab != header.size()) throw IoError(path, "row width does not match header");
    if (lab) out << labels[k];
    for (std::size_t i = 0; i < r.size(); ++i) out << (i + lab ? "," : "") << format_double(r[i]);
    out << '\n';
  }
  finish(out, path);
}

std::vector<double> read_particles_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  std::vector<double> v;
  std::size_t ln = 0;
  if (!std::getline(in, line) || split(line, ',') != std::vector<std::string>{"index", "value"})
    throw IoError(path, "expected header 'index,value'");
  ++ln;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    auto f = split(line, ',');
    if (f.size() != 2) throw IoError(loc(path, ln), "expected 2 fields");
    v.push_back(parse_double(f[1], loc(path, ln)));
  }
  return v;
}

void write_zeros_csv(const std::string& path, const std::vector<ZeroRow>& rows) {
  auto out = open_out(path);
  out << "index,zero,asymptotic_guess,residual\n";
  for (const auto& r : rows)
    out << r.index << ',' << format_double(r.zero) << ',' << format_double(r.asymptotic_guess)
        << ',' << format_double(r.residual) << '\n';
  finish(out, path);
}

void write_trajectory_csv(const std::string& path, const std::vector<double>& times,
                          const std::vector<std::vector<double>>& snapshots) {
  if (times.size() != snapshots.size()) throw PreconditionError("trajectory: size mismatch");
  auto out = open_out(path);
  out << "t,index,value\n";
  for (std::size_t j = 0; j < times.size(); ++j) {
    const std::string t = format_double(times[j]);
    for (std::size_t i = 0; i < snapshots[j].size(); ++i)
      out << t << ',' << i + 1 << ',' << format_double(snapshots[j][i]) << '\n';
  }
  finish(out, path);
}

void read_trajectory_csv(const std::string& path, std::vector<double>& times,
                         std::vector<std::vector<double>>& snapshots) {
  auto in = open_in(path);
  std::string line;
  times.clear();
  snapshots.clear();
  if (!std::getline(in, line) ||
      split(line, ',') != std::vector<std::string>{"t", "index", "value"})
    throw IoError(path, "expected header 't,index,value'");
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 3) throw IoError(loc(path, ln), "expected 3 fields");
    const double t = parse_double(f[0], loc(path, ln));
    const std::size_t idx = std::size_t(std::stoull(f[1]));
    const double v = parse_double(f[2], loc(path, ln));
    if (times.empty() || t != times.back() || idx == 1) {
      if (idx != 1) throw IoError(loc(path, ln), "snapshot must start at index 1");
      times.push_back(t);
      snapshots.emplace_back();
    }
    if (idx != snapshots.back().size() + 1) throw IoError(loc(path, ln), "index out of order");
    snapshots.back().push_back(v);
  }
}

void write_events_jsonl(const std::string& path, const std::vector<dynamics::Event>& events) {
  auto out = open_out(path);
  for (const auto& e : events) {
    json j = {{"t", e.t}, {"kind", e.kind}, {"indices", e.indices}};
    check_finite(j, "event");
    out << j.dump() << '\n';
  }
  finish(out, path);
}

std::vector<dynamics::Event> read_events_jsonl(const std::string& path) {
  auto in = open_in(path);
  std::vector<dynamics::Event> ev;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      ev.push_back({j.at("t").get<double>(), j.at("kind").get<std::string>(),
                    j.at("indices").get<std::vector<std::size_t>>()});
    } catch (const json::exception& e) {
      throw IoError(loc(path, ln), e.what());
    }
  }
  return ev;
}

void check_finite(const json& j, const std::string& path) {
  if (j.is_number_float()) {
    if (!std::isfinite(j.get<double>()))
      throw NumericalError("non-finite value at '" + path +
                           "' (use an explicit null for missing statistics)");
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) check_finite(it.value(), path + "/" + it.key());
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) check_finite(j[i], path + "/" + std::to_string(i));
  }
}

std::string dump_json(const json& j) {
  check_finite(j);
  return j.dump(2) + "\n";
}

void write_json(const std::string& path, const json& j) {
  const std::string s = dump_json(j);
  auto out = open_out(path);
  out << s;
  finish(out, path);
}

json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path, e.what());
  }
}

json RunManifest::to_json() const {
  json s = json::array();
  for (const auto& r : streams) {
    char key[20];
    std::snprintf(key, sizeof key, "%016llx", static_cast<unsigned long long>(r.key));
    s.push_back({{"replica", r.replica}, {"purpose", r.purpose}, {"key", key}});
  }
  json o = json::array();
  for (const auto& d : outputs) o.push_back({{"path", d.path}, {"sha256", d.sha256}});
  return {{"tool_version", tool_version}, {"command", command},   {"config_hash", config_hash},
          {"config", config},             {"master_seed", master_seed}, {"streams", s},
          {"wall_clock", wall_clock},     {"outputs", o}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  try {
    m.tool_version = j.at("tool_version");
    m.command = j.at("command");
    m.config_hash = j.at("config_hash");
    m.config = j.at("config");
    m.master_seed = j.at("master_seed");
    m.wall_clock = j.at("wall_clock");
    for (const auto& s : j.at("streams"))
      m.streams.push_back({s.at("replica"), s.at("purpose"),
                           std::stoull(s.at("key").get<std::string>(), nullptr, 16)});
    for (const auto& o : j.at("outputs")) m.outputs.push_back({o.at("path"), o.at("sha256")});
  } catch (const json::exception& e) {
    throw ConfigError("manifest", e.what());
  }
  return m;
}

void digest_outputs(RunManifest& m, const std::string& dir, const std::vector<std::string>& files) {
  for (const auto& f : files)
    m.outputs.push_back({f, sha256_file((std::filesystem::path(dir) / f).string())});
}

std::string utc_now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace airyline::io
