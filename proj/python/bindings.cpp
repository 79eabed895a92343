#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "airyline/edge_scaling.hpp"
#include "airyline/errors.hpp"
#include "airyline/io.hpp"
#include "airyline/nevanlinna.hpp"
#include "airyline/special_airy.hpp"
#include "airyline/verify.hpp"

namespace py = pybind11;
using namespace airyline;
using json = nlohmann::json;

namespace {

// Round-trip through the json module; configs are small.
json to_json(const py::object& obj) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return json::parse(dumps(obj).cast<std::string>());
}

py::object from_json(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

io::Config config_from(const py::dict& d) { return io::make_config(to_json(d)); }

py::array_t<double> as_array(const std::vector<double>& v) {
  return py::array_t<double>(py::ssize_t(v.size()), v.data());
}

py::dict airy_eval_py(std::complex<double> w) {
  py::dict out;
  const auto s = airy::airy_eval_scaled(w);
  out["log_abs"] = s.log_abs();
  out["phase"] = s.phase();
  out["method"] = airy::to_string(s.method);
  try {
    const auto v = airy::airy_eval(w);
    out["value"] = v.value;
    out["derivative"] = v.derivative;
  } catch (const AiryRangeError&) {
    out["value"] = py::none();
    out["derivative"] = py::none();
  }
  return out;
}

py::dict scaling_py(const py::dict& cfg, bool variant) {
  const auto s = edge::scaling_for(config_from(cfg).process(), variant);
  py::dict out;
  out["E"] = s.E;
  out["zeta"] = s.zeta;
  out["chi"] = s.chi;
  out["shift"] = s.shift;
  out["A"] = s.A;
  out["B"] = s.B;
  out["R_A"] = s.R_A;
  out["R_B"] = s.R_B;
  return out;
}

py::tuple evolve_py(const py::dict& cfg) {
  const auto c = config_from(cfg);
  dynamics::TrajectoryRecord tr;
  {
    py::gil_scoped_release nogil;
    tr = verify::evolve_from_config(c);
  }
  const std::size_t rows = tr.snapshots.size();
  const std::size_t cols = rows ? tr.snapshots.front().size() : 0;
  py::array_t<double> snaps({py::ssize_t(rows), py::ssize_t(cols)});
  auto m = snaps.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = tr.snapshots[i][j];
  py::dict log;
  log["events"] = tr.log.events.size();
  log["retries"] = tr.log.retries;
  log["sorts"] = tr.log.sorts;
  log["clamps"] = tr.log.clamps;
  return py::make_tuple(as_array(tr.times), snaps, log);
}

py::dict check_airy_like_py(const std::vector<double>& particles, double frak_d, double c_star,
                            bool anchored, bool airy_tail) {
  auto measure = nevanlinna::ParticleMeasure::from_unsorted(
      particles, airy_tail ? nevanlinna::TailMode::airy_tail : nevanlinna::TailMode::none);
  const auto fn = anchored ? nevanlinna::NevanlinnaFn::airy_anchored(std::move(measure))
                           : nevanlinna::NevanlinnaFn::plain(std::move(measure));
  const auto r = nevanlinna::check_airy_like(fn, {frak_d, c_star});
  py::list viol;
  for (const auto& v : r.envelope_violations) viol.append(py::make_tuple(v.w, v.deviation, v.bound));
  py::dict out;
  out["pass"] = r.pass;
  out["poles_bounded"] = r.poles_bounded;
  out["max_pole"] = r.max_pole;
  out["fitted_constant"] = r.fitted_constant;
  out["grid_points"] = r.grid_points;
  out["violations"] = viol;
  return out;
}

py::object run_experiment_py(const std::string& name, const py::dict& cfg, unsigned threads) {
  const auto c = config_from(cfg);
  json rep;
  {
    py::gil_scoped_release nogil;
    rep = verify::run_report(name, c, threads).to_json();
  }
  return from_json(rep);
}

py::object verify_py(const std::string& name, const py::dict& cfg, const std::string& out_dir,
                     unsigned threads) {
  const auto c = config_from(cfg);
  json rep;
  {
    py::gil_scoped_release nogil;
    rep = verify::run(name, c, threads, out_dir, "python: airyline.verify(" + name + ")").report.to_json();
  }
  return from_json(rep);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of airyline";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<AiryRangeError>(m, "AiryRangeError", numerical.ptr());

  m.def("airy_eval", &airy_eval_py, py::arg("w"),
        "Ai and Ai' at complex w; value is None outside double range (log_abs/phase still set).");
  m.def("airy_log_derivative",
        [](std::complex<double> w) { return airy::airy_log_derivative(w); }, py::arg("w"),
        "-Ai'(w)/Ai(w)");
  m.def("airy_zeros", [](std::size_t n) { return as_array(airy::airy_zeros(n).zeros()); },
        py::arg("count"), "First `count` zeros a_1 > a_2 > ...");
  m.def("scaling", &scaling_py, py::arg("config"), py::arg("beta_shift_variant") = false,
        "Edge scaling constants for a process config dict.");
  m.def("sample",
        [](const py::dict& cfg) {
          const auto c = config_from(cfg);
          dynamics::SdeState st;
          {
            py::gil_scoped_release nogil;
            st = verify::sample_from_config(c);
          }
          return as_array(st.particles);
        },
        py::arg("config"), "Stationary sample, non-increasing.");
  m.def("evolve", &evolve_py, py::arg("config"), "Returns (times, snapshots, log summary).");
  m.def("check_airy_like", &check_airy_like_py, py::arg("particles"), py::arg("frak_d") = 0.5,
        py::arg("c_star") = 10.0, py::arg("anchored") = true, py::arg("airy_tail") = true);
  m.def("experiment_names", &verify::experiment_names);
  m.def("run_experiment", &run_experiment_py, py::arg("name"), py::arg("config"),
        py::arg("threads") = 1, "Report dict; nothing written to disk.");
  m.def("verify", &verify_py, py::arg("name"), py::arg("config"), py::arg("out_dir"),
        py::arg("threads") = 1, "Like run_experiment, also writes report/CSV/manifest.");
}
