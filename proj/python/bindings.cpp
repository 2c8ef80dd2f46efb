#include "asip/battery.hpp"
#include "asip/blocks.hpp"
#include "asip/chain_io.hpp"
#include "asip/lp_norm.hpp"
#include "asip/mixing.hpp"
#include "asip/moments.hpp"
#include "asip/report.hpp"
#include "asip/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace asip;

namespace {

py::dict mixing_dict(const MixingReport& m) {
  py::dict out;
  out["alpha"] = m.alpha;
  out["phi"] = m.phi;
  out["dobrushin"] = m.dobrushin;
  out["rho"] = m.rho;
  out["delta_pi"] = m.delta_pi;
  out["rho_sup"] = m.rho_sup;
  out["C"] = m.envelope.c;
  out["delta"] = m.envelope.delta;
  out["degenerate"] = m.envelope.degenerate;
  out["n0"] = m.envelope.n0 ? py::cast(*m.envelope.n0) : py::none();
  return out;
}

py::list blocks_list(const BlockPartition& part) {
  py::list out;
  for (const auto& b : part.blocks) {
    py::dict d;
    d["a"] = b.a;
    d["b"] = b.b;
    d["i_last"] = b.i_last;
    d["variance"] = b.variance;
    d["theta_cov"] = b.theta_cov;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact moments, mixing coefficients and block partitions for finite-state Markov chains.";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ConstructionError>(m, "ConstructionError", PyExc_RuntimeError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);

  py::class_<ChainSpec>(m, "Chain")
      .def_property_readonly("horizon", &ChainSpec::horizon)
      .def_property_readonly("dimension", &ChainSpec::dimension)
      .def_property_readonly("bound", &ChainSpec::bound)
      .def_property_readonly("kind", &ChainSpec::kind)
      .def("kernel", &ChainSpec::kernel, py::arg("j"))
      .def("observable", &ChainSpec::observable, py::arg("j"))
      .def("marginal", [](const ChainSpec& c, Time j) { return Vector(c.marginal(j)); }, py::arg("j"));

  m.def("load_chain", [](const std::string& path) { return load_chain(path); }, py::arg("path"));
  m.def("parse_chain", [](const std::string& text) { return parse_chain(nlohmann::json::parse(text)); },
        py::arg("text"));
  m.def("battery_chain", &battery_chain, py::arg("name"));
  m.def("battery_names", [] {
    std::vector<std::string> names;
    for (const auto& e : default_battery()) names.push_back(e.name);
    return names;
  });

  m.def("mean", &mean_obs, py::arg("chain"), py::arg("j"));
  m.def("covariance", &cov_partial_sum, py::arg("chain"), py::arg("n"), py::arg("m"),
        "Cov(X_n + ... + X_m).");
  m.def(
      "variance",
      [](const ChainSpec& c, Time first, Time last, const Vector& u) { return set_variance(c, IndexSet(first, last), u); },
      py::arg("chain"), py::arg("first"), py::arg("last"), py::arg("u"));
  m.def(
      "lp_norm",
      [](const ChainSpec& c, Time first, Time last, const Vector& u, double p, bool moment_route) {
        LpOptions opt;
        opt.moment_route = moment_route;
        const auto r = lp_norm(c, IndexSet(first, last), u, p, opt);
        py::dict out;
        out["value"] = r.value;
        out["exact"] = r.exact;
        out["std_error"] = r.std_error;
        return out;
      },
      py::arg("chain"), py::arg("first"), py::arg("last"), py::arg("u"), py::arg("p"),
      py::arg("moment_route") = true);

  m.def(
      "mixing", [](const ChainSpec& c, Time k_max) { return mixing_dict(analyze_mixing(c, k_max)); },
      py::arg("chain"), py::arg("k_max") = 12);

  m.def(
      "build_blocks",
      [](const ChainSpec& c, const Vector& u0, double amplitude, Time r, Time horizon) {
        return blocks_list(build_blocks(c, u0, amplitude, r, horizon));
      },
      py::arg("chain"), py::arg("u0"), py::arg("amplitude"), py::arg("r"), py::arg("horizon"));

  m.def(
      "ks_curve",
      [](const ChainSpec& c, Time horizon, std::size_t paths, std::uint64_t seed, std::vector<Time> checkpoints,
         const Vector& u) {
        SampleRequest req;
        req.horizon = horizon;
        req.paths = paths;
        req.seed = seed;
        req.checkpoints = std::move(checkpoints);
        req.directions = {u};
        py::list out;
        for (const auto& pt : clt_diagnostic(c, sample_paths(c, req))) {
          py::dict d;
          d["n"] = pt.n;
          d["ks"] = pt.ks;
          d["std_error"] = pt.std_error;
          d["skipped"] = pt.skipped;
          out.append(d);
        }
        return out;
      },
      py::arg("chain"), py::arg("horizon"), py::arg("paths"), py::arg("seed"), py::arg("checkpoints"), py::arg("u"));

  m.attr("__version__") = version();
}
