#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mrpchan/config.hpp"
#include "mrpchan/error.hpp"
#include "mrpchan/limits.hpp"
#include "mrpchan/models.hpp"
#include "mrpchan/renewal.hpp"
#include "mrpchan/simulate.hpp"

namespace py = pybind11;
using namespace mrpchan;

namespace {

const Channel& need_channel(const ModelConfig& m) {
  if (m.kind != "channel") throw InputError("this operation needs a channel model");
  return m.channel;
}

const StaticModel& need_static(const ModelConfig& m) {
  if (m.kind != "static") throw InputError("this operation needs a static model");
  return m.static_model;
}

py::dict mir_result(const MirResult& r) {
  py::list terms;
  for (const auto& t : r.terms) {
    py::dict d;
    d["from"] = t.from;
    d["inv_m"] = t.inv_m;
    d["p"] = t.law.p;
    d["entropy"] = t.law.entropy;
    d["e_log_s"] = t.law.e_log_s;
    d["value"] = t.value;
    terms.append(d);
  }
  py::dict out;
  out["terms"] = terms;
  out["value"] = r.value;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mutual information of Markov renewal channels";
  m.attr("__version__") = MRPCHAN_VERSION;

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<InputError> input_error(m, "InputError", error.ptr());
  static py::exception<CapabilityError> capability_error(m, "CapabilityError", error.ptr());
  static py::exception<NumericError> numeric_error(m, "NumericError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      PyErr_SetString(input_error.ptr(), e.what());
    } catch (const CapabilityError& e) {
      PyErr_SetString(capability_error.ptr(), e.what());
    } catch (const NumericError& e) {
      PyErr_SetString(numeric_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<ModelConfig>(m, "Model")
      .def_static("builtin", &builtin_config, py::arg("name"))
      .def_static("from_file", &load_config, py::arg("path"))
      .def_static("from_json", [](const std::string& text) {
        try {
          return parse_config(nlohmann::json::parse(text));
        } catch (const nlohmann::json::exception& e) {
          throw InputError(e.what());
        }
      }, py::arg("text"))
      .def_readonly("kind", &ModelConfig::kind)
      .def_property_readonly("hash", &ModelConfig::hash)
      .def_property_readonly("states", [](const ModelConfig& c) {
        return c.kind == "channel" ? c.channel.kernel.states() : c.static_model.blocks.front().states();
      })
      .def("to_json", [](const ModelConfig& c) { return c.document.dump(); })
      .def("__repr__", [](const ModelConfig& c) { return "<mrpchan.Model " + c.kind + " " + c.hash() + ">"; });

  m.def("builtin_models", [] {
    auto names = builtin_channels();
    names.push_back("gene-static");
    return names;
  });

  m.def("mir", [](const ModelConfig& model) {
    const ChannelMir r = mir_channel(prepare_channel(need_channel(model)));
    py::dict out;
    out["mir"] = r.mir;
    out["formula"] = r.formula;
    out["joint"] = mir_result(r.joint);
    out["output"] = mir_result(r.output);
    return out;
  }, py::arg("model"));

  m.def("mi_exact", [](const ModelConfig& model, double T) {
    const ExactMI e = mi_exact(prepare_channel(need_channel(model)), T);
    py::dict out;
    out["mi"] = e.mi;
    out["joint_term"] = e.joint_term;
    out["output_term"] = e.output_term;
    return out;
  }, py::arg("model"), py::arg("T"));

  m.def("mi_mc", [](const ModelConfig& model, double T, std::size_t n_traj, std::uint64_t seed, unsigned threads) {
    const Channel& c = need_channel(model);
    const ChannelSystems cs = prepare_channel(c);
    MCEstimate e;
    {
      py::gil_scoped_release release;
      e = mc_mi_dynamic(c, cs, T, MCOptions{n_traj, seed, threads});
    }
    py::dict out;
    out["mi"] = e.value;
    out["se"] = e.se;
    out["samples"] = e.samples;
    out["discarded"] = e.discarded;
    return out;
  }, py::arg("model"), py::arg("T"), py::arg("n_traj") = 10000, py::arg("seed") = 1, py::arg("threads") = 1);

  m.def("contour", [](const ModelConfig& model, std::vector<double> T, const std::vector<double>& pis,
                      std::size_t n_traj, std::uint64_t seed, unsigned threads) {
    const StaticModel& s = need_static(model);
    std::sort(T.begin(), T.end());
    MCGrid g;
    {
      py::gil_scoped_release release;
      g = mc_mi_static(s, binary_priors(pis), T, MCOptions{n_traj, seed, threads});
    }
    py::dict out;
    out["T"] = T;
    out["pi"] = pis;
    out["mi"] = g.value;
    out["se"] = g.se;
    out["samples"] = g.samples;
    return out;
  }, py::arg("model"), py::arg("T"), py::arg("pi"), py::arg("n_traj") = 10000, py::arg("seed") = 1,
     py::arg("threads") = 1);

  m.def("gene_f_tau", [](const std::vector<double>& t, double R) {
    const ExpPoly f = gene_f_tau(GeneModelParams{}, R);
    std::vector<double> v;
    v.reserve(t.size());
    for (double x : t) v.push_back(f(x));
    return v;
  }, py::arg("t"), py::arg("R") = 10.0, "Inter-arrival density of the gene output at concentration R (nM).");

  m.def("simulate", [](const ModelConfig& model, double T, std::uint64_t seed, std::uint64_t index) {
    const Channel& c = need_channel(model);
    const Trajectory tr = simulate_mrp(c.kernel, c.kernel.index(c.initial), T, seed, index);
    std::vector<std::string> labels;
    for (auto s : tr.states) labels.push_back(c.kernel.label(s));
    return py::make_tuple(tr.times, labels, tr.absorbed);
  }, py::arg("model"), py::arg("T"), py::arg("seed") = 1, py::arg("index") = 0);
}
