// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include <sstream>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "dualground/chain_grammar.hpp"
#include "dualground/cli.hpp"
#include "dualground/dataset_io.hpp"
#include "dualground/eval.hpp"
#include "dualground/geometry.hpp"
#include "dualground/mock_backend.hpp"
#include "dualground/switching.hpp"
#include "dualground/synthetic_env.hpp"

namespace py = pybind11;

namespace dualground {
namespace {

// Reports cross the boundary as JSON text; the Python side parses it.
std::string evaluate_mock(const std::string& scenes_path, const std::string& samples_path,
                          double alpha, std::uint64_t seed, std::size_t parallelism) {
  MockBackend backend(read_scenes(scenes_path), {}, seed);
  EvalConfig cfg;
  cfg.policy.alpha = alpha;
  cfg.seed = static_cast<std::int64_t>(seed);
  cfg.parallelism = parallelism;
  const auto report = evaluate(backend, read_samples(samples_path), cfg);
  auto j = encode(report);
  j["activation"] = encode(activation_report(report));
  return j.dump();
}

std::size_t gen_scenes(const std::string& scenes_path, const std::string& samples_path,
                       std::size_t n, std::uint64_t seed, double icon_fraction) {
  SceneGenParams p;
  p.n_scenes = n;
  p.seed = seed;
  p.icon_fraction = icon_fraction;
  p.validate();
  const auto corpus = generate_scenes(p);
  write_scenes(corpus.scenes, scenes_path);
  write_jsonl(corpus.samples, samples_path);
  return corpus.scenes.size();
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::run(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace
}  // namespace dualground

PYBIND11_MODULE(_dualground, m) {
  using namespace dualground;
  m.doc() = "Dual-system GUI grounding toolkit";

  static py::exception<ChainParseError> chain_error(m, "ChainParseError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ChainParseError& e) {
      chain_error(e.what());
    } catch (const DatasetError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const BackendError& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  py::class_<NormPoint>(m, "NormPoint")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_property_readonly("x", &NormPoint::x)
      .def_property_readonly("y", &NormPoint::y)
      .def(py::self == py::self)
      .def("__repr__", [](const NormPoint& p) {
        return "NormPoint" + format_point(p, kMaxPrecision);
      });

  py::class_<NormBBox>(m, "NormBBox")
      .def(py::init<double, double, double, double>(), py::arg("x_min"), py::arg("y_min"),
           py::arg("x_max"), py::arg("y_max"))
      .def_property_readonly("x_min", &NormBBox::x_min)
      .def_property_readonly("y_min", &NormBBox::y_min)
      .def_property_readonly("x_max", &NormBBox::x_max)
      .def_property_readonly("y_max", &NormBBox::y_max)
      .def(py::self == py::self);

  m.def("hit", &hit, py::arg("point"), py::arg("bbox"));
  m.def("center", &center, py::arg("bbox"));

  py::class_<FastChain>(m, "FastChain")
      .def(py::init<NormPoint>(), py::arg("point"))
      .def_readonly("point", &FastChain::point)
      .def(py::self == py::self);
  py::class_<SlowChain>(m, "SlowChain")
      .def(py::init<std::string, std::optional<std::string>, NormPoint>(), py::arg("summary"),
           py::arg("focus"), py::arg("point"))
      .def_readonly("summary", &SlowChain::summary)
      .def_readonly("focus", &SlowChain::focus)
      .def_readonly("point", &SlowChain::point)
      .def(py::self == py::self);

  m.def("parse_chain", &parse_chain, py::arg("text"));
  // Variant arguments need a default-constructible alternative; overload instead.
  m.def(
      "render_chain", [](const FastChain& c, int precision) { return render_chain(c, precision); },
      py::arg("chain"), py::arg("precision") = kDefaultPrecision);
  m.def(
      "render_chain", [](const SlowChain& c, int precision) { return render_chain(c, precision); },
      py::arg("chain"), py::arg("precision") = kDefaultPrecision);

  py::enum_<Mode>(m, "Mode").value("FAST", Mode::kFast).value("SLOW", Mode::kSlow);
  py::class_<FirstTokenDist>(m, "FirstTokenDist")
      .def(py::init([](double s, double g, double o) { return FirstTokenDist{s, g, o}; }),
           py::arg("p_summary"), py::arg("p_ground"), py::arg("p_other") = 0.0)
      .def_readwrite("p_summary", &FirstTokenDist::p_summary)
      .def_readwrite("p_ground", &FirstTokenDist::p_ground)
      .def_readwrite("p_other", &FirstTokenDist::p_other);
  py::class_<ModeDecision>(m, "ModeDecision")
      .def_readonly("mode", &ModeDecision::mode)
      .def_readonly("p_fast_adj", &ModeDecision::p_fast_adj)
      .def_readonly("p_slow_adj", &ModeDecision::p_slow_adj)
      .def_readonly("fallback_used", &ModeDecision::fallback_used);
  m.def(
      "select_mode",
      [](const FirstTokenDist& d, double alpha) { return select_mode(d, SwitchPolicy{alpha}); },
      py::arg("dist"), py::arg("alpha") = kDefaultAlpha);

  m.def("gen_scenes", &gen_scenes, py::arg("scenes_path"), py::arg("samples_path"),
        py::arg("n") = 100, py::arg("seed") = 0, py::arg("icon_fraction") = 0.4);
  m.def("_evaluate_mock", &evaluate_mock, py::arg("scenes_path"), py::arg("samples_path"),
        py::arg("alpha") = kDefaultAlpha, py::arg("seed") = 0, py::arg("parallelism") = 1);
  m.def("run_cli", &run_cli, py::arg("args"),
        "Runs one command line in-process; returns (exit_code, stdout, stderr).");
}
