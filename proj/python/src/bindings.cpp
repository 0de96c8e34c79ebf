#include <memory>
#include <string>

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ledsna/blackbox.hpp"
#include "ledsna/error.hpp"
#include "ledsna/explain.hpp"
#include "ledsna/io.hpp"
#include "ledsna/metrics.hpp"
#include "ledsna/sampling.hpp"
#include "ledsna/segmentation.hpp"

namespace py = pybind11;
using namespace ledsna;

namespace {

using ImageArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

RgbImage to_image(const ImageArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ContractError("image must be an (height, width, 3) uint8 array");
  const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return RgbImage(w, h, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

ImageArray from_image(const RgbImage& img) {
  ImageArray out({static_cast<py::ssize_t>(img.height()), static_cast<py::ssize_t>(img.width()), py::ssize_t{3}});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

SegmentMap to_segments(const LabelArray& a) {
  if (a.ndim() != 2) throw ContractError("labels must be a (height, width) integer array");
  return SegmentMap(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                    std::vector<std::int32_t>(a.data(), a.data() + a.size()));
}

LabelArray from_segments(const SegmentMap& s) {
  LabelArray out({static_cast<py::ssize_t>(s.height()), static_cast<py::ssize_t>(s.width())});
  std::copy(s.labels().begin(), s.labels().end(), out.mutable_data());
  return out;
}

// A Python callable receives a list of images (arrays) or token lists and
// returns one probability per item.
std::unique_ptr<Classifier> python_classifier(py::function fn) {
  auto call = [fn](std::span<const Instance> batch) {
    py::gil_scoped_acquire gil;
    py::list items;
    for (const auto& inst : batch) {
      if (inst.is_image()) items.append(from_image(inst.as_image()));
      else items.append(py::cast(inst.tokens()));
    }
    return fn(items).cast<std::vector<double>>();
  };
  return std::make_unique<FunctionClassifier>(call, "python", false);
}

std::unique_ptr<Classifier> resolve_blackbox(const py::object& blackbox, const InterpretableSpace& space,
                                             const Instance& instance, std::uint64_t seed) {
  if (py::isinstance<py::str>(blackbox)) {
    return make_classifier(blackbox.cast<std::string>(), BlackBoxContext{&space, &instance, seed});
  }
  if (py::isinstance<py::function>(blackbox) || py::hasattr(blackbox, "__call__")) {
    return python_classifier(blackbox.cast<py::function>());
  }
  throw ContractError("blackbox must be a spec string or a callable");
}

py::object explain_to_python(const Instance& instance, const InterpretableSpace& space, const py::object& blackbox,
                             const ExplainConfig& cfg) {
  auto classifier = resolve_blackbox(blackbox, space, instance, cfg.sampling.seed);
  const Explanation e = explain(instance, space, *classifier, cfg);
  const std::string text = explanation_json(e, instance, space, cfg).dump();
  return py::module_::import("json").attr("loads")(text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dependency-aware local explanations with kernel SVR surrogates";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<BlackBoxError> blackbox_error(m, "BlackBoxError", error.ptr());
  static py::exception<SolverError> solver_error(m, "SolverError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ContractError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const FormatError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const BlackBoxError& e) {
      py::set_error(blackbox_error, e.what());
    } catch (const SolverError& e) {
      py::set_error(solver_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<ExplainConfig>(m, "ExplainConfig")
      .def(py::init<>())
      .def_property(
          "surrogate", [](const ExplainConfig& c) { return std::string(to_string(c.surrogate)); },
          [](ExplainConfig& c, const std::string& v) {
            if (v != "svr" && v != "ridge") throw ContractError("surrogate must be 'svr' or 'ridge'");
            c.surrogate = v == "svr" ? SurrogateKind::kSvr : SurrogateKind::kRidge;
          })
      .def_property(
          "kernel", [](const ExplainConfig& c) { return std::string(to_string(c.kernel)); },
          [](ExplainConfig& c, const std::string& v) {
            if (v != "gaussian" && v != "linear") throw ContractError("kernel must be 'gaussian' or 'linear'");
            c.kernel = v == "gaussian" ? KernelKind::kGaussian : KernelKind::kLinear;
          })
      .def_readwrite("gamma", &ExplainConfig::gamma)
      .def_readwrite("c", &ExplainConfig::c)
      .def_readwrite("epsilon", &ExplainConfig::epsilon)
      .def_readwrite("lambda_", &ExplainConfig::lambda)
      .def_readwrite("k", &ExplainConfig::k)
      .def_property(
          "n_samples", [](const ExplainConfig& c) { return c.sampling.n_samples; },
          [](ExplainConfig& c, std::size_t v) { c.sampling.n_samples = v; })
      .def_property(
          "seed", [](const ExplainConfig& c) { return c.sampling.seed; },
          [](ExplainConfig& c, std::uint64_t v) { c.sampling.seed = v; })
      .def_property(
          "sigma", [](const ExplainConfig& c) { return c.sampling.sigma; },
          [](ExplainConfig& c, std::optional<double> v) { c.sampling.sigma = v; })
      .def_property(
          "metric",
          [](const ExplainConfig& c) -> std::optional<std::string> {
            if (!c.sampling.metric) return std::nullopt;
            return std::string(to_string(*c.sampling.metric));
          },
          [](ExplainConfig& c, std::optional<std::string> v) {
            if (!v) c.sampling.metric.reset();
            else if (*v == "l2") c.sampling.metric = DistanceMetric::kL2;
            else if (*v == "cosine") c.sampling.metric = DistanceMetric::kCosine;
            else throw ContractError("metric must be 'l2' or 'cosine'");
          })
      .def_property(
          "hide_color",
          [](const ExplainConfig& c) -> std::optional<std::tuple<int, int, int>> {
            if (!c.sampling.hide_color) return std::nullopt;
            const Rgb h = *c.sampling.hide_color;
            return std::tuple<int, int, int>{h.r, h.g, h.b};
          },
          [](ExplainConfig& c, std::optional<std::tuple<int, int, int>> v) {
            if (!v) {
              c.sampling.hide_color.reset();
              return;
            }
            const auto [r, g, b] = *v;
            for (const int ch : {r, g, b}) {
              if (ch < 0 || ch > 255) throw ContractError("hide_color channels must be in 0..255");
            }
            c.sampling.hide_color = Rgb{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                        static_cast<std::uint8_t>(b)};
          })
      .def_property(
          "tol", [](const ExplainConfig& c) { return c.solver.tol; },
          [](ExplainConfig& c, double v) { c.solver.tol = v; })
      .def_property(
          "batch_size", [](const ExplainConfig& c) { return c.sampling.query.batch_size; },
          [](ExplainConfig& c, std::size_t v) { c.sampling.query.batch_size = v; });

  m.def(
      "slic",
      [](const ImageArray& image, int k, double compactness, int iterations) {
        return from_segments(slic_segment(to_image(image), SlicParams{k, compactness, iterations}));
      },
      py::arg("image"), py::arg("k") = 50, py::arg("compactness") = 10.0, py::arg("iterations") = 10,
      "SLIC superpixels; returns a (height, width) int32 label map");
  m.def(
      "grid", [](int width, int height, int rows, int cols) { return from_segments(grid_segment(width, height, rows, cols)); },
      py::arg("width"), py::arg("height"), py::arg("rows"), py::arg("cols"));
  m.def(
      "adjacency", [](const LabelArray& labels) { return build_adjacency(to_segments(labels)).edges(); },
      py::arg("labels"), "4-neighbour segment adjacency as sorted (a, b) pairs with a < b");
  m.def(
      "sample_connected",
      [](std::size_t n_vertices, const std::vector<std::pair<std::size_t, std::size_t>>& edges, std::size_t n,
         std::uint64_t seed) {
        SegmentGraph g(n_vertices);
        for (const auto& [a, b] : edges) g.add_edge(a, b);
        const auto masks = sample_connected(g, n, seed);
        py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(n_vertices)});
        auto* p = out.mutable_data();
        for (const auto& mask : masks) p = std::copy(mask.bits().begin(), mask.bits().end(), p);
        return out;
      },
      py::arg("n_vertices"), py::arg("edges"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "explain_image",
      [](const ImageArray& image, const LabelArray& labels, const py::object& blackbox, const ExplainConfig& cfg,
         const std::string& instance_id) {
        const Instance inst = Instance::image(to_image(image), instance_id);
        const auto space = InterpretableSpace::for_image(to_segments(labels));
        return explain_to_python(inst, space, blackbox, cfg);
      },
      py::arg("image"), py::arg("labels"), py::arg("blackbox"), py::arg("config"), py::arg("instance_id") = "");
  m.def(
      "explain_text",
      [](const std::vector<std::string>& tokens, const py::object& blackbox, const ExplainConfig& cfg,
         std::optional<std::vector<std::vector<std::size_t>>> groups, std::size_t window,
         const std::string& instance_id) {
        const Instance inst = Instance::text(tokens, instance_id);
        const DependencyGroups deps = groups ? DependencyGroups(*groups, tokens.size())
                                             : group_tokens(inst, WindowGrouper(window));
        const auto space = InterpretableSpace::for_text(deps);
        return explain_to_python(inst, space, blackbox, cfg);
      },
      py::arg("tokens"), py::arg("blackbox"), py::arg("config"), py::arg("groups") = py::none(),
      py::arg("window") = 1, py::arg("instance_id") = "");
  m.def(
      "overlay",
      [](const ImageArray& image, const LabelArray& labels, const std::vector<std::size_t>& selected) {
        return from_image(render_overlay(to_image(image), to_segments(labels), selected));
      },
      py::arg("image"), py::arg("labels"), py::arg("selected"));

  m.def("approx_error", &approx_error, py::arg("f_x"), py::arg("g_x"));
  m.def(
      "r_squared",
      [](const std::vector<double>& f, const std::vector<double>& g) -> std::optional<double> {
        const auto r = ledsna::r_squared(f, g);
        if (!r.r_squared_defined) return std::nullopt;
        return r.r_squared;
      },
      py::arg("labels"), py::arg("predictions"), "R^2 = 1 - SSE/SST, or None when undefined");

  m.def("read_ppm", [](const std::string& path) { return from_image(io::read_ppm(path)); }, py::arg("path"));
  m.def(
      "write_ppm", [](const std::string& path, const ImageArray& image) { io::write_ppm(path, to_image(image)); },
      py::arg("path"), py::arg("image"));
}
