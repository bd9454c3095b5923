#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "earda/cli.hpp"
#include "earda/dann.hpp"
#include "earda/errors.hpp"
#include "earda/eval.hpp"
#include "earda/signal.hpp"

namespace py = pybind11;
using namespace earda;

namespace {

py::dict windows_to_dict(std::span<const datasets::LabeledWindow> windows) {
  const auto n = static_cast<py::ssize_t>(windows.size());
  py::array_t<double> x({n, static_cast<py::ssize_t>(datasets::kWindowLength),
                         static_cast<py::ssize_t>(datasets::kWindowChannels)});
  std::vector<int> label, domain, head;
  auto xv = x.mutable_unchecked<3>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& w = windows[static_cast<std::size_t>(i)];
    for (py::ssize_t t = 0; t < xv.shape(1); ++t)
      for (py::ssize_t c = 0; c < xv.shape(2); ++c) xv(i, t, c) = w.data(t, c);
    label.push_back(to_index(w.label));
    domain.push_back(to_index(w.domain));
    head.push_back(to_index(w.head));
  }
  auto column = [n](const std::vector<int>& v) { return py::array_t<int>(n, v.data()); };
  py::dict d;
  d["x"] = x;
  d["label"] = column(label);
  d["domain"] = column(domain);
  d["head"] = column(head);
  return d;
}

std::vector<ActivityLabel> to_labels(const std::vector<int>& codes) {
  std::vector<ActivityLabel> out;
  for (int c : codes) out.push_back(activity_from_index(c));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Earable activity recognition with adversarial domain adaptation";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ShapeError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const IndexError& e) {
      PyErr_SetString(PyExc_IndexError, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.attr("ACTIVITIES") = py::make_tuple("walking", "upstairs", "standing", "jogging");

  m.def("magnitude",
        [](std::vector<double> x, std::vector<double> y, std::vector<double> z) {
          return signal::magnitude(x, y, z);
        },
        py::arg("x"), py::arg("y"), py::arg("z"));
  m.def("low_pass",
        [](std::vector<double> series, double rate_hz, double cutoff_hz, int order, bool zero_phase) {
          return signal::low_pass(series, signal::FilterSpec{cutoff_hz, order, zero_phase}, rate_hz);
        },
        py::arg("series"), py::arg("rate_hz"), py::arg("cutoff_hz") = 5.0, py::arg("order") = 4,
        py::arg("zero_phase") = true);
  m.def("resample",
        [](std::vector<double> series, double from_hz, double to_hz) {
          return signal::resample(series, from_hz, to_hz);
        },
        py::arg("series"), py::arg("from_hz"), py::arg("to_hz"));
  m.def("spectrum",
        [](std::vector<double> series, double rate_hz) {
          auto s = signal::spectrum(series, rate_hz);
          return py::make_tuple(s.freqs, s.magnitudes);
        },
        py::arg("series"), py::arg("rate_hz"));

  m.def("synth_pack",
        [](std::uint64_t seed, std::size_t per_class, bool domain_shift) {
          datasets::SynthConfig cfg;
          cfg.per_class = per_class;
          cfg.domain_shift = domain_shift;
          const auto pack = datasets::synth_generate(cfg, seed);
          py::dict d;
          d["source"] = windows_to_dict(pack.source);
          d["target"] = windows_to_dict(pack.target);
          return d;
        },
        py::arg("seed") = 0, py::arg("per_class") = 50, py::arg("domain_shift") = true);
  m.def("load_windows",
        [](const std::string& path) { return windows_to_dict(datasets::load_windows(path)); },
        py::arg("path"));

  py::class_<dann::DannModel>(m, "Model")
      .def_property_readonly("lambda_", [](const dann::DannModel& d) { return d.lambda; })
      .def_property_readonly("seed", [](const dann::DannModel& d) { return d.seed; })
      .def_property_readonly("has_domain_head", [](const dann::DannModel& d) { return d.has_domain_head; })
      .def("predict",
           [](const dann::DannModel& d, const Eigen::MatrixXd& window) {
             const auto p = dann::predict(d, window);
             return py::make_tuple(to_index(p.label), p.probabilities);
           },
           py::arg("window"));
  m.def("load_checkpoint", [](const std::string& path) { return dann::load_checkpoint(path); },
        py::arg("path"));

  m.def("eval_report",
        [](const std::vector<int>& truths, const std::vector<int>& predictions,
           std::optional<std::vector<int>> groups) {
          const auto t = to_labels(truths);
          const auto p = to_labels(predictions);
          std::vector<HeadMovement> g;
          if (groups)
            for (int c : *groups) g.push_back(head_movement_from_index(c));
          const auto r = groups ? eval::report(t, p, std::span<const HeadMovement>(g))
                                : eval::report(t, p);
          return eval::to_json(r).dump();
        },
        py::arg("truths"), py::arg("predictions"), py::arg("groups") = py::none());

  m.def("run_cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "earda");
          std::vector<const char*> argv;
          for (const auto& a : args) argv.push_back(a.c_str());
          return cli::run(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"));
}
