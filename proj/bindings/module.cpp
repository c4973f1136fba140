#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "poisest/config.hpp"
#include "poisest/errors.hpp"
#include "poisest/mme.hpp"
#include "poisest/model.hpp"
#include "poisest/multistep.hpp"
#include "poisest/paths.hpp"
#include "poisest/quad.hpp"
#include "poisest/study.hpp"

namespace py = pybind11;
using namespace poisest;

namespace {

Sample sample_from_lists(const std::vector<std::vector<double>>& paths) {
  Sample sample;
  sample.paths.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    PoissonPath path;
    path.events = paths[i];
    for (std::size_t j = 0; j + 1 < path.events.size(); ++j) {
      if (!(path.events[j] < path.events[j + 1])) {
        throw Error(ErrorKind::UnsortedEvents,
                    "path " + std::to_string(i) + ": events not strictly increasing");
      }
    }
    sample.paths.push_back(std::move(path));
  }
  return sample;
}

std::vector<std::vector<double>> lists_from_sample(const Sample& sample) {
  std::vector<std::vector<double>> out;
  out.reserve(sample.paths.size());
  for (const auto& path : sample.paths) out.push_back(path.events);
  return out;
}

MomentSpec spec_for(const IntensityModel& model,
                    const std::optional<std::vector<std::string>>& g,
                    const std::string& inversion) {
  MomentSpec spec = default_moment_spec(model);
  if (g.has_value()) {
    spec.g.clear();
    for (const auto& name : *g) spec.g.push_back(parse_basis_fn(name));
    spec.inversion = Inversion::Numeric;
  }
  if (inversion == "closed_form") {
    spec.inversion = Inversion::ClosedForm;
  } else if (inversion == "numeric") {
    spec.inversion = Inversion::Numeric;
  } else if (!inversion.empty()) {
    throw Error(ErrorKind::ConfigError, "unknown inversion \"" + inversion + "\"");
  }
  return spec;
}

py::dict pipeline_dict(const PipelineResult& result) {
  py::dict out;
  out["estimator"] = to_string(result.kind);
  out["theta"] = result.theta;
  out["preliminary"] = result.preliminary;
  out["N"] = result.N;
  out["flags"] = result.flags;
  if (result.trace.has_value()) {
    py::dict trace;
    trace["k"] = result.trace->k;
    trace["theta"] = result.trace->theta;
    std::vector<bool> clipped(result.trace->clipped.begin(),
                              result.trace->clipped.end());
    trace["clipped"] = clipped;
    out["trace"] = trace;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parameter estimation for inhomogeneous Poisson processes";

  py::register_exception<Error>(m, "EstimationError");

  py::class_<IntensityModel>(m, "Model")
      .def_property_readonly("family", &IntensityModel::family_name)
      .def_property_readonly("param_dim", &IntensityModel::param_dim)
      .def_property_readonly("box",
                             [](const IntensityModel& model) {
                               return py::make_tuple(Vec(model.space.lower),
                                                     Vec(model.space.upper));
                             })
      .def("intensity", &IntensityModel::intensity, py::arg("theta"), py::arg("t"))
      .def("intensity_grad", &IntensityModel::intensity_grad, py::arg("theta"),
           py::arg("t"))
      .def("log_intensity_grad", &IntensityModel::log_intensity_grad,
           py::arg("theta"), py::arg("t"))
      .def("cumulative", &IntensityModel::cumulative, py::arg("theta"), py::arg("t"))
      .def("total_mass", &IntensityModel::total_mass, py::arg("theta"))
      .def("window",
           [](const IntensityModel& model, const Vec& theta) {
             const auto [lo, hi] = model.window(theta);
             return py::make_tuple(lo, hi);
           },
           py::arg("theta"))
      .def("fisher",
           [](const IntensityModel& model, const Vec& theta) {
             return fisher_info(model, theta);
           },
           py::arg("theta"));

  m.def(
      "load_model",
      [](const std::string& text) {
        auto [model, theta] = parse_model_text(text);
        return py::make_tuple(model, theta);
      },
      py::arg("json_text"),
      "Parse a model JSON object; returns (model, theta_or_None).");

  m.def(
      "simulate",
      [](const IntensityModel& model, const Vec& theta, long n, std::uint64_t seed,
         std::uint64_t rep, const std::string& sampler) {
        return lists_from_sample(simulate_sample(model, theta, n, seed, rep,
                                                 sampler_from_string(sampler)));
      },
      py::arg("model"), py::arg("theta"), py::arg("n"), py::arg("seed") = 1,
      py::arg("rep") = 0, py::arg("sampler") = "auto");

  m.def(
      "read_sample",
      [](const std::string& file) { return lists_from_sample(read_sample(file)); },
      py::arg("file"));

  m.def(
      "write_sample",
      [](const std::vector<std::vector<double>>& paths, const std::string& file) {
        write_sample(sample_from_lists(paths), file);
      },
      py::arg("paths"), py::arg("file"));

  m.def(
      "mme",
      [](const IntensityModel& model, const std::vector<std::vector<double>>& paths,
         const std::optional<std::vector<std::string>>& g,
         const std::string& inversion) {
        const MomentSpec spec = spec_for(model, g, inversion);
        const MmeEstimate est = mme_estimate(sample_from_lists(paths), model, spec);
        py::dict out;
        out["theta"] = est.theta;
        out["in_box"] = est.in_box;
        out["moments"] = est.moments.a;
        return out;
      },
      py::arg("model"), py::arg("paths"), py::arg("g") = std::nullopt,
      py::arg("inversion") = "");

  m.def(
      "moment_map",
      [](const IntensityModel& model, const Vec& theta,
         const std::optional<std::vector<std::string>>& g) {
        return moment_map(model, theta, spec_for(model, g, ""));
      },
      py::arg("model"), py::arg("theta"), py::arg("g") = std::nullopt);

  m.def(
      "mme_covariance",
      [](const IntensityModel& model, const Vec& theta,
         const std::optional<std::vector<std::string>>& g) {
        return mme_covariance(model, theta, spec_for(model, g, ""));
      },
      py::arg("model"), py::arg("theta"), py::arg("g") = std::nullopt);

  m.def(
      "learning_size",
      [](long n, double delta, const std::string& mode) {
        const StepMode step_mode =
            mode == "twostep" ? StepMode::TwoStep : StepMode::OneStep;
        if (mode != "onestep" && mode != "twostep") {
          throw Error(ErrorKind::ConfigError,
                      "mode must be \"onestep\" or \"twostep\"");
        }
        return learning_size(n, delta, step_mode).N;
      },
      py::arg("n"), py::arg("delta"), py::arg("mode") = "onestep");

  m.def(
      "path_score",
      [](const IntensityModel& model, const Vec& theta,
         const std::vector<double>& events) {
        PoissonPath path;
        path.events = events;
        return path_score(model, theta, path);
      },
      py::arg("model"), py::arg("theta"), py::arg("events"));

  m.def(
      "estimate",
      [](const IntensityModel& model, const std::vector<std::vector<double>>& paths,
         const std::string& kind, double delta, long stride,
         const std::optional<std::vector<std::string>>& g,
         const std::string& inversion) {
        const MomentSpec spec = spec_for(model, g, inversion);
        return pipeline_dict(estimate_pipeline(model, sample_from_lists(paths), spec,
                                               estimator_kind_from_string(kind),
                                               delta, stride));
      },
      py::arg("model"), py::arg("paths"), py::arg("kind") = "onestep",
      py::arg("delta") = 0.6, py::arg("stride") = 1, py::arg("g") = std::nullopt,
      py::arg("inversion") = "");

  m.def(
      "run_study",
      [](const std::string& config_text) {
        const FileConfig cfg = parse_config_text(config_text);
        if (!cfg.study.has_value()) {
          throw Error(ErrorKind::ConfigError, "config has no \"study\" section");
        }
        const StudyReport report = run_study(*cfg.study);
        return py::make_tuple(report.to_json().dump(2), report.summary_csv());
      },
      py::arg("config_text"),
      "Run a Monte Carlo study from a full JSON config; returns "
      "(report_json, summary_csv).");
}
