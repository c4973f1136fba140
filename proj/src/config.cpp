#include "poisest/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poisest/errors.hpp"

namespace poisest {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw Error(ErrorKind::ConfigError,
                  "unknown field \"" + key + "\" in " + context);
    }
  }
}

double get_number(const json& j, const char* key, const std::string& context) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw Error(ErrorKind::ConfigError,
                context + " needs a numeric \"" + std::string(key) + "\"");
  }
  return j[key].get<double>();
}

long get_integer(const json& j, const char* key, const std::string& context) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw Error(ErrorKind::ConfigError,
                context + " needs an integer \"" + std::string(key) + "\"");
  }
  return j[key].get<long>();
}

Vec get_vector(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorKind::ConfigError, context + " must be a non-empty array");
  }
  Vec v(static_cast<int>(j.size()));
  int i = 0;
  for (const auto& x : j) {
    if (!x.is_number()) {
      throw Error(ErrorKind::ConfigError, context + " must contain numbers");
    }
    v[i++] = x.get<double>();
  }
  return v;
}

void apply_box(const json& j, IntensityModel& model) {
  check_keys(j, {"lower", "upper"}, "\"box\"");
  if (!j.contains("lower") || !j.contains("upper")) {
    throw Error(ErrorKind::ConfigError, "\"box\" needs \"lower\" and \"upper\"");
  }
  const Vec lower = get_vector(j["lower"], "\"box.lower\"");
  const Vec upper = get_vector(j["upper"], "\"box.upper\"");
  if (lower.size() != model.param_dim() || upper.size() != model.param_dim()) {
    throw Error(ErrorKind::ConfigError, "box bounds must have length " +
                                            std::to_string(model.param_dim()));
  }
  for (int i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) {
      throw Error(ErrorKind::ConfigError, "box needs lower < upper componentwise");
    }
  }
  model.space.lower = lower;
  model.space.upper = upper;
}

std::pair<IntensityModel, std::optional<Vec>> parse_model(const json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::ConfigError, "\"model\" must be an object");
  }
  if (!j.contains("family") || !j["family"].is_string()) {
    throw Error(ErrorKind::ConfigError, "\"model\" needs a string \"family\"");
  }
  const std::string family = j["family"].get<std::string>();
  IntensityModel model;
  std::optional<Vec> theta;

  auto named_theta = [&](std::initializer_list<const char*> names) {
    bool any = false;
    for (const char* name : names) any = any || j.contains(name);
    if (!any) return;
    if (j.contains("theta")) {
      throw Error(ErrorKind::ConfigError,
                  "give \"theta\" or named parameters, not both");
    }
    Vec v(static_cast<int>(names.size()));
    int i = 0;
    for (const char* name : names) v[i++] = get_number(j, name, "\"model\"");
    theta = v;
  };

  if (family == "gamma") {
    check_keys(j, {"family", "theta", "alpha", "beta", "box"}, "\"model\"");
    model = make_gamma_model();
    named_theta({"alpha", "beta"});
  } else if (family == "gaussian") {
    check_keys(j, {"family", "theta", "mu", "sigma", "box"}, "\"model\"");
    model = make_gaussian_model();
    named_theta({"mu", "sigma"});
  } else if (family == "sine") {
    check_keys(j, {"family", "theta", "phase", "A", "lambda0", "box"}, "\"model\"");
    const double amplitude = get_number(j, "A", "sine model");
    const double lambda0 = get_number(j, "lambda0", "sine model");
    model = make_sine_model(amplitude, lambda0);
    named_theta({"phase"});
  } else if (family == "linear") {
    check_keys(j, {"family", "theta", "basis", "lambda0", "domain", "box"},
               "\"model\"");
    if (!j.contains("basis") || !j["basis"].is_array() || j["basis"].empty()) {
      throw Error(ErrorKind::ConfigError,
                  "linear model needs a non-empty \"basis\" array");
    }
    std::vector<BasisFn> basis;
    for (const auto& b : j["basis"]) {
      if (!b.is_string()) {
        throw Error(ErrorKind::ConfigError, "basis entries must be strings");
      }
      basis.push_back(parse_basis_fn(b.get<std::string>()));
    }
    const double lambda0 = get_number(j, "lambda0", "linear model");
    double a = 0.0;
    double b = 1.0;
    if (j.contains("domain")) {
      check_keys(j["domain"], {"a", "b"}, "\"domain\"");
      a = get_number(j["domain"], "a", "\"domain\"");
      b = get_number(j["domain"], "b", "\"domain\"");
    }
    model = make_linear_model(std::move(basis), lambda0, a, b);
  } else {
    throw Error(ErrorKind::ConfigError, "unknown family \"" + family + "\"");
  }

  if (j.contains("theta")) {
    theta = get_vector(j["theta"], "\"theta\"");
  }
  if (j.contains("box")) apply_box(j["box"], model);
  if (theta.has_value()) model.validate_theta(*theta);
  return {std::move(model), std::move(theta)};
}

MomentSpec parse_moments(const json& j, const IntensityModel& model) {
  check_keys(j, {"g", "inversion"}, "\"moments\"");
  MomentSpec spec = default_moment_spec(model);
  if (j.contains("g")) {
    if (!j["g"].is_array() || j["g"].empty()) {
      throw Error(ErrorKind::ConfigError, "\"moments.g\" must be a non-empty array");
    }
    spec.g.clear();
    for (const auto& g : j["g"]) {
      if (!g.is_string()) {
        throw Error(ErrorKind::ConfigError, "moment functions must be strings");
      }
      spec.g.push_back(parse_basis_fn(g.get<std::string>()));
    }
  }
  if (j.contains("inversion")) {
    if (!j["inversion"].is_string()) {
      throw Error(ErrorKind::ConfigError, "\"moments.inversion\" must be a string");
    }
    const std::string inv = j["inversion"].get<std::string>();
    if (inv == "closed_form") {
      spec.inversion = Inversion::ClosedForm;
    } else if (inv == "numeric") {
      spec.inversion = Inversion::Numeric;
    } else {
      throw Error(ErrorKind::ConfigError, "unknown inversion \"" + inv + "\"");
    }
  }
  if (spec.inversion == Inversion::ClosedForm &&
      model.family != Family::LinearBasis) {
    const MomentSpec canonical = default_moment_spec(model);
    bool same = spec.g.size() == canonical.g.size();
    for (std::size_t i = 0; same && i < spec.g.size(); ++i) {
      same = spec.g[i].name() == canonical.g[i].name();
    }
    if (!same) {
      throw Error(ErrorKind::ConfigError,
                  "closed-form inversion requires the family's canonical moment "
                  "functions; use \"inversion\": \"numeric\" for custom g");
    }
  }
  return spec;
}

EstimatorRequest parse_estimator(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorKind::ConfigError,
                "each estimator needs a string \"kind\"");
  }
  check_keys(j, {"kind", "delta", "s"}, "\"estimators\" entry");
  EstimatorRequest req;
  req.kind = estimator_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("delta")) {
    req.delta = get_number(j, "delta", "estimator");
  } else if (req.kind == EstimatorKind::TwoStepProcess) {
    req.delta = 4.0 / 9.0;
  }
  if (j.contains("s")) {
    if (!j["s"].is_array() || j["s"].empty()) {
      throw Error(ErrorKind::ConfigError, "\"s\" must be a non-empty array");
    }
    req.s_values.clear();
    for (const auto& s : j["s"]) {
      if (!s.is_number()) {
        throw Error(ErrorKind::ConfigError, "\"s\" must contain numbers");
      }
      req.s_values.push_back(s.get<double>());
    }
  }
  return req;
}

}  // namespace

Sampler sampler_from_string(const std::string& text) {
  if (text == "auto") return Sampler::Auto;
  if (text == "thinning") return Sampler::Thinning;
  if (text == "density") return Sampler::ByDensity;
  throw Error(ErrorKind::ConfigError, "unknown sampler \"" + text + "\"");
}

FileConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("config is not valid JSON: ") +
                                            e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorKind::ConfigError, "config root must be an object");
  }
  check_keys(j, {"model", "moments", "simulate", "estimate", "study", "seed",
                 "threads"},
             "config");

  FileConfig cfg;
  if (j.contains("seed")) {
    const long seed = get_integer(j, "seed", "config");
    if (seed < 0) throw Error(ErrorKind::ConfigError, "seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (j.contains("threads")) {
    const long threads = get_integer(j, "threads", "config");
    if (threads < 1) throw Error(ErrorKind::ConfigError, "threads must be >= 1");
    cfg.threads = static_cast<int>(threads);
  }

  if (j.contains("model")) {
    auto [model, theta] = parse_model(j["model"]);
    cfg.model = std::move(model);
    cfg.theta = std::move(theta);
  }
  if (j.contains("moments")) {
    if (!cfg.model.has_value()) {
      throw Error(ErrorKind::ConfigError, "\"moments\" needs a \"model\" section");
    }
    cfg.moments = parse_moments(j["moments"], *cfg.model);
    cfg.moments_given = true;
  } else if (cfg.model.has_value()) {
    cfg.moments = default_moment_spec(*cfg.model);
  }

  if (j.contains("simulate")) {
    check_keys(j["simulate"], {"n", "sampler"}, "\"simulate\"");
    cfg.simulate.given = true;
    cfg.simulate.n = get_integer(j["simulate"], "n", "\"simulate\"");
    if (j["simulate"].contains("sampler")) {
      if (!j["simulate"]["sampler"].is_string()) {
        throw Error(ErrorKind::ConfigError, "\"sampler\" must be a string");
      }
      cfg.simulate.sampler =
          sampler_from_string(j["simulate"]["sampler"].get<std::string>());
    }
  }

  if (j.contains("estimate")) {
    check_keys(j["estimate"], {"mode", "delta", "stride"}, "\"estimate\"");
    cfg.estimate.given = true;
    if (j["estimate"].contains("mode")) {
      if (!j["estimate"]["mode"].is_string()) {
        throw Error(ErrorKind::ConfigError, "\"mode\" must be a string");
      }
      cfg.estimate.mode = j["estimate"]["mode"].get<std::string>();
    }
    if (j["estimate"].contains("delta")) {
      cfg.estimate.delta = get_number(j["estimate"], "delta", "\"estimate\"");
      cfg.estimate.delta_given = true;
    }
    if (j["estimate"].contains("stride")) {
      cfg.estimate.stride = get_integer(j["estimate"], "stride", "\"estimate\"");
    }
  }

  if (j.contains("study")) {
    const json& s = j["study"];
    check_keys(s, {"n", "M", "estimators", "rep_offset", "sampler"}, "\"study\"");
    if (!cfg.model.has_value()) {
      throw Error(ErrorKind::ConfigError, "\"study\" needs a \"model\" section");
    }
    if (!cfg.theta.has_value()) {
      throw Error(ErrorKind::ConfigError,
                  "\"study\" needs true parameters in the model section");
    }
    StudyConfig study;
    study.model = *cfg.model;
    study.theta0 = *cfg.theta;
    study.spec = cfg.moments;
    study.n = get_integer(s, "n", "\"study\"");
    study.M = static_cast<int>(get_integer(s, "M", "\"study\""));
    if (!s.contains("estimators") || !s["estimators"].is_array() ||
        s["estimators"].empty()) {
      throw Error(ErrorKind::ConfigError,
                  "\"study\" needs a non-empty \"estimators\" array");
    }
    for (const auto& e : s["estimators"]) study.estimators.push_back(parse_estimator(e));
    if (s.contains("rep_offset")) {
      const long off = get_integer(s, "rep_offset", "\"study\"");
      if (off < 0) throw Error(ErrorKind::ConfigError, "rep_offset must be >= 0");
      study.rep_offset = static_cast<std::uint64_t>(off);
    }
    if (s.contains("sampler")) {
      if (!s["sampler"].is_string()) {
        throw Error(ErrorKind::ConfigError, "\"sampler\" must be a string");
      }
      study.sampler = sampler_from_string(s["sampler"].get<std::string>());
    }
    study.base_seed = cfg.seed;
    study.threads = cfg.threads;
    cfg.study = std::move(study);
  }
  return cfg;
}

std::pair<IntensityModel, std::optional<Vec>> parse_model_text(
    const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError,
                std::string("model is not valid JSON: ") + e.what());
  }
  return parse_model(j);
}

FileConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace poisest
