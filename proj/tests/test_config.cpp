#include <cmath>

#include "doctest.h"
#include "poisest/config.hpp"
#include "poisest/errors.hpp"

using namespace poisest;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    (void)parse_config_text(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a parse failure");
  return ErrorKind::ConfigError;
}

}  // namespace

TEST_CASE("model section, named parameters and theta array") {
  const FileConfig named =
      parse_config_text(R"({"model": {"family": "gamma", "alpha": 2.0, "beta": 3.0}})");
  REQUIRE(named.model.has_value());
  CHECK(named.model->family == Family::GammaShapeRate);
  REQUIRE(named.theta.has_value());
  CHECK((*named.theta)[0] == 2.0);
  CHECK((*named.theta)[1] == 3.0);

  const FileConfig arr =
      parse_config_text(R"({"model": {"family": "gamma", "theta": [2.0, 3.0]}})");
  CHECK((*arr.theta)[1] == 3.0);

  const FileConfig sine = parse_config_text(
      R"({"model": {"family": "sine", "A": 1.0, "lambda0": 2.0, "phase": 1.0}})");
  CHECK(sine.model->family == Family::SinePhase);
  CHECK(sine.model->amplitude == 1.0);
  CHECK((*sine.theta)[0] == 1.0);

  const FileConfig lin = parse_config_text(
      R"({"model": {"family": "linear", "basis": ["1", "t"], "lambda0": 0.5,
          "domain": {"a": 0.0, "b": 2.0}, "theta": [1.0, 1.0]}})");
  CHECK(lin.model->family == Family::LinearBasis);
  CHECK(lin.model->basis.size() == 2);
  CHECK(lin.model->domain.b == 2.0);
}

TEST_CASE("model box override") {
  const FileConfig cfg = parse_config_text(
      R"({"model": {"family": "gamma", "theta": [2.0, 3.0],
          "box": {"lower": [0.5, 1.0], "upper": [5.0, 6.0]}}})");
  CHECK(cfg.model->space.lower[0] == 0.5);
  CHECK(cfg.model->space.upper[1] == 6.0);
}

TEST_CASE("config rejections") {
  CHECK(kind_of("not json at all{{{") == ErrorKind::ConfigError);
  CHECK(kind_of(R"({"frobnicate": 1})") == ErrorKind::ConfigError);
  CHECK(kind_of(R"({"model": {"family": "gamma", "alpha": 2.0, "beta": 3.0, "x": 1}})") ==
        ErrorKind::ConfigError);
  CHECK(kind_of(R"({"model": {"family": "klein"}})") == ErrorKind::ConfigError);
  CHECK(kind_of(
            R"({"model": {"family": "gamma", "alpha": 1.0, "beta": 1.0, "theta": [1, 1]}})") ==
        ErrorKind::ConfigError);
  CHECK(kind_of(R"({"model": {"family": "gamma", "theta": [-1.0, 1.0]}})") ==
        ErrorKind::NonPositiveIntensity);
  CHECK(kind_of(R"({"model": {"family": "gamma", "theta": [1, 1]},
                    "moments": {"g": ["sin:1", "t"], "inversion": "closed_form"}})") ==
        ErrorKind::ConfigError);
  CHECK(kind_of(R"({"seed": -4})") == ErrorKind::ConfigError);
  CHECK(kind_of(R"({"threads": 0})") == ErrorKind::ConfigError);
}

TEST_CASE("moments section") {
  const FileConfig cfg = parse_config_text(
      R"({"model": {"family": "gamma", "theta": [2.0, 3.0]},
          "moments": {"g": ["t", "t^3"], "inversion": "numeric"}})");
  CHECK(cfg.moments_given);
  CHECK(cfg.moments.inversion == Inversion::Numeric);
  CHECK(cfg.moments.g[1].name() == "t^3");

  const FileConfig dflt =
      parse_config_text(R"({"model": {"family": "sine", "A": 1.0, "lambda0": 2.0}})");
  CHECK_FALSE(dflt.moments_given);
  CHECK(dflt.moments.g.size() == 1);
  CHECK(dflt.moments.g[0].name() == "sin:1");
}

TEST_CASE("simulate, estimate and study sections") {
  const FileConfig cfg = parse_config_text(
      R"({"model": {"family": "gamma", "theta": [2.0, 3.0]},
          "simulate": {"n": 250, "sampler": "thinning"},
          "estimate": {"mode": "twostep", "delta": 0.45, "stride": 5},
          "study": {"n": 100, "M": 4,
                    "estimators": [{"kind": "mme"},
                                   {"kind": "onestep_process", "delta": 0.7, "s": [0.5, 1.0]},
                                   {"kind": "twostep_process"}],
                    "rep_offset": 3},
          "seed": 17, "threads": 2})");
  CHECK(cfg.simulate.given);
  CHECK(cfg.simulate.n == 250);
  CHECK(cfg.simulate.sampler == Sampler::Thinning);
  CHECK(cfg.estimate.given);
  CHECK(cfg.estimate.mode == "twostep");
  CHECK(cfg.estimate.delta == 0.45);
  CHECK(cfg.estimate.stride == 5);
  REQUIRE(cfg.study.has_value());
  CHECK(cfg.study->n == 100);
  CHECK(cfg.study->M == 4);
  CHECK(cfg.study->rep_offset == 3);
  CHECK(cfg.study->base_seed == 17);
  CHECK(cfg.study->threads == 2);
  REQUIRE(cfg.study->estimators.size() == 3);
  CHECK(cfg.study->estimators[0].kind == EstimatorKind::Mme);
  CHECK(cfg.study->estimators[1].s_values == std::vector<double>{0.5, 1.0});
  // twostep_process defaults to the two-step admissible exponent
  CHECK(cfg.study->estimators[2].delta == doctest::Approx(4.0 / 9.0));
  CHECK(cfg.seed == 17);
  CHECK(cfg.threads == 2);
}

TEST_CASE("sampler names") {
  CHECK(sampler_from_string("auto") == Sampler::Auto);
  CHECK(sampler_from_string("thinning") == Sampler::Thinning);
  CHECK(sampler_from_string("density") == Sampler::ByDensity);
  CHECK_THROWS_AS((void)sampler_from_string("magic"), Error);
}

TEST_CASE("bare model text parsing") {
  const auto [model, theta] = parse_model_text(
      R"({"family": "gaussian", "mu": 0.5, "sigma": 1.5})");
  CHECK(model.family == Family::GaussianBell);
  REQUIRE(theta.has_value());
  CHECK((*theta)[1] == 1.5);
}
