#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "poisest/mme.hpp"
#include "poisest/model.hpp"
#include "poisest/paths.hpp"
#include "poisest/study.hpp"

namespace poisest {

/// Parsed contents of a JSON config file. Unknown fields anywhere are a
/// ConfigError; sections are optional and commands check for what they need.
struct FileConfig {
  std::optional<IntensityModel> model;
  std::optional<Vec> theta;  // true / reference parameter from the model section

  MomentSpec moments;  // family default unless a "moments" section is present
  bool moments_given = false;

  struct SimulateSection {
    long n = 0;
    Sampler sampler = Sampler::Auto;
    bool given = false;
  } simulate;

  struct EstimateSection {
    std::string mode = "onestep";  // mme | onestep | twostep
    double delta = 0.6;
    long stride = 1;
    bool delta_given = false;
    bool given = false;
  } estimate;

  std::optional<StudyConfig> study;  // model/theta0/spec/seed/threads filled in

  std::uint64_t seed = 1;
  int threads = 1;
};

[[nodiscard]] FileConfig parse_config_file(const std::string& path);
[[nodiscard]] FileConfig parse_config_text(const std::string& text);

/// Parse a bare model object (the contents of the "model" section).
[[nodiscard]] std::pair<IntensityModel, std::optional<Vec>> parse_model_text(
    const std::string& text);

[[nodiscard]] Sampler sampler_from_string(const std::string& text);

}  // namespace poisest
