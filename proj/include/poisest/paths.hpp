#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "poisest/model.hpp"

namespace poisest {

struct PoissonPath {
  std::vector<double> events;  // strictly increasing

  [[nodiscard]] std::size_t count() const { return events.size(); }
};

struct Sample {
  std::vector<PoissonPath> paths;
  TimeDomain domain;
  std::string model_tag;  // provenance for simulated data, empty otherwise

  [[nodiscard]] long n() const { return static_cast<long>(paths.size()); }
};

/// (base_seed, stream_index) -> generator state, deterministic and injective.
struct SeedSpec {
  std::uint64_t base_seed = 0;
  std::uint64_t stream_index = 0;
};

[[nodiscard]] std::mt19937_64 make_generator(const SeedSpec& seed);

enum class Sampler { Thinning, ByDensity, Auto };

/// Lewis-Shedler thinning under a grid envelope (4096 points, factor 1.001).
[[nodiscard]] PoissonPath simulate_thinning(const IntensityModel& model,
                                            const Vec& theta, const SeedSpec& seed);

/// Order-statistics sampler: K ~ Poisson(total mass), then K iid times with
/// density lambda / total mass.
[[nodiscard]] PoissonPath simulate_by_density(const IntensityModel& model,
                                              const Vec& theta, const SeedSpec& seed);

/// Family-preferred sampler (gamma, gaussian -> density; others -> thinning).
[[nodiscard]] PoissonPath simulate_path(const IntensityModel& model, const Vec& theta,
                                        const SeedSpec& seed,
                                        Sampler sampler = Sampler::Auto);

/// n paths with stream indices rep_offset*n + j, j = 0..n-1.
[[nodiscard]] Sample simulate_sample(const IntensityModel& model, const Vec& theta,
                                     long n, std::uint64_t base_seed,
                                     std::uint64_t rep_index = 0,
                                     Sampler sampler = Sampler::Auto);

/// NDJSON: {"path": <int>, "events": [...]} per line; `.csv` suffix switches to
/// the path_id,t column format.
[[nodiscard]] Sample read_sample(const std::string& file);
void write_sample(const Sample& sample, const std::string& file);

}  // namespace poisest
