#pragma once

#include <random>
#include <utility>
#include <vector>

#include "poisest/model.hpp"

namespace poisest::testing {

inline Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// Uniform draw from the interior of the model's parameter box, shrunk toward
/// a region where the family is numerically comfortable.
inline Vec random_theta(const IntensityModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec lo = model.space.lower, hi = model.space.upper;
  switch (model.family) {
    case Family::GammaShapeRate:
      lo = vec2(0.5, 1.0);
      hi = vec2(5.0, 6.0);
      break;
    case Family::GaussianBell:
      lo = vec2(-3.0, 0.3);
      hi = vec2(3.0, 5.0);
      break;
    default:
      break;
  }
  Vec theta(lo.size());
  for (int i = 0; i < lo.size(); ++i) theta[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
  return theta;
}

/// One default model per family, linear with basis (1, t) on [0, 2].
inline std::vector<IntensityModel> all_families() {
  return {
      make_gamma_model(),
      make_gaussian_model(),
      make_sine_model(1.0, 2.0),
      make_linear_model({BasisFn{BasisFn::Kind::One, 1}, BasisFn{BasisFn::Kind::Poly, 1}},
                        0.5, 0.0, 2.0),
  };
}

/// A time point in the domain interior where the intensity is well away from 0.
inline double random_time(const IntensityModel& model, const Vec& theta,
                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const auto [lo, hi] = model.window(theta);
  if (model.family == Family::GaussianBell) {
    return theta[0] + (2.0 * u(rng) - 1.0) * 2.0 * theta[1];
  }
  if (model.family == Family::GammaShapeRate) {
    return theta[1] / theta[0] * (0.2 + 1.6 * u(rng));
  }
  return lo + (hi - lo) * u(rng);
}

}  // namespace poisest::testing
