#pragma once

#include <string>
#include <vector>

#include "poisest/model.hpp"
#include "poisest/paths.hpp"
#include "poisest/quad.hpp"

namespace poisest {

enum class Inversion { ClosedForm, Numeric };

/// Moment functions g_1..g_d plus the strategy for solving M(theta) = a.
struct MomentSpec {
  std::vector<BasisFn> g;
  Inversion inversion = Inversion::ClosedForm;

  [[nodiscard]] int dim() const { return static_cast<int>(g.size()); }
};

/// Family default: g matched to the closed-form inversion
/// (gamma/gaussian: t, t^2; sine: sin(2*pi*t); linear: the basis itself).
[[nodiscard]] MomentSpec default_moment_spec(const IntensityModel& model);

struct EmpiricalMoments {
  Vec a;
  long n = 0;
};

/// a_l = (1/n) sum_j sum_{events} g_l(t).
[[nodiscard]] EmpiricalMoments empirical_moments(const Sample& sample,
                                                 const MomentSpec& spec);

/// M_l(theta) = integral of g_l * lambda(theta) over the window.
[[nodiscard]] Vec moment_map(const IntensityModel& model, const Vec& theta,
                             const MomentSpec& spec, const QuadConfig& cfg = {});

/// J_{lk} = d M_l / d theta_k = integral of g_l * dlambda_k.
[[nodiscard]] Mat moment_jacobian(const IntensityModel& model, const Vec& theta,
                                  const MomentSpec& spec, const QuadConfig& cfg = {});

/// G_{lk} = integral of g_l * g_k * lambda(theta).
[[nodiscard]] Mat g_matrix(const IntensityModel& model, const Vec& theta,
                           const MomentSpec& spec, const QuadConfig& cfg = {});

/// Solve M(theta) = a. Closed form per family, or damped Newton.
[[nodiscard]] Vec invert_moments(const Vec& a, const IntensityModel& model,
                                 const MomentSpec& spec, const QuadConfig& cfg = {});

struct MmeEstimate {
  Vec theta;
  bool in_box = true;
  EmpiricalMoments moments;
};

[[nodiscard]] MmeEstimate mme_estimate(const Sample& sample, const IntensityModel& model,
                                       const MomentSpec& spec,
                                       const QuadConfig& cfg = {});

/// Asymptotic covariance of sqrt(n)(theta* - theta): J^{-1} G J^{-T}.
[[nodiscard]] Mat mme_covariance(const IntensityModel& model, const Vec& theta,
                                 const MomentSpec& spec, const QuadConfig& cfg = {});

struct IdentifiabilityReport {
  double min_separation_010 = 0.0;  // min |M(x)-M(y)| over grid pairs |x-y| > 0.10
  double min_separation_025 = 0.0;  // same with |x-y| > 0.25
  bool flagged = false;             // any reported value < 1e-6
};

/// Grid check that the moment map separates parameters over `space`.
[[nodiscard]] IdentifiabilityReport check_identifiability(
    const IntensityModel& model, const MomentSpec& spec, const ParamSpace& space,
    int points_per_dim = 21, const QuadConfig& cfg = {});

}  // namespace poisest
