#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace poisest {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Family { LinearBasis, GammaShapeRate, GaussianBell, SinePhase };

enum class DomainKind { FiniteInterval, HalfLine, RealLine };

struct TimeDomain {
  DomainKind kind = DomainKind::FiniteInterval;
  double a = 0.0;
  double b = 1.0;
  /// Horizon used to truncate infinite domains for quadrature and sampling.
  double truncation = 1.0;
};

/// Axis-aligned open box approximating the parameter set.
struct ParamSpace {
  Vec lower;
  Vec upper;

  [[nodiscard]] bool contains(const Vec& theta) const;
  /// Componentwise clip into the open box, `margin` away from each face.
  [[nodiscard]] Vec clip_interior(const Vec& theta, double margin = 1e-6) const;
  [[nodiscard]] Vec center() const { return 0.5 * (lower + upper); }
};

/// Basis / moment function mini-grammar: 1, t^k, sin(2*pi*k*t), cos(2*pi*k*t).
struct BasisFn {
  enum class Kind { One, Poly, Sin, Cos };
  Kind kind = Kind::One;
  int order = 1;  // polynomial degree or frequency multiple

  [[nodiscard]] double operator()(double t) const;
  /// Antiderivative F with F(0) = 0.
  [[nodiscard]] double antiderivative(double t) const;
  [[nodiscard]] std::string name() const;
};

[[nodiscard]] BasisFn parse_basis_fn(const std::string& text);

class IntensityModel {
 public:
  Family family = Family::GammaShapeRate;
  TimeDomain domain;
  ParamSpace space;
  double lambda0 = 0.0;    // baseline (LinearBasis, SinePhase)
  double amplitude = 1.0;  // A (SinePhase)
  std::vector<BasisFn> basis;  // LinearBasis only

  [[nodiscard]] int param_dim() const;
  [[nodiscard]] bool normalized() const {
    return family == Family::GammaShapeRate || family == Family::GaussianBell;
  }

  [[nodiscard]] double intensity(const Vec& theta, double t) const;
  [[nodiscard]] Vec intensity_grad(const Vec& theta, double t) const;
  [[nodiscard]] Vec log_intensity_grad(const Vec& theta, double t) const;
  [[nodiscard]] double cumulative(const Vec& theta, double t) const;
  [[nodiscard]] double total_mass(const Vec& theta) const;

  /// Integration bounds for this theta (truncated for infinite domains).
  [[nodiscard]] std::pair<double, double> window(const Vec& theta) const;

  /// Dimension + family positivity preconditions; throws on violation.
  void validate_theta(const Vec& theta) const;

  [[nodiscard]] std::string family_name() const;
};

[[nodiscard]] IntensityModel make_gamma_model();
[[nodiscard]] IntensityModel make_gaussian_model();
[[nodiscard]] IntensityModel make_sine_model(double amplitude, double lambda0);
[[nodiscard]] IntensityModel make_linear_model(std::vector<BasisFn> basis,
                                               double lambda0, double a, double b);

}  // namespace poisest
