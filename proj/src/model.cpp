#include "poisest/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "poisest/errors.hpp"
#include "poisest/special.hpp"

namespace poisest {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTailMass = 1e-12;
constexpr double kHalfLineEps = 1e-12;
}  // namespace

bool ParamSpace::contains(const Vec& theta) const {
  if (theta.size() != lower.size()) {
    throw Error(ErrorKind::DimensionMismatch, "theta vs ParamSpace");
  }
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!(theta[i] > lower[i] && theta[i] < upper[i])) return false;
  }
  return true;
}

Vec ParamSpace::clip_interior(const Vec& theta, double margin) const {
  if (theta.size() != lower.size()) {
    throw Error(ErrorKind::DimensionMismatch, "theta vs ParamSpace");
  }
  Vec out = theta;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(out[i], lower[i] + margin, upper[i] - margin);
  }
  return out;
}

double BasisFn::operator()(double t) const {
  switch (kind) {
    case Kind::One: return 1.0;
    case Kind::Poly: return std::pow(t, order);
    case Kind::Sin: return std::sin(kTwoPi * order * t);
    case Kind::Cos: return std::cos(kTwoPi * order * t);
  }
  return 0.0;
}

double BasisFn::antiderivative(double t) const {
  switch (kind) {
    case Kind::One: return t;
    case Kind::Poly: return std::pow(t, order + 1) / (order + 1);
    case Kind::Sin: return (1.0 - std::cos(kTwoPi * order * t)) / (kTwoPi * order);
    case Kind::Cos: return std::sin(kTwoPi * order * t) / (kTwoPi * order);
  }
  return 0.0;
}

std::string BasisFn::name() const {
  switch (kind) {
    case Kind::One: return "1";
    case Kind::Poly: return order == 1 ? "t" : "t^" + std::to_string(order);
    case Kind::Sin: return "sin:" + std::to_string(order);
    case Kind::Cos: return "cos:" + std::to_string(order);
  }
  return "?";
}

BasisFn parse_basis_fn(const std::string& text) {
  if (text == "1") return {BasisFn::Kind::One, 1};
  if (text == "t") return {BasisFn::Kind::Poly, 1};
  auto order_after = [&](std::size_t pos) {
    const std::string tail = text.substr(pos);
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(tail, &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigError, "bad basis function '" + text + "'");
    }
    if (used != tail.size() || k < 1) {
      throw Error(ErrorKind::ConfigError, "bad basis function '" + text + "'");
    }
    return k;
  };
  if (text.rfind("t^", 0) == 0) return {BasisFn::Kind::Poly, order_after(2)};
  if (text.rfind("sin:", 0) == 0) return {BasisFn::Kind::Sin, order_after(4)};
  if (text.rfind("cos:", 0) == 0) return {BasisFn::Kind::Cos, order_after(4)};
  throw Error(ErrorKind::ConfigError,
              "unknown basis function '" + text + "' (use 1, t, t^k, sin:k, cos:k)");
}

int IntensityModel::param_dim() const {
  switch (family) {
    case Family::LinearBasis: return static_cast<int>(basis.size());
    case Family::GammaShapeRate: return 2;
    case Family::GaussianBell: return 2;
    case Family::SinePhase: return 1;
  }
  return 0;
}

std::string IntensityModel::family_name() const {
  switch (family) {
    case Family::LinearBasis: return "linear";
    case Family::GammaShapeRate: return "gamma";
    case Family::GaussianBell: return "gaussian";
    case Family::SinePhase: return "sine";
  }
  return "?";
}

void IntensityModel::validate_theta(const Vec& theta) const {
  if (theta.size() != param_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "theta dimension for " + family_name());
  }
  if (!theta.allFinite()) {
    throw Error(ErrorKind::DomainError, "non-finite theta");
  }
  switch (family) {
    case Family::GammaShapeRate:
      if (!(theta[0] > 0.0 && theta[1] > 0.0)) {
        throw Error(ErrorKind::NonPositiveIntensity, "gamma requires alpha, beta > 0");
      }
      break;
    case Family::GaussianBell:
      if (!(theta[1] > 0.0)) {
        throw Error(ErrorKind::NonPositiveIntensity, "gaussian requires sigma > 0");
      }
      break;
    case Family::SinePhase:
    case Family::LinearBasis:
      break;
  }
}

namespace {

void check_time_in_domain(const IntensityModel& m, double t) {
  switch (m.domain.kind) {
    case DomainKind::FiniteInterval:
      if (t < m.domain.a || t > m.domain.b) {
        throw Error(ErrorKind::DomainError, "t outside observation interval");
      }
      break;
    case DomainKind::HalfLine:
      if (t <= 0.0) throw Error(ErrorKind::DomainError, "t must be positive");
      break;
    case DomainKind::RealLine:
      break;
  }
  if (!std::isfinite(t)) throw Error(ErrorKind::DomainError, "non-finite t");
}

}  // namespace

double IntensityModel::intensity(const Vec& theta, double t) const {
  validate_theta(theta);
  check_time_in_domain(*this, t);
  switch (family) {
    case Family::LinearBasis: {
      double v = lambda0;
      for (std::size_t l = 0; l < basis.size(); ++l) v += theta[static_cast<Eigen::Index>(l)] * basis[l](t);
      if (!(v > 0.0)) {
        throw Error(ErrorKind::NonPositiveIntensity, "linear intensity <= 0 at probed t");
      }
      return v;
    }
    case Family::GammaShapeRate: {
      const double alpha = theta[0], beta = theta[1];
      return std::exp(beta * std::log(alpha) + (beta - 1.0) * std::log(t) -
                      alpha * t - std::lgamma(beta));
    }
    case Family::GaussianBell: {
      const double mu = theta[0], sigma = theta[1];
      const double z = (t - mu) / sigma;
      return std::exp(-0.5 * z * z) / (sigma * std::sqrt(kTwoPi));
    }
    case Family::SinePhase: {
      const double v = amplitude * std::sin(kTwoPi * t + theta[0]) + lambda0;
      if (!(v > 0.0)) {
        throw Error(ErrorKind::NonPositiveIntensity, "sine intensity <= 0 at probed t");
      }
      return v;
    }
  }
  throw Error(ErrorKind::ConfigError, "unreachable family");
}

Vec IntensityModel::log_intensity_grad(const Vec& theta, double t) const {
  validate_theta(theta);
  check_time_in_domain(*this, t);
  Vec g(param_dim());
  switch (family) {
    case Family::LinearBasis: {
      const double lam = intensity(theta, t);
      for (std::size_t l = 0; l < basis.size(); ++l) g[static_cast<Eigen::Index>(l)] = basis[l](t) / lam;
      return g;
    }
    case Family::GammaShapeRate: {
      const double alpha = theta[0], beta = theta[1];
      g[0] = beta / alpha - t;
      g[1] = std::log(alpha * t) - digamma(beta);
      return g;
    }
    case Family::GaussianBell: {
      const double mu = theta[0], sigma = theta[1];
      const double z = (t - mu) / sigma;
      g[0] = z / sigma;
      g[1] = (z * z - 1.0) / sigma;
      return g;
    }
    case Family::SinePhase: {
      g[0] = amplitude * std::cos(kTwoPi * t + theta[0]) / intensity(theta, t);
      return g;
    }
  }
  throw Error(ErrorKind::ConfigError, "unreachable family");
}

Vec IntensityModel::intensity_grad(const Vec& theta, double t) const {
  if (family == Family::LinearBasis) {
    validate_theta(theta);
    check_time_in_domain(*this, t);
    Vec g(param_dim());
    for (std::size_t l = 0; l < basis.size(); ++l) g[static_cast<Eigen::Index>(l)] = basis[l](t);
    return g;
  }
  return intensity(theta, t) * log_intensity_grad(theta, t);
}

double IntensityModel::cumulative(const Vec& theta, double t) const {
  validate_theta(theta);
  switch (family) {
    case Family::LinearBasis: {
      const double tt = std::clamp(t, domain.a, domain.b);
      double v = lambda0 * (tt - domain.a);
      for (std::size_t l = 0; l < basis.size(); ++l) {
        v += theta[static_cast<Eigen::Index>(l)] *
             (basis[l].antiderivative(tt) - basis[l].antiderivative(domain.a));
      }
      return v;
    }
    case Family::GammaShapeRate: {
      if (t <= 0.0) return 0.0;
      if (std::isinf(t)) return 1.0;
      return gamma_p(theta[1], theta[0] * t);
    }
    case Family::GaussianBell:
      return normal_cdf((t - theta[0]) / theta[1]);
    case Family::SinePhase: {
      const double tt = std::clamp(t, domain.a, domain.b);
      return lambda0 * (tt - domain.a) +
             amplitude / kTwoPi *
                 (std::cos(kTwoPi * domain.a + theta[0]) - std::cos(kTwoPi * tt + theta[0]));
    }
  }
  throw Error(ErrorKind::ConfigError, "unreachable family");
}

double IntensityModel::total_mass(const Vec& theta) const {
  if (normalized()) {
    validate_theta(theta);
    return 1.0;
  }
  return cumulative(theta, domain.b);
}

std::pair<double, double> IntensityModel::window(const Vec& theta) const {
  validate_theta(theta);
  switch (domain.kind) {
    case DomainKind::FiniteInterval:
      return {domain.a, domain.b};
    case DomainKind::HalfLine:
      if (family == Family::GammaShapeRate) {
        return {kHalfLineEps, gamma_tail_horizon(theta[1], theta[0], kTailMass)};
      }
      return {kHalfLineEps, domain.truncation};
    case DomainKind::RealLine:
      if (family == Family::GaussianBell) {
        return {theta[0] - 8.0 * theta[1], theta[0] + 8.0 * theta[1]};
      }
      return {-domain.truncation, domain.truncation};
  }
  throw Error(ErrorKind::ConfigError, "unreachable domain");
}

IntensityModel make_gamma_model() {
  IntensityModel m;
  m.family = Family::GammaShapeRate;
  m.domain.kind = DomainKind::HalfLine;
  m.space.lower = Vec::Constant(2, 0.01);
  m.space.upper = Vec::Constant(2, 100.0);
  // bookkeeping horizon at the heaviest-tail box corner (smallest rate, largest shape)
  m.domain.truncation = gamma_tail_horizon(m.space.upper[1], m.space.lower[0], kTailMass);
  return m;
}

IntensityModel make_gaussian_model() {
  IntensityModel m;
  m.family = Family::GaussianBell;
  m.domain.kind = DomainKind::RealLine;
  m.space.lower = Vec(2);
  m.space.upper = Vec(2);
  m.space.lower << -10.0, 0.05;
  m.space.upper << 10.0, 10.0;
  m.domain.truncation = m.space.upper[0] + 8.0 * m.space.upper[1];
  return m;
}

IntensityModel make_sine_model(double amplitude, double lambda0) {
  if (amplitude < 0.0 || lambda0 <= amplitude) {
    throw Error(ErrorKind::NonPositiveIntensity,
                "sine family requires 0 <= A < lambda0");
  }
  IntensityModel m;
  m.family = Family::SinePhase;
  m.domain = {DomainKind::FiniteInterval, 0.0, 1.0, 1.0};
  m.amplitude = amplitude;
  m.lambda0 = lambda0;
  m.space.lower = Vec::Constant(1, 0.2);
  m.space.upper = Vec::Constant(1, 2.9);
  return m;
}

IntensityModel make_linear_model(std::vector<BasisFn> basis, double lambda0,
                                 double a, double b) {
  if (basis.empty()) throw Error(ErrorKind::ConfigError, "linear model needs a basis");
  if (!(a < b)) throw Error(ErrorKind::ConfigError, "interval requires a < b");
  if (lambda0 < 0.0) throw Error(ErrorKind::ConfigError, "lambda0 must be >= 0");
  IntensityModel m;
  m.family = Family::LinearBasis;
  m.domain = {DomainKind::FiniteInterval, a, b, b};
  m.lambda0 = lambda0;
  m.basis = std::move(basis);
  const int d = static_cast<int>(m.basis.size());
  m.space.lower = Vec::Constant(d, 1e-3);
  m.space.upper = Vec::Constant(d, 1e3);
  return m;
}

}  // namespace poisest
