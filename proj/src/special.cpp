#include "poisest/special.hpp"

#include <cmath>
#include <limits>

#include "poisest/errors.hpp"

namespace poisest {

double digamma(double x) {
  if (!(x > 0.0)) throw Error(ErrorKind::DomainError, "digamma requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli series; |next term| < 1e-17 for x >= 10
  double series = std::log(x) - 0.5 * inv;
  double p = inv2;
  series -= p * (1.0 / 12.0);
  p *= inv2;
  series += p * (1.0 / 120.0);
  p *= inv2;
  series -= p * (1.0 / 252.0);
  p *= inv2;
  series += p * (1.0 / 240.0);
  p *= inv2;
  series -= p * (1.0 / 132.0);
  p *= inv2;
  series += p * (691.0 / 32760.0);
  p *= inv2;
  series -= p * (1.0 / 12.0);
  return result + series;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw Error(ErrorKind::DomainError, "trigamma requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv + 0.5 * inv2;
  double p = inv * inv2;
  series += p * (1.0 / 6.0);
  p *= inv2;
  series -= p * (1.0 / 30.0);
  p *= inv2;
  series += p * (1.0 / 42.0);
  p *= inv2;
  series -= p * (1.0 / 30.0);
  p *= inv2;
  series += p * (5.0 / 66.0);
  p *= inv2;
  series -= p * (691.0 / 2730.0);
  p *= inv2;
  series += p * (7.0 / 6.0);
  return result + series;
}

namespace {

// Series expansion of P(s,x), converges fast for x < s + 1.
double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  double a = s;
  for (int k = 0; k < 500; ++k) {
    a += 1.0;
    term *= x / a;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) {
      return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
  }
  throw Error(ErrorKind::NonConvergence, "incomplete gamma series");
}

// Continued fraction for Q(s,x) by modified Lentz, for x >= s + 1.
double gamma_q_cf(double s, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) {
      return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
  }
  throw Error(ErrorKind::NonConvergence, "incomplete gamma continued fraction");
}

}  // namespace

double gamma_p(double s, double x) {
  if (!(s > 0.0) || x < 0.0) {
    throw Error(ErrorKind::DomainError, "gamma_p requires s > 0, x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) return gamma_p_series(s, x);
  return 1.0 - gamma_q_cf(s, x);
}

double gamma_q(double s, double x) {
  if (!(s > 0.0) || x < 0.0) {
    throw Error(ErrorKind::DomainError, "gamma_q requires s > 0, x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_cf(s, x);
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double gamma_tail_horizon(double shape, double rate, double tail_mass) {
  if (!(shape > 0.0) || !(rate > 0.0) || !(tail_mass > 0.0)) {
    throw Error(ErrorKind::DomainError, "gamma_tail_horizon arguments");
  }
  double hi = (shape + 1.0) / rate;
  while (gamma_q(shape, rate * hi) > tail_mass) {
    hi *= 2.0;
    if (hi > 1e300) throw Error(ErrorKind::NonConvergence, "horizon search");
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_q(shape, rate * mid) > tail_mass) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonPositiveIntensity: return "NonPositiveIntensity";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::EnvelopeError: return "EnvelopeError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnsortedEvents: return "UnsortedEvents";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::SingularFisher: return "SingularFisher";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::DegenerateMoments: return "DegenerateMoments";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::StudyAborted: return "StudyAborted";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace poisest
