#pragma once

namespace poisest {

/// Digamma psi(x), x > 0. Recurrence up to x >= 10, then the asymptotic series.
[[nodiscard]] double digamma(double x);

/// Trigamma psi'(x), x > 0.
[[nodiscard]] double trigamma(double x);

/// Regularized lower incomplete gamma P(s, x), s > 0, x >= 0.
[[nodiscard]] double gamma_p(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
[[nodiscard]] double gamma_q(double s, double x);

/// Standard normal CDF.
[[nodiscard]] double normal_cdf(double z);

/// Smallest h with Q(shape, rate*h) <= tail_mass; used as quadrature horizon.
[[nodiscard]] double gamma_tail_horizon(double shape, double rate, double tail_mass);

}  // namespace poisest
