#pragma once

#include <functional>

#include "poisest/errors.hpp"
#include "poisest/model.hpp"

namespace poisest {

struct QuadConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
};

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [lo, hi].
[[nodiscard]] double integrate(const std::function<double(double)>& f, double lo,
                               double hi, const QuadConfig& cfg = {});

/// Same, over the model's (truncated) time window for this theta.
[[nodiscard]] double integrate_over(const IntensityModel& model, const Vec& theta,
                                    const std::function<double(double)>& f,
                                    const QuadConfig& cfg = {});

/// Per-path Fisher information, entries by quadrature. Throws SingularFisher
/// when the smallest eigenvalue drops below 1e-10.
[[nodiscard]] Mat fisher_info(const IntensityModel& model, const Vec& theta,
                              const QuadConfig& cfg = {});

/// Inverse of a symmetric positive-definite matrix via eigendecomposition;
/// throws `kind` when the condition number exceeds 1e10.
[[nodiscard]] Mat invert_spd(const Mat& m, ErrorKind kind);

/// Symmetric inverse square root T^{-1/2}, same conditioning rule.
[[nodiscard]] Mat inverse_sqrt_spd(const Mat& m, ErrorKind kind);

}  // namespace poisest
