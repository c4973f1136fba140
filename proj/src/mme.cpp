#include "poisest/mme.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "poisest/errors.hpp"

namespace poisest {

namespace {

void require_dim(const MomentSpec& spec, int expected) {
  if (spec.dim() != expected) {
    throw Error(ErrorKind::DimensionMismatch,
                "moment spec has " + std::to_string(spec.dim()) +
                    " functions, expected " + std::to_string(expected));
  }
}

/// Solve a square system with an explicit conditioning guard.
Vec guarded_solve(const Mat& m, const Vec& rhs, ErrorKind kind) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0.0) || smax / smin > 1e10) {
    throw Error(kind, "matrix is singular or ill-conditioned");
  }
  return svd.solve(rhs);
}

Mat guarded_inverse(const Mat& m, ErrorKind kind) {
  Mat inv(m.rows(), m.cols());
  for (int c = 0; c < m.cols(); ++c) {
    Vec e = Vec::Zero(m.rows());
    e[c] = 1.0;
    inv.col(c) = guarded_solve(m, e, kind);
  }
  return inv;
}

Vec invert_closed_form(const Vec& a, const IntensityModel& model,
                       const MomentSpec& spec, const QuadConfig& cfg) {
  switch (model.family) {
    case Family::GammaShapeRate: {
      const double v = a[1] - a[0] * a[0];
      if (!(a[0] > 0.0) || !(v > 0.0)) {
        throw Error(ErrorKind::DegenerateMoments,
                    "need a1 > 0 and a2 - a1^2 > 0, got a1=" + std::to_string(a[0]) +
                        " a2=" + std::to_string(a[1]));
      }
      Vec theta(2);
      theta << a[0] / v, a[0] * a[0] / v;
      return theta;
    }
    case Family::GaussianBell: {
      const double v = a[1] - a[0] * a[0];
      if (!(v > 0.0)) {
        throw Error(ErrorKind::DegenerateMoments,
                    "need a2 - a1^2 > 0, got " + std::to_string(v));
      }
      Vec theta(2);
      theta << a[0], std::sqrt(v);
      return theta;
    }
    case Family::SinePhase: {
      if (model.amplitude == 0.0) {
        throw Error(ErrorKind::NoSolution,
                    "amplitude A = 0: phase is unidentifiable");
      }
      const double arg = 2.0 * a[0] / model.amplitude;
      if (std::abs(arg) > 1.0 + 1e-3) {
        throw Error(ErrorKind::OutOfRange,
                    "moment outside the image of the phase map: 2a/A = " +
                        std::to_string(arg));
      }
      const double clipped = std::clamp(arg, -1.0 + 1e-12, 1.0 - 1e-12);
      Vec theta(1);
      theta << std::acos(clipped);
      return theta;
    }
    case Family::LinearBasis: {
      const int d = model.param_dim();
      const auto [lo, hi] = model.window(Vec::Constant(d, 1.0));
      Mat A(spec.dim(), d);
      Vec rhs(spec.dim());
      for (int l = 0; l < spec.dim(); ++l) {
        for (int k = 0; k < d; ++k) {
          A(l, k) = integrate(
              [&](double t) { return spec.g[l](t) * model.basis[k](t); }, lo, hi,
              cfg);
        }
        rhs[l] = a[l] - model.lambda0 * (spec.g[l].antiderivative(hi) -
                                         spec.g[l].antiderivative(lo));
      }
      return guarded_solve(A, rhs, ErrorKind::SingularJacobian);
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown family");
}

/// Interior grid coordinate: geometric spacing for positive boxes, else linear.
double grid_coord(double lo, double hi, int i, int m) {
  const double f = (static_cast<double>(i) + 0.5) / m;
  if (lo > 0.0) return lo * std::pow(hi / lo, f);
  return lo + (hi - lo) * f;
}

Vec invert_numeric(const Vec& a, const IntensityModel& model, const MomentSpec& spec,
                   const QuadConfig& cfg) {
  const int d = model.param_dim();
  require_dim(spec, d);
  const double tol = 1e-10 * (1.0 + a.norm());
  // Iterate past `tol` until the line search stalls, so the returned theta is
  // converged to roundoff rather than to the acceptance threshold.
  const double polish = 1e-15 * (1.0 + a.norm());

  auto residual = [&](const Vec& theta) { return Vec(moment_map(model, theta, spec, cfg) - a); };
  auto newton = [&](Vec theta) -> std::pair<Vec, double> {
    double rnorm = residual(theta).norm();
    for (int it = 0; it < 100 && rnorm > polish; ++it) {
      Vec r = residual(theta);
      Vec step;
      try {
        step = guarded_solve(moment_jacobian(model, theta, spec, cfg), r,
                             ErrorKind::SingularJacobian);
      } catch (const Error&) {
        break;
      }
      double scale = 1.0;
      bool moved = false;
      for (int half = 0; half < 24; ++half, scale *= 0.5) {
        const Vec cand = model.space.clip_interior(theta - scale * step, 1e-9);
        double cnorm;
        try {
          cnorm = residual(cand).norm();
        } catch (const Error&) {
          continue;
        }
        if (cnorm < rnorm) {
          theta = cand;
          rnorm = cnorm;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    return {theta, rnorm};
  };

  auto [theta, rnorm] = newton(model.space.center());
  if (rnorm > tol) {
    const int m = d == 1 ? 41 : 9;
    Vec best = theta;
    double best_norm = rnorm;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      Vec cand(d);
      for (int k = 0; k < d; ++k) {
        cand[k] = grid_coord(model.space.lower[k], model.space.upper[k],
                             idx[static_cast<std::size_t>(k)], m);
      }
      try {
        const double cnorm = residual(cand).norm();
        if (cnorm < best_norm) {
          best = cand;
          best_norm = cnorm;
        }
      } catch (const Error&) {
      }
      int k = 0;
      while (k < d && ++idx[static_cast<std::size_t>(k)] == m) {
        idx[static_cast<std::size_t>(k)] = 0;
        ++k;
      }
      if (k == d) break;
    }
    std::tie(theta, rnorm) = newton(best);
  }
  if (rnorm > 1e-8 * (1.0 + a.norm())) {
    throw Error(ErrorKind::NoSolution,
                "moment equations not solvable to tolerance: residual " +
                    std::to_string(rnorm));
  }
  return theta;
}

}  // namespace

MomentSpec default_moment_spec(const IntensityModel& model) {
  MomentSpec spec;
  switch (model.family) {
    case Family::GammaShapeRate:
    case Family::GaussianBell:
      spec.g = {BasisFn{BasisFn::Kind::Poly, 1}, BasisFn{BasisFn::Kind::Poly, 2}};
      break;
    case Family::SinePhase:
      spec.g = {BasisFn{BasisFn::Kind::Sin, 1}};
      break;
    case Family::LinearBasis:
      spec.g = model.basis;
      break;
  }
  return spec;
}

EmpiricalMoments empirical_moments(const Sample& sample, const MomentSpec& spec) {
  if (sample.paths.empty()) {
    throw Error(ErrorKind::EmptySample, "no paths");
  }
  EmpiricalMoments out;
  out.n = sample.n();
  out.a = Vec::Zero(spec.dim());
  for (const auto& path : sample.paths) {
    for (const double t : path.events) {
      for (int l = 0; l < spec.dim(); ++l) out.a[l] += spec.g[l](t);
    }
  }
  out.a /= static_cast<double>(out.n);
  return out;
}

Vec moment_map(const IntensityModel& model, const Vec& theta, const MomentSpec& spec,
               const QuadConfig& cfg) {
  model.validate_theta(theta);
  Vec m(spec.dim());
  for (int l = 0; l < spec.dim(); ++l) {
    m[l] = integrate_over(
        model, theta, [&](double t) { return spec.g[l](t) * model.intensity(theta, t); },
        cfg);
  }
  return m;
}

Mat moment_jacobian(const IntensityModel& model, const Vec& theta,
                    const MomentSpec& spec, const QuadConfig& cfg) {
  model.validate_theta(theta);
  const int d = model.param_dim();
  Mat j(spec.dim(), d);
  for (int l = 0; l < spec.dim(); ++l) {
    for (int k = 0; k < d; ++k) {
      j(l, k) = integrate_over(
          model, theta,
          [&](double t) { return spec.g[l](t) * model.intensity_grad(theta, t)[k]; },
          cfg);
    }
  }
  return j;
}

Mat g_matrix(const IntensityModel& model, const Vec& theta, const MomentSpec& spec,
             const QuadConfig& cfg) {
  model.validate_theta(theta);
  Mat g(spec.dim(), spec.dim());
  for (int l = 0; l < spec.dim(); ++l) {
    for (int k = l; k < spec.dim(); ++k) {
      g(l, k) = integrate_over(
          model, theta,
          [&](double t) {
            return spec.g[l](t) * spec.g[k](t) * model.intensity(theta, t);
          },
          cfg);
      g(k, l) = g(l, k);
    }
  }
  return g;
}

Vec invert_moments(const Vec& a, const IntensityModel& model, const MomentSpec& spec,
                   const QuadConfig& cfg) {
  if (a.size() != spec.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "moment vector has size " + std::to_string(a.size()) +
                    ", spec expects " + std::to_string(spec.dim()));
  }
  if (spec.inversion == Inversion::ClosedForm) {
    if (model.family != Family::LinearBasis) require_dim(spec, model.param_dim());
    return invert_closed_form(a, model, spec, cfg);
  }
  return invert_numeric(a, model, spec, cfg);
}

MmeEstimate mme_estimate(const Sample& sample, const IntensityModel& model,
                         const MomentSpec& spec, const QuadConfig& cfg) {
  MmeEstimate est;
  est.moments = empirical_moments(sample, spec);
  est.theta = invert_moments(est.moments.a, model, spec, cfg);
  est.in_box = model.space.contains(est.theta);
  return est;
}

Mat mme_covariance(const IntensityModel& model, const Vec& theta,
                   const MomentSpec& spec, const QuadConfig& cfg) {
  require_dim(spec, model.param_dim());
  const Mat j = moment_jacobian(model, theta, spec, cfg);
  const Mat jinv = guarded_inverse(j, ErrorKind::SingularJacobian);
  const Mat g = g_matrix(model, theta, spec, cfg);
  return jinv * g * jinv.transpose();
}

IdentifiabilityReport check_identifiability(const IntensityModel& model,
                                            const MomentSpec& spec,
                                            const ParamSpace& space,
                                            int points_per_dim,
                                            const QuadConfig& cfg) {
  const int d = model.param_dim();
  std::vector<Vec> thetas;
  std::vector<Vec> values;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Vec theta(d);
    for (int k = 0; k < d; ++k) {
      const double f =
          static_cast<double>(idx[static_cast<std::size_t>(k)]) / (points_per_dim - 1);
      theta[k] = space.lower[k] + (space.upper[k] - space.lower[k]) * f;
    }
    try {
      Vec m = moment_map(model, theta, spec, cfg);
      thetas.push_back(theta);
      values.push_back(std::move(m));
    } catch (const Error&) {
      // invalid corner of the box: skip
    }
    int k = 0;
    while (k < d && ++idx[static_cast<std::size_t>(k)] == points_per_dim) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == d) break;
  }

  IdentifiabilityReport report;
  double min010 = std::numeric_limits<double>::infinity();
  double min025 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    for (std::size_t j = i + 1; j < thetas.size(); ++j) {
      const double dist = (thetas[i] - thetas[j]).norm();
      const double sep = (values[i] - values[j]).norm();
      if (dist > 0.10) min010 = std::min(min010, sep);
      if (dist > 0.25) min025 = std::min(min025, sep);
    }
  }
  report.min_separation_010 = min010;
  report.min_separation_025 = min025;
  report.flagged = min010 < 1e-6 || min025 < 1e-6;
  return report;
}

}  // namespace poisest
