#include "poisest/quad.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <queue>
#include <vector>

#include "poisest/errors.hpp"

namespace poisest {

namespace {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
  double value = 0.0;
  double err = 0.0;
};

PanelResult kronrod15(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);

  double fv[15];
  fv[7] = f(center);
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[i];
    fv[i] = f(center - dx);
    fv[14 - i] = f(center + dx);
  }

  double resk = kWgk[7] * fv[7];
  double resg = kWg[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    resk += kWgk[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) resg += kWg[i / 2] * (fv[i] + fv[14 - i]);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fv[7] - reskh);
  for (int i = 0; i < 7; ++i) {
    resasc += kWgk[i] * (std::fabs(fv[i] - reskh) + std::fabs(fv[14 - i] - reskh));
  }
  resasc *= half;

  PanelResult r;
  r.value = resk * half;
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  r.err = err;
  return r;
}

struct Panel {
  double lo, hi, value, err;
  bool operator<(const Panel& other) const { return err < other.err; }
};

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadConfig& cfg) {
  if (!(lo < hi)) {
    if (lo == hi) return 0.0;
    throw Error(ErrorKind::DomainError, "integrate requires lo <= hi");
  }
  constexpr int kInitialPanels = 8;
  std::priority_queue<Panel> queue;
  double total = 0.0, total_err = 0.0;
  for (int i = 0; i < kInitialPanels; ++i) {
    const double a = lo + (hi - lo) * i / kInitialPanels;
    const double b = lo + (hi - lo) * (i + 1) / kInitialPanels;
    const PanelResult pr = kronrod15(f, a, b);
    queue.push({a, b, pr.value, pr.err});
    total += pr.value;
    total_err += pr.err;
  }
  int subdivisions = 0;
  while (total_err > std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total))) {
    if (++subdivisions > cfg.max_subdivisions) {
      throw Error(ErrorKind::NonConvergence, "integrate exceeded max_subdivisions");
    }
    const Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      throw Error(ErrorKind::NonConvergence, "panel too small to split");
    }
    const PanelResult left = kronrod15(f, worst.lo, mid);
    const PanelResult right = kronrod15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.err + right.err - worst.err;
    queue.push({worst.lo, mid, left.value, left.err});
    queue.push({mid, worst.hi, right.value, right.err});
  }
  return total;
}

double integrate_over(const IntensityModel& model, const Vec& theta,
                      const std::function<double(double)>& f, const QuadConfig& cfg) {
  const auto [lo, hi] = model.window(theta);
  return integrate(f, lo, hi, cfg);
}

Mat fisher_info(const IntensityModel& model, const Vec& theta, const QuadConfig& cfg) {
  const int d = model.param_dim();
  model.validate_theta(theta);
  Mat info(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double entry = integrate_over(
          model, theta,
          [&](double t) {
            const Vec ld = model.log_intensity_grad(theta, t);
            return ld[i] * ld[j] * model.intensity(theta, t);
          },
          cfg);
      info(i, j) = entry;
      info(j, i) = entry;
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(info);
  if (eig.eigenvalues().minCoeff() < 1e-10) {
    throw Error(ErrorKind::SingularFisher, "Fisher matrix not positive definite");
  }
  return info;
}

namespace {

Mat spd_power(const Mat& m, double power, ErrorKind kind) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  const Vec& ev = eig.eigenvalues();
  const double lo = ev.minCoeff(), hi = ev.maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e10) {
    throw Error(kind, "matrix singular or condition number above 1e10");
  }
  Vec powered = ev.array().pow(power);
  return eig.eigenvectors() * powered.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Mat invert_spd(const Mat& m, ErrorKind kind) { return spd_power(m, -1.0, kind); }

Mat inverse_sqrt_spd(const Mat& m, ErrorKind kind) { return spd_power(m, -0.5, kind); }

}  // namespace poisest
