#include "poisest/study.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "poisest/errors.hpp"
#include "poisest/format.hpp"
#include "poisest/special.hpp"

namespace poisest {

double compare_to_target(const Mat& empirical, const Mat& target) {
  if (empirical.rows() != target.rows() || empirical.cols() != target.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "matrix shapes differ");
  }
  const double denom = target.norm();
  if (!(denom > 0.0)) {
    throw Error(ErrorKind::DomainError, "target matrix has zero Frobenius norm");
  }
  return (empirical - target).norm() / denom;
}

NormalityDiagnostics normality_diagnostics(const std::vector<Vec>& u) {
  const auto m = static_cast<long>(u.size());
  if (m < 30) {
    throw Error(ErrorKind::TooFewSamples,
                "need at least 30 vectors, got " + std::to_string(m));
  }
  const int d = static_cast<int>(u.front().size());
  NormalityDiagnostics out;
  out.skewness = Vec::Zero(d);
  out.excess_kurtosis = Vec::Zero(d);
  out.ks = Vec::Zero(d);
  out.threshold = 1.63 / std::sqrt(static_cast<double>(m));
  for (int c = 0; c < d; ++c) {
    std::vector<double> x(static_cast<std::size_t>(m));
    double mean = 0.0;
    for (long i = 0; i < m; ++i) {
      x[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)][c];
      mean += x[static_cast<std::size_t>(i)];
    }
    mean /= static_cast<double>(m);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (const double v : x) {
      const double e = v - mean;
      m2 += e * e;
      m3 += e * e * e;
      m4 += e * e * e * e;
    }
    m2 /= static_cast<double>(m);
    m3 /= static_cast<double>(m);
    m4 /= static_cast<double>(m);
    out.skewness[c] = m3 / std::pow(m2, 1.5);
    out.excess_kurtosis[c] = m4 / (m2 * m2) - 3.0;

    std::sort(x.begin(), x.end());
    double dmax = 0.0;
    for (long i = 0; i < m; ++i) {
      const double f = normal_cdf(x[static_cast<std::size_t>(i)]);
      dmax = std::max(dmax, std::abs(static_cast<double>(i + 1) / m - f));
      dmax = std::max(dmax, std::abs(f - static_cast<double>(i) / m));
    }
    out.ks[c] = dmax;
    if (dmax > out.threshold) out.flagged = true;
  }
  return out;
}

namespace {

std::vector<long> request_checkpoints(const EstimatorRequest& req, long n, long N) {
  if (req.kind == EstimatorKind::Mme || req.kind == EstimatorKind::OneStep) {
    return {n};
  }
  if (req.s_values.empty()) {
    throw Error(ErrorKind::ConfigError, "process estimator needs s_values");
  }
  std::vector<long> ks;
  for (const double s : req.s_values) {
    const long k = static_cast<long>(std::floor(s * static_cast<double>(n) + 1e-9));
    if (k <= N || k > n) {
      throw Error(ErrorKind::ConfigError,
                  "checkpoint s = " + format_sig(s, 6) + " gives k = " +
                      std::to_string(k) + " outside (" + std::to_string(N) + ", " +
                      std::to_string(n) + "]");
    }
    ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

Sample head_paths(const Sample& sample, long N) {
  Sample learning;
  learning.domain = sample.domain;
  learning.paths.assign(sample.paths.begin(), sample.paths.begin() + N);
  return learning;
}

}  // namespace

StudyReport run_study(const StudyConfig& config) {
  if (config.n < 2) throw Error(ErrorKind::ConfigError, "study needs n >= 2");
  if (config.M < 2) throw Error(ErrorKind::ConfigError, "study needs M >= 2");
  if (config.estimators.empty()) {
    throw Error(ErrorKind::ConfigError, "study needs at least one estimator");
  }
  config.model.validate_theta(config.theta0);
  if (!config.model.space.contains(config.theta0)) {
    throw Error(ErrorKind::ConfigError, "theta0 outside the parameter box");
  }

  const std::size_t n_est = config.estimators.size();
  std::vector<std::optional<LearningSplit>> splits(n_est);
  std::vector<std::vector<long>> checkpoints(n_est);
  for (std::size_t e = 0; e < n_est; ++e) {
    const auto& req = config.estimators[e];
    long N = 0;
    if (req.kind != EstimatorKind::Mme) {
      const StepMode mode = req.kind == EstimatorKind::TwoStepProcess
                                ? StepMode::TwoStep
                                : StepMode::OneStep;
      splits[e] = learning_size(config.n, req.delta, mode);
      N = splits[e]->N;
    }
    checkpoints[e] = request_checkpoints(req, config.n, N);
  }

  // estimates[e][cp][rep]; each rep writes only its own slots.
  std::vector<std::vector<std::vector<std::optional<Vec>>>> estimates(n_est);
  for (std::size_t e = 0; e < n_est; ++e) {
    estimates[e].assign(checkpoints[e].size(),
                        std::vector<std::optional<Vec>>(
                            static_cast<std::size_t>(config.M)));
  }

  auto run_rep = [&](int r) {
    Sample sample;
    try {
      sample = simulate_sample(config.model, config.theta0, config.n,
                               config.base_seed,
                               config.rep_offset + static_cast<std::uint64_t>(r),
                               config.sampler);
    } catch (const Error&) {
      return;  // all estimators fail for this replication
    }
    for (std::size_t e = 0; e < n_est; ++e) {
      const auto& req = config.estimators[e];
      try {
        switch (req.kind) {
          case EstimatorKind::Mme: {
            const MmeEstimate est =
                mme_estimate(sample, config.model, config.spec, config.quad);
            estimates[e][0][static_cast<std::size_t>(r)] = est.theta;
            break;
          }
          case EstimatorKind::OneStep: {
            const MmeEstimate prelim = mme_estimate(
                head_paths(sample, splits[e]->N), config.model, config.spec,
                config.quad);
            estimates[e][0][static_cast<std::size_t>(r)] =
                one_step(config.model, sample, prelim.theta, *splits[e], config.quad)
                    .theta;
            break;
          }
          case EstimatorKind::OneStepProcess:
          case EstimatorKind::TwoStepProcess: {
            const MmeEstimate prelim = mme_estimate(
                head_paths(sample, splits[e]->N), config.model, config.spec,
                config.quad);
            const EstimatorTrace trace =
                req.kind == EstimatorKind::OneStepProcess
                    ? one_step_at(config.model, sample, prelim.theta, *splits[e],
                                  checkpoints[e], config.quad)
                    : two_step_at(config.model, sample, prelim.theta, *splits[e],
                                  checkpoints[e], config.quad);
            for (std::size_t cp = 0; cp < checkpoints[e].size(); ++cp) {
              estimates[e][cp][static_cast<std::size_t>(r)] = trace.theta[cp];
            }
            break;
          }
        }
      } catch (const Error&) {
        for (std::size_t cp = 0; cp < checkpoints[e].size(); ++cp) {
          estimates[e][cp][static_cast<std::size_t>(r)].reset();
        }
      }
    }
  };

  const int threads = std::max(1, std::min(config.threads, config.M));
  if (threads == 1) {
    for (int r = 0; r < config.M; ++r) run_rep(r);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int r = t; r < config.M; r += threads) run_rep(r);
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  StudyReport report;
  report.config = config;
  report.estimators.resize(n_est);

  // Failure accounting and the abort rule come before any target computation,
  // so a degenerate model aborts rather than failing in the Fisher solve.
  for (std::size_t e = 0; e < n_est; ++e) {
    auto& est = report.estimators[e];
    est.request = config.estimators[e];
    est.estimates = estimates[e];
    est.failures = 0;
    for (int r = 0; r < config.M; ++r) {
      if (!estimates[e][0][static_cast<std::size_t>(r)].has_value()) ++est.failures;
    }
    if (2 * est.failures > config.M) {
      throw Error(ErrorKind::StudyAborted,
                  to_string(est.request.kind) + " failed on " +
                      std::to_string(est.failures) + " of " +
                      std::to_string(config.M) + " replications");
    }
  }

  for (std::size_t e = 0; e < n_est; ++e) {
    auto& est = report.estimators[e];
    const Mat target =
        est.request.kind == EstimatorKind::Mme
            ? mme_covariance(config.model, config.theta0, config.spec, config.quad)
            : invert_spd(fisher_info(config.model, config.theta0, config.quad),
                         ErrorKind::SingularFisher);
    const Mat half = inverse_sqrt_spd(target, ErrorKind::SingularFisher);

    for (std::size_t cp = 0; cp < checkpoints[e].size(); ++cp) {
      CheckpointStats stats;
      stats.k = checkpoints[e][cp];
      stats.target = target;
      const double sk = std::sqrt(static_cast<double>(stats.k));
      const int d = config.model.param_dim();

      std::vector<Vec> errors_about_truth;
      errors_about_truth.reserve(static_cast<std::size_t>(config.M));
      for (int r = 0; r < config.M; ++r) {
        const auto& slot = estimates[e][cp][static_cast<std::size_t>(r)];
        if (slot.has_value()) errors_about_truth.push_back(*slot - config.theta0);
      }
      stats.used = static_cast<int>(errors_about_truth.size());
      if (stats.used == 0) {
        throw Error(ErrorKind::StudyAborted,
                    to_string(est.request.kind) + ": no successful replications");
      }

      Vec mean_err = Vec::Zero(d);
      for (const auto& err : errors_about_truth) mean_err += err;
      mean_err /= static_cast<double>(stats.used);
      stats.bias = mean_err;

      Mat cov = Mat::Zero(d, d);
      Mat cov_centered = Mat::Zero(d, d);
      for (const auto& err : errors_about_truth) {
        cov += err * err.transpose();
        const Vec c = err - mean_err;
        cov_centered += c * c.transpose();
      }
      const double scale =
          static_cast<double>(stats.k) / static_cast<double>(stats.used);
      stats.cov = scale * cov;
      stats.cov_centered = scale * cov_centered;
      stats.rel_frob = compare_to_target(stats.cov, target);
      stats.rel_frob_centered = compare_to_target(stats.cov_centered, target);

      if (stats.used >= 30) {
        std::vector<Vec> u;
        u.reserve(errors_about_truth.size());
        for (const auto& err : errors_about_truth) u.push_back(half * (sk * err));
        stats.normality = normality_diagnostics(u);
      }
      est.checkpoints.push_back(std::move(stats));
    }
  }
  return report;
}

JsonValue StudyReport::to_json() const {
  JsonValue root = JsonValue::object();
  root["family"] = config.model.family_name();
  root["theta0"] = config.theta0;
  root["n"] = config.n;
  root["M"] = static_cast<long>(config.M);
  root["seed"] = config.base_seed;
  root["rep_offset"] = config.rep_offset;
  JsonValue ests = JsonValue::array();
  for (const auto& est : estimators) {
    JsonValue j = JsonValue::object();
    j["estimator"] = to_string(est.request.kind);
    if (est.request.kind == EstimatorKind::Mme) {
      j["delta"] = nullptr;
    } else {
      j["delta"] = est.request.delta;
    }
    j["failures"] = static_cast<long>(est.failures);
    JsonValue cps = JsonValue::array();
    for (const auto& stats : est.checkpoints) {
      JsonValue c = JsonValue::object();
      c["k"] = stats.k;
      c["used"] = static_cast<long>(stats.used);
      c["target"] = stats.target;
      c["bias"] = stats.bias;
      c["cov"] = stats.cov;
      c["cov_centered"] = stats.cov_centered;
      c["rel_frob"] = stats.rel_frob;
      c["rel_frob_centered"] = stats.rel_frob_centered;
      if (stats.normality.has_value()) {
        c["skewness"] = stats.normality->skewness;
        c["excess_kurtosis"] = stats.normality->excess_kurtosis;
        c["ks"] = stats.normality->ks;
        c["ks_threshold"] = stats.normality->threshold;
        c["normality_flagged"] = stats.normality->flagged;
      } else {
        c["skewness"] = nullptr;
        c["excess_kurtosis"] = nullptr;
        c["ks"] = nullptr;
        c["ks_threshold"] = nullptr;
        c["normality_flagged"] = nullptr;
      }
      cps.push_back(std::move(c));
    }
    j["checkpoints"] = std::move(cps);
    ests.push_back(std::move(j));
  }
  root["estimators"] = std::move(ests);
  return root;
}

namespace {

std::string join_components(const Vec& v) {
  std::ostringstream out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out << ";";
    out << format_sig(v[i], 9);
  }
  return out.str();
}

}  // namespace

std::string StudyReport::summary_csv() const {
  std::ostringstream out;
  out << "estimator,k,rel_frob_vs_target,bias,skewness,kurtosis,ks,failures\n";
  for (const auto& est : estimators) {
    for (const auto& stats : est.checkpoints) {
      out << to_string(est.request.kind) << "," << stats.k << ","
          << format_sig(stats.rel_frob, 9) << "," << join_components(stats.bias)
          << ",";
      if (stats.normality.has_value()) {
        out << join_components(stats.normality->skewness) << ","
            << join_components(stats.normality->excess_kurtosis) << ","
            << join_components(stats.normality->ks);
      } else {
        out << ",,";
      }
      out << "," << est.failures << "\n";
    }
  }
  return out.str();
}

}  // namespace poisest
