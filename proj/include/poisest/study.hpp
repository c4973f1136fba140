#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poisest/json_out.hpp"
#include "poisest/mme.hpp"
#include "poisest/multistep.hpp"

namespace poisest {

struct EstimatorRequest {
  EstimatorKind kind = EstimatorKind::Mme;
  double delta = 0.6;                  // ignored for plain MME
  std::vector<double> s_values = {1.0};  // process checkpoints k = floor(s*n)
};

struct StudyConfig {
  IntensityModel model;
  Vec theta0;
  long n = 0;
  int M = 0;
  std::vector<EstimatorRequest> estimators;
  MomentSpec spec;
  std::uint64_t base_seed = 1;
  std::uint64_t rep_offset = 0;  // replication r uses path streams (rep_offset+r)*n+j
  int threads = 1;
  Sampler sampler = Sampler::Auto;
  QuadConfig quad;
};

/// ||empirical - target||_F / ||target||_F.
[[nodiscard]] double compare_to_target(const Mat& empirical, const Mat& target);

struct NormalityDiagnostics {
  Vec skewness;
  Vec excess_kurtosis;
  Vec ks;            // one-sample Kolmogorov-Smirnov distance vs standard normal
  double threshold = 0.0;  // 1.63 / sqrt(m)
  bool flagged = false;    // any component with ks > threshold
};

/// Componentwise diagnostics of already-standardized vectors (expected iid
/// standard normal under the asymptotics). Throws TooFewSamples below 30.
[[nodiscard]] NormalityDiagnostics normality_diagnostics(const std::vector<Vec>& u);

struct CheckpointStats {
  long k = 0;
  int used = 0;
  Mat target;           // D for MME, Fisher inverse otherwise
  Vec bias;             // mean(theta_hat) - theta0
  Mat cov;              // k-scaled second moment about theta0
  Mat cov_centered;     // k-scaled covariance about the empirical mean
  double rel_frob = 0.0;
  double rel_frob_centered = 0.0;
  std::optional<NormalityDiagnostics> normality;  // absent when used < 30
};

struct EstimatorStudy {
  EstimatorRequest request;
  int failures = 0;
  std::vector<CheckpointStats> checkpoints;
  /// Raw estimates per checkpoint per replication; empty slot = failed rep.
  std::vector<std::vector<std::optional<Vec>>> estimates;
};

struct StudyReport {
  StudyConfig config;
  std::vector<EstimatorStudy> estimators;

  [[nodiscard]] JsonValue to_json() const;
  /// estimator,k,rel_frob_vs_target,bias,skewness,kurtosis,ks,failures
  [[nodiscard]] std::string summary_csv() const;
};

/// Simulate M independent replications of n paths, run every requested
/// estimator on each (failures excluded and counted), then compare k-scaled
/// empirical covariances about theta0 with the asymptotic targets.
/// Aborts (StudyAborted) if any estimator fails on more than half the reps.
[[nodiscard]] StudyReport run_study(const StudyConfig& config);

}  // namespace poisest
