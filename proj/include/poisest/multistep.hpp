#pragma once

#include <optional>
#include <string>
#include <vector>

#include "poisest/mme.hpp"
#include "poisest/model.hpp"
#include "poisest/paths.hpp"
#include "poisest/quad.hpp"

namespace poisest {

enum class StepMode { OneStep, TwoStep };

/// Learning-sample size N = floor(n^delta), with delta restricted to
/// (1/2, 1) for one-step and (1/3, 1/2] for two-step corrections.
struct LearningSplit {
  long n = 0;
  double delta = 0.0;
  long N = 0;
  StepMode mode = StepMode::OneStep;
};

[[nodiscard]] LearningSplit learning_size(long n, double delta, StepMode mode);

/// Score of one path at theta: sum over events of the log-intensity gradient
/// minus the integral of the intensity gradient over the window.
[[nodiscard]] Vec path_score(const IntensityModel& model, const Vec& theta,
                             const PoissonPath& path, const QuadConfig& cfg = {});

struct OneStepResult {
  Vec theta;              // corrected estimate
  Vec theta_bar;          // interior point the correction was evaluated at
  bool preliminary_clipped = false;
};

/// One-step correction of theta_bar using paths N+1..n (1/n normalization).
[[nodiscard]] OneStepResult one_step(const IntensityModel& model, const Sample& sample,
                                     const Vec& theta_bar, const LearningSplit& split,
                                     const QuadConfig& cfg = {});

/// Estimator trajectory over k = N+1..n (recorded every `stride`, always
/// including k = n). `clipped[i]` marks rows where any stage estimate left the
/// parameter box before clipping.
struct EstimatorTrace {
  std::vector<long> k;
  std::vector<Vec> theta;
  std::vector<bool> clipped;
};

[[nodiscard]] EstimatorTrace one_step_process(const IntensityModel& model,
                                              const Sample& sample,
                                              const Vec& theta_bar,
                                              const LearningSplit& split,
                                              long stride = 1,
                                              const QuadConfig& cfg = {});

/// Same corrections, recorded at an explicit sorted checkpoint list
/// (each k in (N, n]).
[[nodiscard]] EstimatorTrace one_step_at(const IntensityModel& model,
                                         const Sample& sample, const Vec& theta_bar,
                                         const LearningSplit& split,
                                         const std::vector<long>& checkpoints,
                                         const QuadConfig& cfg = {});

[[nodiscard]] EstimatorTrace two_step_at(const IntensityModel& model,
                                         const Sample& sample, const Vec& theta_bar,
                                         const LearningSplit& split,
                                         const std::vector<long>& checkpoints,
                                         const QuadConfig& cfg = {});

/// Two-step process: stage one is the one-step value at k; stage two repeats
/// the correction around the clipped stage-one point, reusing the event sums.
[[nodiscard]] EstimatorTrace two_step_process(const IntensityModel& model,
                                              const Sample& sample,
                                              const Vec& theta_bar,
                                              const LearningSplit& split,
                                              long stride = 1,
                                              const QuadConfig& cfg = {});

enum class EstimatorKind { Mme, OneStep, OneStepProcess, TwoStepProcess };

[[nodiscard]] std::string to_string(EstimatorKind kind);
[[nodiscard]] EstimatorKind estimator_kind_from_string(const std::string& text);

struct PipelineResult {
  EstimatorKind kind = EstimatorKind::Mme;
  Vec preliminary;       // raw method-of-moments value (unclipped)
  long N = 0;            // learning-sample size (0 for plain MME)
  Vec theta;             // final estimate (last trace row for processes)
  std::optional<EstimatorTrace> trace;
  std::vector<std::string> flags;
};

/// MME on the first N paths, then the requested correction on the rest.
/// The preliminary stage never sees paths N+1..n.
[[nodiscard]] PipelineResult estimate_pipeline(const IntensityModel& model,
                                               const Sample& sample,
                                               const MomentSpec& spec,
                                               EstimatorKind kind, double delta,
                                               long stride = 1,
                                               const QuadConfig& cfg = {});

}  // namespace poisest
