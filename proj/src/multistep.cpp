#include "poisest/multistep.hpp"

#include <cmath>

#include "poisest/errors.hpp"

namespace poisest {

namespace {

constexpr double kClipMargin = 1e-6;

/// floor(n^delta), robust to pow landing just below an exact integer.
long floor_power(long n, double delta) {
  const double x = std::exp(delta * std::log(static_cast<double>(n)));
  const double r = std::round(x);
  if (std::abs(x - r) < 1e-9 * std::max(1.0, r)) return static_cast<long>(r);
  return static_cast<long>(std::floor(x));
}

Vec compensator(const IntensityModel& model, const Vec& theta, const QuadConfig& cfg) {
  const int d = model.param_dim();
  Vec comp(d);
  for (int k = 0; k < d; ++k) {
    comp[k] = integrate_over(
        model, theta, [&](double t) { return model.intensity_grad(theta, t)[k]; },
        cfg);
  }
  return comp;
}

Vec event_sum(const IntensityModel& model, const Vec& theta, const PoissonPath& path) {
  Vec s = Vec::Zero(model.param_dim());
  for (const double t : path.events) s += model.log_intensity_grad(theta, t);
  return s;
}

void check_split(const Sample& sample, const LearningSplit& split) {
  if (sample.n() != split.n) {
    throw Error(ErrorKind::ConfigError,
                "sample has " + std::to_string(sample.n()) + " paths, split expects " +
                    std::to_string(split.n));
  }
}

std::vector<long> checkpoint_grid(const LearningSplit& split, long stride) {
  if (stride < 1) {
    throw Error(ErrorKind::ConfigError, "stride must be >= 1");
  }
  std::vector<long> ks;
  for (long k = split.N + 1; k <= split.n; k += stride) ks.push_back(k);
  if (ks.empty() || ks.back() != split.n) ks.push_back(split.n);
  return ks;
}

void check_checkpoints(const LearningSplit& split, const std::vector<long>& ks) {
  if (ks.empty()) {
    throw Error(ErrorKind::ConfigError, "checkpoint list is empty");
  }
  long prev = split.N;
  for (const long k : ks) {
    if (k <= prev || k > split.n) {
      throw Error(ErrorKind::ConfigError,
                  "checkpoints must be strictly increasing in (" +
                      std::to_string(split.N) + ", " + std::to_string(split.n) + "]");
    }
    prev = k;
  }
}

struct CorrectionState {
  Vec theta_bar;  // clipped interior point
  bool preliminary_clipped = false;
  Mat fisher_inv;
  Vec comp;
};

CorrectionState prepare_correction(const IntensityModel& model, const Vec& theta_bar,
                                   const QuadConfig& cfg) {
  if (theta_bar.size() != model.param_dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "preliminary estimate has wrong dimension");
  }
  CorrectionState st;
  st.preliminary_clipped = !model.space.contains(theta_bar);
  st.theta_bar = model.space.clip_interior(theta_bar, kClipMargin);
  model.validate_theta(st.theta_bar);
  st.fisher_inv =
      invert_spd(fisher_info(model, st.theta_bar, cfg), ErrorKind::SingularFisher);
  st.comp = compensator(model, st.theta_bar, cfg);
  return st;
}

}  // namespace

LearningSplit learning_size(long n, double delta, StepMode mode) {
  if (n < 4) {
    throw Error(ErrorKind::ConfigError, "need n >= 4, got " + std::to_string(n));
  }
  const bool ok = mode == StepMode::OneStep ? (delta > 0.5 && delta < 1.0)
                                            : (delta > 1.0 / 3.0 && delta <= 0.5);
  if (!ok) {
    throw Error(ErrorKind::DeltaOutOfRange,
                std::string("delta = ") + std::to_string(delta) +
                    (mode == StepMode::OneStep ? " outside (1/2, 1) for one-step"
                                               : " outside (1/3, 1/2] for two-step"));
  }
  LearningSplit split;
  split.n = n;
  split.delta = delta;
  split.mode = mode;
  split.N = floor_power(n, delta);
  if (split.N < 1 || split.N >= n) {
    throw Error(ErrorKind::ConfigError,
                "learning size N = " + std::to_string(split.N) +
                    " leaves no estimation paths for n = " + std::to_string(n));
  }
  return split;
}

Vec path_score(const IntensityModel& model, const Vec& theta, const PoissonPath& path,
               const QuadConfig& cfg) {
  model.validate_theta(theta);
  return event_sum(model, theta, path) - compensator(model, theta, cfg);
}

OneStepResult one_step(const IntensityModel& model, const Sample& sample,
                       const Vec& theta_bar, const LearningSplit& split,
                       const QuadConfig& cfg) {
  check_split(sample, split);
  const CorrectionState st = prepare_correction(model, theta_bar, cfg);
  // Accumulated exactly as in the process variants, so the k = n trace row
  // reproduces this value bit for bit.
  Vec events = Vec::Zero(model.param_dim());
  for (long j = split.N; j < split.n; ++j) {
    events += event_sum(model, st.theta_bar, sample.paths[static_cast<std::size_t>(j)]);
  }
  const Vec score = events - static_cast<double>(split.n - split.N) * st.comp;
  OneStepResult out;
  out.theta_bar = st.theta_bar;
  out.preliminary_clipped = st.preliminary_clipped;
  out.theta = st.theta_bar + st.fisher_inv * score / static_cast<double>(split.n);
  return out;
}

EstimatorTrace one_step_at(const IntensityModel& model, const Sample& sample,
                           const Vec& theta_bar, const LearningSplit& split,
                           const std::vector<long>& checkpoints,
                           const QuadConfig& cfg) {
  check_split(sample, split);
  check_checkpoints(split, checkpoints);
  const CorrectionState st = prepare_correction(model, theta_bar, cfg);
  EstimatorTrace trace;
  Vec events = Vec::Zero(model.param_dim());
  std::size_t next = 0;
  for (long j = split.N; j < split.n && next < checkpoints.size(); ++j) {
    events += event_sum(model, st.theta_bar, sample.paths[static_cast<std::size_t>(j)]);
    const long k = j + 1;
    if (k != checkpoints[next]) continue;
    ++next;
    const Vec score = events - static_cast<double>(k - split.N) * st.comp;
    trace.k.push_back(k);
    trace.theta.push_back(st.theta_bar + st.fisher_inv * score / static_cast<double>(k));
    trace.clipped.push_back(st.preliminary_clipped);
  }
  return trace;
}

EstimatorTrace two_step_at(const IntensityModel& model, const Sample& sample,
                           const Vec& theta_bar, const LearningSplit& split,
                           const std::vector<long>& checkpoints,
                           const QuadConfig& cfg) {
  check_split(sample, split);
  check_checkpoints(split, checkpoints);
  const CorrectionState st = prepare_correction(model, theta_bar, cfg);
  EstimatorTrace trace;
  Vec events = Vec::Zero(model.param_dim());
  std::size_t next = 0;
  for (long j = split.N; j < split.n && next < checkpoints.size(); ++j) {
    events += event_sum(model, st.theta_bar, sample.paths[static_cast<std::size_t>(j)]);
    const long k = j + 1;
    if (k != checkpoints[next]) continue;
    ++next;
    const double used = static_cast<double>(k - split.N);
    const Vec stage1 =
        st.theta_bar + st.fisher_inv * (events - used * st.comp) / static_cast<double>(k);
    const bool clipped = st.preliminary_clipped || !model.space.contains(stage1);
    const Vec anchor = model.space.clip_interior(stage1, kClipMargin);
    Vec comp2(model.param_dim());
    for (int c = 0; c < model.param_dim(); ++c) {
      comp2[c] = integrate_over(
          model, anchor,
          [&](double t) {
            return model.log_intensity_grad(st.theta_bar, t)[c] *
                   model.intensity(anchor, t);
          },
          cfg);
    }
    trace.k.push_back(k);
    trace.theta.push_back(anchor +
                          st.fisher_inv * (events - used * comp2) / static_cast<double>(k));
    trace.clipped.push_back(clipped);
  }
  return trace;
}

EstimatorTrace one_step_process(const IntensityModel& model, const Sample& sample,
                                const Vec& theta_bar, const LearningSplit& split,
                                long stride, const QuadConfig& cfg) {
  return one_step_at(model, sample, theta_bar, split, checkpoint_grid(split, stride),
                     cfg);
}

EstimatorTrace two_step_process(const IntensityModel& model, const Sample& sample,
                                const Vec& theta_bar, const LearningSplit& split,
                                long stride, const QuadConfig& cfg) {
  return two_step_at(model, sample, theta_bar, split, checkpoint_grid(split, stride),
                     cfg);
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Mme: return "mme";
    case EstimatorKind::OneStep: return "onestep";
    case EstimatorKind::OneStepProcess: return "onestep_process";
    case EstimatorKind::TwoStepProcess: return "twostep_process";
  }
  return "unknown";
}

EstimatorKind estimator_kind_from_string(const std::string& text) {
  if (text == "mme") return EstimatorKind::Mme;
  if (text == "onestep") return EstimatorKind::OneStep;
  if (text == "onestep_process") return EstimatorKind::OneStepProcess;
  if (text == "twostep_process") return EstimatorKind::TwoStepProcess;
  throw Error(ErrorKind::ConfigError, "unknown estimator kind: " + text);
}

PipelineResult estimate_pipeline(const IntensityModel& model, const Sample& sample,
                                 const MomentSpec& spec, EstimatorKind kind,
                                 double delta, long stride, const QuadConfig& cfg) {
  PipelineResult out;
  out.kind = kind;
  if (kind == EstimatorKind::Mme) {
    const MmeEstimate est = mme_estimate(sample, model, spec, cfg);
    out.preliminary = est.theta;
    out.theta = est.theta;
    if (!est.in_box) out.flags.push_back("outside_box");
    return out;
  }

  const StepMode mode =
      kind == EstimatorKind::TwoStepProcess ? StepMode::TwoStep : StepMode::OneStep;
  const LearningSplit split = learning_size(sample.n(), delta, mode);
  out.N = split.N;

  Sample learning;
  learning.domain = sample.domain;
  learning.paths.assign(sample.paths.begin(), sample.paths.begin() + split.N);
  const MmeEstimate prelim = mme_estimate(learning, model, spec, cfg);
  out.preliminary = prelim.theta;
  if (!prelim.in_box) out.flags.push_back("preliminary_outside_box");

  switch (kind) {
    case EstimatorKind::OneStep: {
      out.theta = one_step(model, sample, prelim.theta, split, cfg).theta;
      break;
    }
    case EstimatorKind::OneStepProcess: {
      out.trace = one_step_process(model, sample, prelim.theta, split, stride, cfg);
      out.theta = out.trace->theta.back();
      break;
    }
    case EstimatorKind::TwoStepProcess: {
      out.trace = two_step_process(model, sample, prelim.theta, split, stride, cfg);
      out.theta = out.trace->theta.back();
      break;
    }
    case EstimatorKind::Mme:
      break;
  }
  if (!model.space.contains(out.theta)) out.flags.push_back("final_outside_box");
  return out;
}

}  // namespace poisest
