#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "poisest/config.hpp"
#include "poisest/errors.hpp"
#include "poisest/format.hpp"
#include "poisest/json_out.hpp"
#include "poisest/mme.hpp"
#include "poisest/multistep.hpp"
#include "poisest/paths.hpp"
#include "poisest/quad.hpp"
#include "poisest/study.hpp"

namespace {

using namespace poisest;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
      return 2;
    case ErrorKind::ParseError:
    case ErrorKind::IoError:
    case ErrorKind::UnsortedEvents:
      return 3;
    default:
      return 4;
  }
}

struct CommonArgs {
  std::string config_path;
  std::optional<long> seed;
  std::optional<int> threads;
};

FileConfig load_config(const CommonArgs& args) {
  if (args.config_path.empty()) {
    throw Error(ErrorKind::ConfigError, "--config is required");
  }
  FileConfig cfg = parse_config_file(args.config_path);
  if (args.seed.has_value()) {
    if (*args.seed < 0) throw Error(ErrorKind::ConfigError, "seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*args.seed);
    if (cfg.study.has_value()) cfg.study->base_seed = cfg.seed;
  }
  if (args.threads.has_value()) {
    if (*args.threads < 1) {
      throw Error(ErrorKind::ConfigError, "threads must be >= 1");
    }
    cfg.threads = *args.threads;
    if (cfg.study.has_value()) cfg.study->threads = cfg.threads;
  }
  return cfg;
}

const IntensityModel& require_model(const FileConfig& cfg) {
  if (!cfg.model.has_value()) {
    throw Error(ErrorKind::ConfigError, "config has no \"model\" section");
  }
  return *cfg.model;
}

const Vec& require_theta(const FileConfig& cfg, const char* what) {
  if (!cfg.theta.has_value()) {
    throw Error(ErrorKind::ConfigError,
                std::string(what) + " needs model parameters in the config");
  }
  return *cfg.theta;
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

/// Surface modes: mme | onestep | twostep.
EstimatorKind parse_mode(const std::string& mode, bool for_trace) {
  if (mode == "mme" && !for_trace) return EstimatorKind::Mme;
  if (mode == "onestep") {
    return for_trace ? EstimatorKind::OneStepProcess : EstimatorKind::OneStep;
  }
  if (mode == "twostep") return EstimatorKind::TwoStepProcess;
  throw Error(ErrorKind::ConfigError,
              "unknown mode \"" + mode + "\" (expected mme, onestep or twostep)");
}

std::string estimate_json(const PipelineResult& result) {
  JsonValue root = JsonValue::object();
  root["estimator"] = to_string(result.kind);
  root["theta"] = result.theta;
  root["preliminary"] =
      result.kind == EstimatorKind::Mme ? JsonValue::array() : JsonValue(result.preliminary);
  root["N"] = result.N;
  JsonValue flags = JsonValue::array();
  for (const auto& flag : result.flags) flags.push_back(flag);
  root["flags"] = std::move(flags);
  return root.dump(2) + "\n";
}

PipelineResult run_estimate(const FileConfig& cfg, const std::string& events_path,
                            const std::string& mode, double delta, long stride,
                            bool for_trace) {
  const IntensityModel& model = require_model(cfg);
  const Sample sample = read_sample(events_path);
  const EstimatorKind kind = parse_mode(mode, for_trace);
  // For the single-value command, a two-step estimate only needs the k = n row.
  const long used_stride =
      (!for_trace && kind == EstimatorKind::TwoStepProcess) ? sample.n() : stride;
  return estimate_pipeline(model, sample, cfg.moments, kind, delta, used_stride);
}

std::string trace_csv(const EstimatorTrace& trace) {
  if (trace.k.empty()) {
    throw Error(ErrorKind::EmptySample, "trace has no rows");
  }
  const auto d = trace.theta.front().size();
  std::string out = "k";
  for (int c = 0; c < d; ++c) out += ",theta_" + std::to_string(c + 1);
  out += ",clipped_flag\n";
  for (std::size_t i = 0; i < trace.k.size(); ++i) {
    out += std::to_string(trace.k[i]);
    for (int c = 0; c < d; ++c) out += "," + format_double(trace.theta[i][c]);
    out += trace.clipped[i] ? ",1\n" : ",0\n";
  }
  return out;
}

std::string matrix_rows(const Mat& m, int digits) {
  std::string out;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      out += c ? "," : "";
      out += format_sig(m(r, c), digits);
    }
    out += "\n";
  }
  return out;
}

int cmd_simulate(const CommonArgs& common, std::optional<long> n_flag,
                 const std::string& sampler_flag, const std::string& out_path) {
  FileConfig cfg = load_config(common);
  const IntensityModel& model = require_model(cfg);
  const Vec& theta = require_theta(cfg, "simulate");
  long n = cfg.simulate.given ? cfg.simulate.n : 0;
  if (n_flag.has_value()) n = *n_flag;
  Sampler sampler = cfg.simulate.sampler;
  if (!sampler_flag.empty()) sampler = sampler_from_string(sampler_flag);
  const Sample sample = simulate_sample(model, theta, n, cfg.seed, 0, sampler);
  write_sample(sample, out_path);
  std::size_t events = 0;
  for (const auto& path : sample.paths) events += path.count();
  std::cout << "paths=" << sample.n() << " events=" << events
            << " mean_events_per_path="
            << format_double(static_cast<double>(events) /
                             static_cast<double>(sample.n()))
            << " file=" << out_path << "\n";
  return 0;
}

int cmd_mme(const CommonArgs& common, const std::string& events_path,
            const std::string& out_path) {
  FileConfig cfg = load_config(common);
  const PipelineResult result =
      run_estimate(cfg, events_path, "mme", 0.6, 1, false);
  write_text(estimate_json(result), out_path);
  return 0;
}

int cmd_onestep(const CommonArgs& common, const std::string& events_path,
                const std::string& mode_flag, std::optional<double> delta_flag,
                const std::string& out_path) {
  FileConfig cfg = load_config(common);
  std::string mode = cfg.estimate.mode;
  if (!mode_flag.empty()) mode = mode_flag;
  double delta = cfg.estimate.delta;
  if (!cfg.estimate.delta_given && mode == "twostep") delta = 4.0 / 9.0;
  if (delta_flag.has_value()) delta = *delta_flag;
  const PipelineResult result =
      run_estimate(cfg, events_path, mode, delta, cfg.estimate.stride, false);
  write_text(estimate_json(result), out_path);
  return 0;
}

int cmd_trace(const CommonArgs& common, const std::string& events_path,
              const std::string& mode_flag, std::optional<double> delta_flag,
              std::optional<long> stride_flag, const std::string& out_path) {
  FileConfig cfg = load_config(common);
  std::string mode = cfg.estimate.mode;
  if (!mode_flag.empty()) mode = mode_flag;
  double delta = cfg.estimate.delta;
  if (!cfg.estimate.delta_given && mode == "twostep") delta = 4.0 / 9.0;
  if (delta_flag.has_value()) delta = *delta_flag;
  long stride = cfg.estimate.stride;
  if (stride_flag.has_value()) stride = *stride_flag;
  const PipelineResult result =
      run_estimate(cfg, events_path, mode, delta, stride, true);
  write_text(trace_csv(*result.trace), out_path);
  return 0;
}

int cmd_study(const CommonArgs& common, const std::string& json_path,
              const std::string& csv_path) {
  FileConfig cfg = load_config(common);
  if (!cfg.study.has_value()) {
    throw Error(ErrorKind::ConfigError, "config has no \"study\" section");
  }
  const StudyReport report = run_study(*cfg.study);
  if (!json_path.empty()) write_text(report.to_json().dump(2) + "\n", json_path);
  write_text(report.summary_csv(), csv_path);
  return 0;
}

int cmd_fisher(const CommonArgs& common) {
  FileConfig cfg = load_config(common);
  const IntensityModel& model = require_model(cfg);
  const Vec& theta = require_theta(cfg, "fisher");
  const Mat fisher = fisher_info(model, theta);
  const Mat fisher_inv = invert_spd(fisher, ErrorKind::SingularFisher);
  std::string out;
  out += "fisher\n" + matrix_rows(fisher, 12);
  out += "fisher_inv\n" + matrix_rows(fisher_inv, 12);
  if (cfg.moments.dim() == model.param_dim()) {
    const Mat d = mme_covariance(model, theta, cfg.moments);
    out += "D\n" + matrix_rows(d, 12);
    out += "trace_fisher_inv," + format_sig(fisher_inv.trace(), 12) + "\n";
    out += "trace_D," + format_sig(d.trace(), 12) + "\n";
  } else {
    out += "trace_fisher_inv," + format_sig(fisher_inv.trace(), 12) + "\n";
  }
  std::cout << out;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter estimation for inhomogeneous Poisson processes"};
  app.require_subcommand(1);

  CommonArgs common;
  app.add_option("-c,--config", common.config_path, "JSON config file")
      ->expected(1);
  long seed_flag = -1;
  bool seed_set = false;
  app.add_option("--seed", seed_flag, "override config seed")
      ->each([&](const std::string&) { seed_set = true; });
  int threads_flag = 0;
  bool threads_set = false;
  app.add_option("--threads", threads_flag, "override config threads")
      ->each([&](const std::string&) { threads_set = true; });

  auto* sim = app.add_subcommand("simulate", "simulate event paths");
  long sim_n = -1;
  bool sim_n_set = false;
  std::string sim_sampler;
  std::string sim_out;
  sim->add_option("--n", sim_n, "number of paths")->each([&](const std::string&) {
    sim_n_set = true;
  });
  sim->add_option("--sampler", sim_sampler, "thinning | density | auto");
  sim->add_option("--out", sim_out, "output file (.ndjson or .csv)")->required();

  auto* mme_cmd = app.add_subcommand("mme", "method-of-moments estimate");
  std::string mme_events;
  std::string mme_out;
  mme_cmd->add_option("--events", mme_events, "event file")->required();
  mme_cmd->add_option("--out", mme_out, "output JSON file (default stdout)");

  auto* one = app.add_subcommand("onestep", "corrected estimate");
  std::string one_events;
  std::string one_mode;
  double one_delta = -1.0;
  bool one_delta_set = false;
  std::string one_out;
  one->add_option("--events", one_events, "event file")->required();
  one->add_option("--mode", one_mode, "mme | onestep | twostep");
  one->add_option("--delta", one_delta, "learning exponent")
      ->each([&](const std::string&) { one_delta_set = true; });
  one->add_option("--out", one_out, "output JSON file (default stdout)");

  auto* trace = app.add_subcommand("trace", "estimator trajectory CSV");
  std::string trace_events;
  std::string trace_mode;
  double trace_delta = -1.0;
  bool trace_delta_set = false;
  long trace_stride = 0;
  bool trace_stride_set = false;
  std::string trace_out;
  trace->add_option("--events", trace_events, "event file")->required();
  trace->add_option("--mode", trace_mode, "onestep | twostep");
  trace->add_option("--delta", trace_delta, "learning exponent")
      ->each([&](const std::string&) { trace_delta_set = true; });
  trace->add_option("--stride", trace_stride, "record every stride-th k")
      ->each([&](const std::string&) { trace_stride_set = true; });
  trace->add_option("--out", trace_out, "output CSV file (default stdout)");

  auto* study = app.add_subcommand("study", "Monte Carlo study");
  std::string study_json;
  std::string study_csv;
  study->add_option("--out-json", study_json, "full report JSON file");
  study->add_option("--out-csv", study_csv, "summary CSV file (default stdout)");

  auto* fisher = app.add_subcommand("fisher", "Fisher information at the config theta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (seed_set) common.seed = seed_flag;
  if (threads_set) common.threads = threads_flag;

  try {
    if (sim->parsed()) {
      return cmd_simulate(common,
                          sim_n_set ? std::optional<long>(sim_n) : std::nullopt,
                          sim_sampler, sim_out);
    }
    if (mme_cmd->parsed()) return cmd_mme(common, mme_events, mme_out);
    if (one->parsed()) {
      return cmd_onestep(common, one_events, one_mode,
                         one_delta_set ? std::optional<double>(one_delta)
                                       : std::nullopt,
                         one_out);
    }
    if (trace->parsed()) {
      return cmd_trace(common, trace_events, trace_mode,
                       trace_delta_set ? std::optional<double>(trace_delta)
                                       : std::nullopt,
                       trace_stride_set ? std::optional<long>(trace_stride)
                                        : std::nullopt,
                       trace_out);
    }
    if (study->parsed()) return cmd_study(common, study_json, study_csv);
    if (fisher->parsed()) return cmd_fisher(common);
  } catch (const poisest::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  return 0;
}
