#include "poisest/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poisest/errors.hpp"
#include "poisest/format.hpp"

namespace poisest {

namespace {

constexpr int kEnvelopeGrid = 4096;
constexpr double kEnvelopeFactor = 1.001;

double bisect_quantile(const IntensityModel& model, const Vec& theta, double mass_lo,
                       double target, double lo, double hi) {
  double a = lo;
  double b = hi;
  for (int it = 0; it < 200 && (b - a) > 1e-15 * (std::abs(a) + std::abs(b) + 1.0);
       ++it) {
    const double mid = 0.5 * (a + b);
    if (model.cumulative(theta, mid) - mass_lo < target) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

void finalize_events(std::vector<double>& events) {
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());
}

Sample parse_ndjson(std::istream& in, const std::string& file);
Sample parse_csv(std::istream& in, const std::string& file);

}  // namespace

std::mt19937_64 make_generator(const SeedSpec& seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.base_seed),
                    static_cast<std::uint32_t>(seed.base_seed >> 32),
                    static_cast<std::uint32_t>(seed.stream_index),
                    static_cast<std::uint32_t>(seed.stream_index >> 32)};
  return std::mt19937_64(seq);
}

PoissonPath simulate_thinning(const IntensityModel& model, const Vec& theta,
                              const SeedSpec& seed) {
  model.validate_theta(theta);
  const auto [lo, hi] = model.window(theta);
  double lam_max = 0.0;
  for (int i = 0; i <= kEnvelopeGrid; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / kEnvelopeGrid;
    lam_max = std::max(lam_max, model.intensity(theta, t));
  }
  lam_max *= kEnvelopeFactor;
  PoissonPath path;
  if (lam_max <= 0.0) return path;

  auto gen = make_generator(seed);
  std::exponential_distribution<double> gap(lam_max);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = lo;
  while (true) {
    t += gap(gen);
    if (t > hi) break;
    const double lam = model.intensity(theta, t);
    if (lam > lam_max) {
      throw Error(ErrorKind::EnvelopeError,
                  "intensity " + format_double(lam) + " exceeds envelope " +
                      format_double(lam_max) + " at t=" + format_double(t));
    }
    if (unif(gen) * lam_max <= lam) path.events.push_back(t);
  }
  finalize_events(path.events);
  return path;
}

PoissonPath simulate_by_density(const IntensityModel& model, const Vec& theta,
                                const SeedSpec& seed) {
  model.validate_theta(theta);
  const auto [lo, hi] = model.window(theta);
  const double mass = model.total_mass(theta);
  PoissonPath path;
  if (mass <= 0.0) return path;

  auto gen = make_generator(seed);
  std::poisson_distribution<long> count(mass);
  const long k = count(gen);
  path.events.reserve(static_cast<std::size_t>(k));

  switch (model.family) {
    case Family::GammaShapeRate: {
      std::gamma_distribution<double> draw(theta[1], 1.0 / theta[0]);
      for (long i = 0; i < k; ++i) {
        double t = draw(gen);
        while (!(t > lo && t <= hi)) t = draw(gen);
        path.events.push_back(t);
      }
      break;
    }
    case Family::GaussianBell: {
      std::normal_distribution<double> draw(theta[0], theta[1]);
      for (long i = 0; i < k; ++i) {
        double t = draw(gen);
        while (!(t > lo && t <= hi)) t = draw(gen);
        path.events.push_back(t);
      }
      break;
    }
    default: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const double mass_lo = model.cumulative(theta, lo);
      const double total = model.cumulative(theta, hi) - mass_lo;
      for (long i = 0; i < k; ++i) {
        const double target = unif(gen) * total;
        path.events.push_back(bisect_quantile(model, theta, mass_lo, target, lo, hi));
      }
      break;
    }
  }
  finalize_events(path.events);
  return path;
}

PoissonPath simulate_path(const IntensityModel& model, const Vec& theta,
                          const SeedSpec& seed, Sampler sampler) {
  if (sampler == Sampler::Auto) {
    sampler = (model.family == Family::GammaShapeRate ||
               model.family == Family::GaussianBell)
                  ? Sampler::ByDensity
                  : Sampler::Thinning;
  }
  return sampler == Sampler::ByDensity ? simulate_by_density(model, theta, seed)
                                       : simulate_thinning(model, theta, seed);
}

Sample simulate_sample(const IntensityModel& model, const Vec& theta, long n,
                       std::uint64_t base_seed, std::uint64_t rep_index,
                       Sampler sampler) {
  if (n < 1) throw Error(ErrorKind::ConfigError, "sample size must be >= 1");
  Sample sample;
  sample.domain = model.domain;
  sample.paths.reserve(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) {
    const SeedSpec seed{base_seed,
                        rep_index * static_cast<std::uint64_t>(n) +
                            static_cast<std::uint64_t>(j)};
    sample.paths.push_back(simulate_path(model, theta, seed, sampler));
  }
  std::ostringstream tag;
  tag << model.family_name() << " theta=[";
  for (int i = 0; i < theta.size(); ++i) {
    if (i) tag << ",";
    tag << format_double(theta[i]);
  }
  tag << "] seed=" << base_seed << " rep=" << rep_index;
  sample.model_tag = tag.str();
  return sample;
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void check_sorted(const std::vector<double>& events, const std::string& file,
                  std::size_t line_no) {
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    if (!(events[i] < events[i + 1])) {
      throw Error(ErrorKind::UnsortedEvents,
                  file + ":" + std::to_string(line_no) +
                      ": events not strictly increasing");
    }
  }
}

Sample parse_ndjson(std::istream& in, const std::string& file) {
  Sample sample;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError,
                  file + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("path") || !j.contains("events") ||
        j.size() != 2) {
      throw Error(ErrorKind::ParseError,
                  file + ":" + std::to_string(line_no) +
                      ": expected {\"path\": <int>, \"events\": [...]}");
    }
    if (!j["path"].is_number_integer() ||
        j["path"].get<long>() != sample.n()) {
      throw Error(ErrorKind::ParseError,
                  file + ":" + std::to_string(line_no) +
                      ": path ids must be 0,1,... in order");
    }
    if (!j["events"].is_array()) {
      throw Error(ErrorKind::ParseError,
                  file + ":" + std::to_string(line_no) + ": events must be an array");
    }
    PoissonPath path;
    for (const auto& v : j["events"]) {
      if (!v.is_number()) {
        throw Error(ErrorKind::ParseError,
                    file + ":" + std::to_string(line_no) + ": non-numeric event time");
      }
      path.events.push_back(v.get<double>());
    }
    check_sorted(path.events, file, line_no);
    sample.paths.push_back(std::move(path));
  }
  return sample;
}

Sample parse_csv(std::istream& in, const std::string& file) {
  Sample sample;
  std::string line;
  std::size_t line_no = 0;
  long max_id = -1;
  std::vector<std::pair<long, double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line_no == 1 && line.find("path_id") != std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::ParseError,
                  file + ":" + std::to_string(line_no) + ": expected path_id,t");
    }
    try {
      std::size_t used = 0;
      const long id = std::stol(line.substr(0, comma), &used);
      const double t = std::stod(line.substr(comma + 1));
      if (id < 0) throw std::invalid_argument("negative id");
      rows.emplace_back(id, t);
      max_id = std::max(max_id, id);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError,
                  file + ":" + std::to_string(line_no) + ": expected path_id,t");
    }
  }
  if (max_id >= 0) sample.paths.resize(static_cast<std::size_t>(max_id) + 1);
  for (const auto& [id, t] : rows) {
    sample.paths[static_cast<std::size_t>(id)].events.push_back(t);
  }
  for (std::size_t i = 0; i < sample.paths.size(); ++i) {
    check_sorted(sample.paths[i].events, file, i + 1);
  }
  return sample;
}

}  // namespace

Sample read_sample(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + file);
  Sample sample = has_suffix(file, ".csv") ? parse_csv(in, file) : parse_ndjson(in, file);
  if (sample.paths.empty()) {
    throw Error(ErrorKind::EmptySample, file + ": no paths");
  }
  return sample;
}

void write_sample(const Sample& sample, const std::string& file) {
  if (sample.paths.empty()) {
    throw Error(ErrorKind::EmptySample, "refusing to write a sample with no paths");
  }
  std::ofstream out(file);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + file + " for writing");
  if (has_suffix(file, ".csv")) {
    out << "path_id,t\n";
    for (long i = 0; i < sample.n(); ++i) {
      for (const double t : sample.paths[static_cast<std::size_t>(i)].events) {
        out << i << "," << format_double(t) << "\n";
      }
    }
  } else {
    for (long i = 0; i < sample.n(); ++i) {
      out << "{\"path\": " << i << ", \"events\": [";
      const auto& events = sample.paths[static_cast<std::size_t>(i)].events;
      for (std::size_t j = 0; j < events.size(); ++j) {
        if (j) out << ", ";
        out << format_double(events[j]);
      }
      out << "]}\n";
    }
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + file);
}

}  // namespace poisest
