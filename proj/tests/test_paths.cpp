#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "poisest/errors.hpp"
#include "poisest/paths.hpp"
#include "test_helpers.hpp"

using namespace poisest;
using namespace poisest::testing;

namespace {

std::filesystem::path tmp_dir() {
  const auto dir = std::filesystem::path("paths_test_tmp");
  std::filesystem::create_directories(dir);
  return dir;
}

/// Asymptotic two-sample Kolmogorov-Smirnov p-value (Stephens approximation).
double ks_two_sample_pvalue(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  const double ne = nx * ny / (nx + ny);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term =
        2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace

TEST_CASE("identical seeds give bit-identical paths") {
  const auto gamma = make_gamma_model();
  const Vec theta = vec2(2.0, 3.0);
  for (const Sampler s : {Sampler::Thinning, Sampler::ByDensity}) {
    const PoissonPath a = simulate_path(gamma, theta, {42, 7}, s);
    const PoissonPath b = simulate_path(gamma, theta, {42, 7}, s);
    REQUIRE(a.count() == b.count());
    for (std::size_t i = 0; i < a.count(); ++i) CHECK(a.events[i] == b.events[i]);
  }
  const PoissonPath c = simulate_path(gamma, theta, {42, 8});
  const PoissonPath d = simulate_path(gamma, theta, {43, 7});
  CHECK(c.events != d.events);
}

TEST_CASE("thinning matches homogeneous and unit-mass rates") {
  const auto flat = make_sine_model(0.0, 2.0);
  double count = 0.0;
  for (int i = 0; i < 10000; ++i) {
    count += static_cast<double>(
        simulate_thinning(flat, vec1(1.0), {2024, static_cast<std::uint64_t>(i)}).count());
  }
  CHECK(std::abs(count / 10000.0 - 2.0) < 0.05);

  const auto gamma = make_gamma_model();
  double total = 0.0;
  for (int i = 0; i < 10000; ++i) {
    total += static_cast<double>(
        simulate_thinning(gamma, vec2(2.0, 3.0), {555, static_cast<std::uint64_t>(i)})
            .count());
  }
  CHECK(std::abs(total / 10000.0 - 1.0) < 0.03);
}

TEST_CASE("density sampler event-time mean and empty paths") {
  const auto gamma = make_gamma_model();
  double sum = 0.0;
  long events = 0;
  long empties = 0;
  for (int i = 0; i < 10000; ++i) {
    const PoissonPath p =
        simulate_by_density(gamma, vec2(2.0, 3.0), {99, static_cast<std::uint64_t>(i)});
    if (p.count() == 0) ++empties;
    for (double t : p.events) {
      sum += t;
      ++events;
    }
  }
  CHECK(std::abs(sum / static_cast<double>(events) - 1.5) < 0.05);
  CHECK(empties > 2000);  // P(no event) = 1/e for unit total mass
}

TEST_CASE("both samplers draw from the same distribution") {
  const auto gamma = make_gamma_model();
  const Vec theta = vec2(2.0, 3.0);
  std::vector<double> a, b;
  for (int i = 0; i < 5000; ++i) {
    const auto pa = simulate_thinning(gamma, theta, {7, static_cast<std::uint64_t>(i)});
    const auto pb =
        simulate_by_density(gamma, theta, {7, static_cast<std::uint64_t>(i + 5000)});
    a.insert(a.end(), pa.events.begin(), pa.events.end());
    b.insert(b.end(), pb.events.begin(), pb.events.end());
  }
  CHECK(ks_two_sample_pvalue(a, b) > 0.001);

  const auto sine = make_sine_model(1.0, 2.0);
  std::vector<double> c, d;
  for (int i = 0; i < 5000; ++i) {
    const auto pc = simulate_thinning(sine, vec1(1.0), {8, static_cast<std::uint64_t>(i)});
    const auto pd =
        simulate_by_density(sine, vec1(1.0), {8, static_cast<std::uint64_t>(i + 5000)});
    c.insert(c.end(), pc.events.begin(), pc.events.end());
    d.insert(d.end(), pd.events.begin(), pd.events.end());
  }
  CHECK(ks_two_sample_pvalue(c, d) > 0.001);
}

TEST_CASE("counts on disjoint intervals are uncorrelated with the right means") {
  const auto gamma = make_gamma_model();
  const Vec theta = vec2(2.0, 3.0);
  const double cut = 0.8;
  std::vector<double> left, right;
  left.reserve(10000);
  right.reserve(10000);
  for (int i = 0; i < 10000; ++i) {
    const auto p = simulate_path(gamma, theta, {1234, static_cast<std::uint64_t>(i)});
    double l = 0.0, r = 0.0;
    for (double t : p.events) (t <= cut ? l : r) += 1.0;
    left.push_back(l);
    right.push_back(r);
  }
  const double m = 10000.0;
  double ml = 0.0, mr = 0.0;
  for (int i = 0; i < 10000; ++i) {
    ml += left[i] / m;
    mr += right[i] / m;
  }
  double cll = 0.0, crr = 0.0, clr = 0.0;
  for (int i = 0; i < 10000; ++i) {
    cll += (left[i] - ml) * (left[i] - ml) / m;
    crr += (right[i] - mr) * (right[i] - mr) / m;
    clr += (left[i] - ml) * (right[i] - mr) / m;
  }
  CHECK(std::abs(clr / std::sqrt(cll * crr)) < 0.05);

  const double mass_left = gamma.cumulative(theta, cut);
  const double mass_right = gamma.total_mass(theta) - mass_left;
  CHECK(std::abs(ml - mass_left) < 3.0 * std::sqrt(mass_left / m));
  CHECK(std::abs(mr - mass_right) < 3.0 * std::sqrt(mass_right / m));
}

TEST_CASE("sample streams are laid out by replication and path index") {
  const auto gamma = make_gamma_model();
  const Vec theta = vec2(2.0, 3.0);
  const Sample s = simulate_sample(gamma, theta, 10, 71, 2);
  REQUIRE(s.n() == 10);
  for (std::uint64_t j : {std::uint64_t{0}, std::uint64_t{7}}) {
    const PoissonPath direct = simulate_path(gamma, theta, {71, 2 * 10 + j});
    CHECK(s.paths[j].events == direct.events);
  }
  CHECK_FALSE(s.model_tag.empty());
}

TEST_CASE("ndjson round trip is bit exact") {
  const auto gamma = make_gamma_model();
  const Sample s = simulate_sample(gamma, vec2(2.0, 3.0), 50, 31);
  const auto file = (tmp_dir() / "roundtrip.ndjson").string();
  write_sample(s, file);
  const Sample r = read_sample(file);
  REQUIRE(r.n() == s.n());
  for (long j = 0; j < s.n(); ++j) {
    REQUIRE(r.paths[j].count() == s.paths[j].count());
    for (std::size_t i = 0; i < s.paths[j].count(); ++i) {
      CHECK(r.paths[j].events[i] == s.paths[j].events[i]);
    }
  }
}

TEST_CASE("ndjson parsing accepts the documented shapes") {
  const auto file = (tmp_dir() / "literal.ndjson").string();
  {
    std::ofstream out(file);
    out << "{\"path\": 0, \"events\": [0.1, 0.9]}\n";
    out << "{\"path\": 1, \"events\": []}\n";
  }
  const Sample s = read_sample(file);
  REQUIRE(s.n() == 2);
  CHECK(s.paths[0].count() == 2);
  CHECK(s.paths[0].events[1] == doctest::Approx(0.9));
  CHECK(s.paths[1].count() == 0);
}

TEST_CASE("ndjson parsing rejects bad input with located errors") {
  const auto unsorted = (tmp_dir() / "unsorted.ndjson").string();
  {
    std::ofstream out(unsorted);
    out << "{\"path\": 0, \"events\": [0.9, 0.1]}\n";
  }
  CHECK_THROWS_AS((void)read_sample(unsorted), Error);
  try {
    (void)read_sample(unsorted);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsortedEvents);
  }

  const auto garbled = (tmp_dir() / "garbled.ndjson").string();
  {
    std::ofstream out(garbled);
    out << "{\"path\": 0, \"events\": [0.1]}\n";
    out << "{\"path\": 1, \"events\": oops}\n";
  }
  try {
    (void)read_sample(garbled);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  CHECK_THROWS_AS((void)read_sample((tmp_dir() / "missing.ndjson").string()), Error);
}

TEST_CASE("csv alternative format is accepted on read") {
  const auto file = (tmp_dir() / "events.csv").string();
  {
    std::ofstream out(file);
    out << "path_id,t\n";
    out << "0,0.5\n";
    out << "0,0.9\n";
    out << "2,1.4\n";
  }
  const Sample s = read_sample(file);
  REQUIRE(s.n() == 3);
  CHECK(s.paths[0].count() == 2);
  CHECK(s.paths[1].count() == 0);
  CHECK(s.paths[2].events[0] == doctest::Approx(1.4));
}
