#include <doctest.h>

#include <cmath>
#include <vector>

#include "stablesde/levy_noise.hpp"
#include "stablesde/limit_tests.hpp"
#include "stablesde/stats.hpp"

using namespace stablesde;

namespace {

ScaledSample gaussian_sample(int n, double mu, double sigma, std::uint64_t seed) {
  ScaledSample s;
  s.values.resize(n);
  RngStream rng(seed, 0);
  for (auto& v : s.values) v = mu + sigma * rng.gaussian();
  return s;
}

}  // namespace

TEST_CASE("replicated statistic of a centered constant observable is zero") {
  DriftModel m = DriftModel::power(0.0);
  StableNoise noise(1.5, 1);
  auto s = replicate_scaled_statistic(m, noise, TestFunction::constant(2.0), 0.5,
                                      5.0, 100, 2.0, RngStream(1, 0));
  for (double v : s.values) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("replicated statistic is symmetric for odd observables") {
  DriftModel m = DriftModel::power(0.0);
  StableNoise noise(1.5, 1);
  auto s = replicate_scaled_statistic(m, noise, TestFunction::identity(), 1.0 / 1.5,
                                      20.0, 400, 0.0, RngStream(2, 0));
  std::vector<double> sorted(s.values);
  std::sort(sorted.begin(), sorted.end());
  double med = quantile_sorted(sorted, 0.5);
  CHECK(std::abs(med) < 3.0 * interquartile_range(s.values) /
                            std::sqrt(static_cast<double>(s.values.size())));
}

TEST_CASE("replicate rejects bad preconditions") {
  DriftModel m = DriftModel::power(0.0);
  StableNoise noise(1.5, 1);
  CHECK_THROWS(replicate_scaled_statistic(m, noise, TestFunction::sine(), 0.5, -1.0,
                                          200, 0.0, RngStream(1, 0)));
  CHECK_THROWS(replicate_scaled_statistic(m, noise, TestFunction::sine(), 0.5, 1.0,
                                          50, 0.0, RngStream(1, 0)));
}

TEST_CASE("gaussian KS test calibration") {
  auto s = gaussian_sample(2000, 0.0, 1.0, 101);
  auto v = ks_gaussian_test(s, 1.0);
  CHECK(v.decision == Decision::consistent);
  CHECK(v.threshold == doctest::Approx(1.628 / std::sqrt(2000.0)));

  auto shifted = gaussian_sample(2000, 1.0, 1.0, 102);
  auto w = ks_gaussian_test(shifted, 1.0);
  CHECK(w.decision == Decision::rejected);
  CHECK(w.statistic > 0.3);  // sup-CDF gap of N(1,1) vs N(0,1) is about 0.38
}

TEST_CASE("gaussian KS test rejects invalid inputs") {
  auto s = gaussian_sample(2000, 0.0, 1.0, 103);
  CHECK_THROWS(ks_gaussian_test(s, 0.0));
  ScaledSample empty;
  CHECK_THROWS(ks_gaussian_test(empty, 1.0));
}

TEST_CASE("stable KS test accepts exact sampler draws") {
  StableNoise noise(1.5, 1);
  ScaledSample s;
  s.values.resize(2000);
  RngStream rng(104, 0);
  for (auto& v : s.values) sample_stable_increment_into(noise, 1.0, rng, &v);
  auto verdict = ks_stable_test(s, 1.5);
  CHECK(verdict.decision == Decision::consistent);
}

TEST_CASE("cf distance test: sampler draws vs their own cf") {
  StableNoise noise(1.5, 1);
  ScaledSample s;
  s.values.resize(2000);
  RngStream rng(105, 0);
  for (auto& v : s.values) sample_stable_increment_into(noise, 1.0, rng, &v);
  auto verdict = cf_distance_test(
      s, [](double xi) { return stable_cf(1.5, 1.0, xi); }, {0.5, 1.0, 2.0});
  CHECK(verdict.decision == Decision::consistent);
}

TEST_CASE("cf distance test separates gaussian from stable at xi=2") {
  // gaussian cf exp(-2) = 0.135 vs stable exp(-2^1.5) = 0.059: gap 0.076.
  // rejection needs 6 sqrt(2/n) < 0.076, i.e. n > 12466
  auto s = gaussian_sample(20000, 0.0, 1.0, 106);
  auto verdict = cf_distance_test(
      s, [](double xi) { return stable_cf(1.5, 1.0, xi); }, {2.0});
  CHECK(verdict.decision == Decision::rejected);
  auto small = gaussian_sample(2000, 0.0, 1.0, 108);
  auto v2 = cf_distance_test(
      small, [](double xi) { return stable_cf(1.5, 1.0, xi); }, {2.0});
  CHECK(v2.decision != Decision::rejected);  // gap sits below 3 sqrt(2/2000)
}

TEST_CASE("cf distance at the origin is zero and degenerate-legal") {
  auto s = gaussian_sample(200, 5.0, 2.0, 107);
  auto verdict = cf_distance_test(s, [](double) { return 1.0; }, {0.0});
  CHECK(verdict.statistic == doctest::Approx(0.0));
  CHECK(verdict.decision == Decision::consistent);
}

TEST_CASE("scan validates the horizon grid") {
  DriftModel m = DriftModel::power(0.0);
  StableNoise noise(1.5, 1);
  CHECK_THROWS(scaling_exponent_scan(m, noise, TestFunction::identity(),
                                     {1.0, 2.0, 3.0}, 100, 0.0, RngStream(1, 0)));
  CHECK_THROWS(scaling_exponent_scan(m, noise, TestFunction::identity(),
                                     {1.0, 2.0, 3.0, 4.0}, 100, 0.0,
                                     RngStream(1, 0)));
}

TEST_CASE("scan recovers the diffusive exponent for pure noise integration") {
  // bounded observable of a fast-mixing chain: integral spread grows like sqrt(t)
  DriftModel m = DriftModel::power(0.0);
  StableNoise noise(1.5, 1);
  ReplicaConfig rc;
  rc.dt = 0.02;
  auto res = scaling_exponent_scan(m, noise, TestFunction::sine(),
                                   {8.0, 16.0, 32.0, 64.0, 128.0}, 300, 0.0,
                                   RngStream(9, 0), rc);
  CHECK(res.gamma_hat == doctest::Approx(0.5).epsilon(0.25));
  CHECK(res.iqr.size() == 5);
}

TEST_CASE("verdicts are deterministic in the seed") {
  DriftModel m = DriftModel::power(0.0);
  StableNoise noise(1.5, 1);
  auto s1 = replicate_scaled_statistic(m, noise, TestFunction::sine(), 0.5, 10.0,
                                       150, 0.0, RngStream(10, 0));
  auto s2 = replicate_scaled_statistic(m, noise, TestFunction::sine(), 0.5, 10.0,
                                       150, 0.0, RngStream(10, 0));
  auto v1 = ks_gaussian_test(s1, 1.0);
  auto v2 = ks_gaussian_test(s2, 1.0);
  CHECK(v1.statistic == v2.statistic);
  CHECK(v1.decision == v2.decision);
}
