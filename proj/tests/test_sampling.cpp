#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bes3/sampling.hpp"
#include "bes3/stats.hpp"
#include "scripted_source.hpp"

using namespace bes3;
using bes3::testing::ScriptedSource;

namespace {

// First-passage density written out independently of the library.
double passage_density(double t, double d) {
  if (!(t > 0.0) || !std::isfinite(t)) return 0.0;
  return d * std::exp(-d * d / (2.0 * t) - 1.5 * std::log(t)) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("forced draws give the expected first passage and g") {
  ScriptedSource src({0.25}, {2.0});
  const auto s = sample_g_exact(src, 1.0);
  CHECK(s.u == 0.25);
  CHECK(s.a == 0.25);
  CHECK(s.g == doctest::Approx(0.140625).epsilon(1e-15));
  CHECK(src.call_log() == "un");

  ScriptedSource passage({}, {-0.5});
  CHECK(sample_first_passage(passage, 3.0).time == doctest::Approx(36.0));
}

TEST_CASE("zero distance consumes one normal and returns time zero") {
  ScriptedSource src({}, {1.7, 0.3});
  CHECK(sample_first_passage(src, 0.0).time == 0.0);
  CHECK(src.call_log() == "n");
}

TEST_CASE("an exactly zero normal is redrawn") {
  ScriptedSource src({}, {0.0, 0.0, 2.0});
  CHECK(sample_first_passage(src, 1.0).time == 0.25);
  CHECK(src.call_log() == "nnn");
}

TEST_CASE("U = 1 puts the minimum at r and g at zero") {
  ScriptedSource src({1.0}, {0.7});
  const auto s = sample_g_exact(src, 2.0);
  CHECK(s.a == 2.0);
  CHECK(s.g == 0.0);
}

TEST_CASE("first-passage Laplace transform matches the density oracle") {
  // E exp(-T/2) for d = 1 is exp(-1); the oracle integrates the density.
  boost::math::quadrature::exp_sinh<double> integrator;
  const double oracle =
      integrator.integrate([](double t) { return std::exp(-0.5 * t) * passage_density(t, 1.0); });
  REQUIRE(oracle == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

  auto rng = make_rng(11, 0);
  const int n = 200000;
  std::vector<double> values(n);
  for (auto& v : values) v = std::exp(-0.5 * sample_first_passage(rng, 1.0).time);
  const auto ci = mc_mean_ci(values);
  CHECK(std::abs(ci.mean - oracle) <= 3.0 * ci.standard_error);
}

TEST_CASE("exact g draws reproduce the Laplace transform at lambda = 1/2") {
  auto rng = make_rng(12, 0);
  const int n = 200000;
  std::vector<double> values(n);
  for (auto& v : values) v = std::exp(-0.5 * sample_g_exact(rng, 1.0).g);
  const auto ci = mc_mean_ci(values);
  CHECK(std::abs(ci.mean - 0.632121) <= 3.0 * ci.standard_error + 1e-6);
}

TEST_CASE("g scales as r^2 under shared draws") {
  for (double c : {2.0, 0.5}) {
    auto a = make_rng(13, 0);
    auto b = make_rng(13, 0);
    for (int i = 0; i < 1000; ++i) {
      const auto base = sample_g_exact(a, 1.5);
      const auto scaled = sample_g_exact(b, 1.5 * c);
      REQUIRE(scaled.g == c * c * base.g);
      REQUIRE(scaled.a == c * base.a);
    }
  }
}

TEST_CASE("the uniform behind g is uniform") {
  auto rng = make_rng(14, 0);
  std::vector<double> u(100000);
  for (auto& x : u) x = sample_g_exact(rng, 1.0).u;
  const auto ks = ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(ks.statistic < ks_critical_value(0.001, ks.effective_n()));
}

TEST_CASE("first-passage histogram matches the density") {
  // 10^6 draws at d = 1, 100 bins on (0, 5]; bin masses from Gauss-Kronrod.
  auto rng = make_rng(15, 0);
  const int n = 1000000;
  const int bins = 100;
  const double width = 5.0 / bins;
  std::vector<int> counts(bins, 0);
  for (int i = 0; i < n; ++i) {
    const double t = sample_first_passage(rng, 1.0).time;
    if (t > 0.0 && t <= 5.0) ++counts[std::min(bins - 1, static_cast<int>(t / width))];
  }
  int worst = 0;
  double worst_z = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double p = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [](double t) { return passage_density(t, 1.0); }, b * width, (b + 1) * width);
    const double expected = n * p;
    const double z = std::abs(counts[b] - expected) / std::sqrt(std::max(expected, 1.0));
    if (z > worst_z) {
      worst_z = z;
      worst = b;
    }
  }
  INFO("worst bin " << worst);
  CHECK(worst_z < 5.0);
}

TEST_CASE("g equals the hitting time of rU' under the coupling U' = 1 - U") {
  auto a = make_rng(16, 0);
  auto b = make_rng(16, 0);
  const double r = 1.3;
  for (int i = 0; i < 1000; ++i) {
    const auto g = sample_g_exact(a, r);
    const double u_prime = 1.0 - b.draw_uniform01();
    const double t = sample_first_passage(b, r * u_prime).time;
    REQUIRE(g.g == t);
  }
}

TEST_CASE("hitting rU instead of r(1 - U) is not distinguishable") {
  auto a = make_rng(17, 0);
  auto b = make_rng(17, 1);
  const double r = 1.0;
  std::vector<double> g(100000), swapped(100000);
  for (auto& x : g) x = sample_g_exact(a, r).g;
  for (auto& x : swapped) {
    const double u = b.draw_uniform01();
    x = sample_first_passage(b, r * u).time;
  }
  const auto ks = ks_two_sample(g, swapped);
  CHECK(ks.statistic < ks_critical_value(0.001, ks.effective_n()));
}
