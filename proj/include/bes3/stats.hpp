#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace bes3 {

struct KsResult {
  double statistic = 0.0;  // sup-distance D
  std::size_t n = 0;
  std::size_t m = 0;  // 0 for the one-sample test
  double p_value = 1.0;

  /// nm / (n + m), or n for the one-sample test.
  double effective_n() const;
};

struct MeanCi {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Limiting Kolmogorov survival function P(K > x) = 2 sum (-1)^(k-1) exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

/// Asymptotic critical D at level alpha: sqrt(-ln(alpha / 2) / 2) / sqrt(n_eff).
double ks_critical_value(double alpha, double effective_n);

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);
KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf);

/// Sample mean and standard error from the unbiased variance.
MeanCi mc_mean_ci(std::span<const double> samples);

}  // namespace bes3
