#include "bes3/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bes3/errors.hpp"

namespace bes3 {

double KsResult::effective_n() const {
  if (m == 0) return static_cast<double>(n);
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return dn * dm / (dn + dm);
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  // The alternating series is useless for small x; use the theta-function
  // form of the CDF there instead.
  if (x < 1.0) {
    const double pi = 3.14159265358979323846;
    const double q = std::exp(-pi * pi / (8.0 * x * x));
    double sum = 0.0;
    for (int k = 1; k < 40; k += 2) sum += std::pow(q, k * k);
    const double cdf = std::sqrt(2.0 * pi) / x * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical_value(double alpha, double effective_n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("ks_critical_value: alpha must be in (0, 1)");
  if (!(effective_n > 0.0)) throw UsageError("ks_critical_value: effective n must be > 0");
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(effective_n);
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw UsageError("ks_two_sample: both samples must be non-empty");
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double n = static_cast<double>(xs.size());
  const double m = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  // Advance past every copy of the smallest pending value in both samples
  // before comparing, so ties never produce a spurious jump.
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == v) ++i;
    while (j < ys.size() && ys[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KsResult result{d, xs.size(), ys.size(), 1.0};
  result.p_value = kolmogorov_survival(std::sqrt(result.effective_n()) * d);
  return result;
}

KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw UsageError("ks_one_sample: sample must be non-empty");
  std::vector<double> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  KsResult result{d, xs.size(), 0, 1.0};
  result.p_value = kolmogorov_survival(std::sqrt(n) * d);
  return result;
}

MeanCi mc_mean_ci(std::span<const double> samples) {
  if (samples.size() < 2) throw UsageError("mc_mean_ci: need at least 2 samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double variance = ss / (n - 1.0);
  return {mean, std::sqrt(variance / n)};
}

}  // namespace bes3
