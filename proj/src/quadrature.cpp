#include "bes3/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "bes3/errors.hpp"

namespace bes3 {
namespace {

// QUADPACK qk15 abscissae and weights; Gauss nodes are the odd Kronrod ones.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;

  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureSpec& spec, std::span<const double> breakpoints) {
  if (!(spec.rel_tol > 0.0) || !(spec.abs_tol > 0.0))
    throw UsageError("integrate: tolerances must be positive");
  if (!(hi > lo)) return {};

  std::priority_queue<Segment> work;
  double value = 0.0;
  double error = 0.0;
  double left = lo;
  auto push = [&](Segment s) {
    value += s.value;
    error += s.error;
    work.push(s);
  };
  for (double b : breakpoints) {
    if (b <= left || b >= hi) continue;
    push(gauss_kronrod(f, left, b));
    left = b;
  }
  push(gauss_kronrod(f, left, hi));

  int subdivisions = 0;
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
    if (subdivisions >= spec.max_subdivisions) {
      throw QuadratureError("integrate: no convergence after " + std::to_string(subdivisions) +
                                " subdivisions",
                            value, error);
    }
    const Segment worst = work.top();
    work.pop();
    value -= worst.value;
    error -= worst.error;
    const double mid = 0.5 * (worst.lo + worst.hi);
    push(gauss_kronrod(f, worst.lo, mid));
    push(gauss_kronrod(f, mid, worst.hi));
    ++subdivisions;
  }

  // Re-sum to shed the drift from repeated add/subtract.
  value = 0.0;
  error = 0.0;
  while (!work.empty()) {
    value += work.top().value;
    error += work.top().error;
    work.pop();
  }
  return {value, error, subdivisions};
}

QuadratureResult integrate_sqrt_substituted(const std::function<double(double)>& f,
                                            double t_max, double scale,
                                            const QuadratureSpec& spec) {
  if (!(t_max > 0.0)) return {};
  if (!(scale > 0.0)) throw UsageError("integrate_sqrt_substituted: scale must be > 0");
  const double v_max = std::sqrt(t_max);
  std::vector<double> breaks;
  for (double v = scale / 64.0; v < v_max; v *= 2.0) breaks.push_back(v);
  auto substituted = [&f](double v) { return f(v * v) * 2.0 * v; };
  return integrate(substituted, 0.0, v_max, spec, breaks);
}

QuadratureResult integrate_half_line(const std::function<double(double)>& f,
                                     const std::function<double(double)>& tail_bound,
                                     double scale, const QuadratureSpec& spec) {
  if (!(scale > 0.0)) throw UsageError("integrate_half_line: scale must be > 0");
  double cutoff = scale * scale;
  double bound = tail_bound(cutoff);
  while (bound > spec.abs_tol && std::isfinite(cutoff)) {
    cutoff *= 2.0;
    bound = tail_bound(cutoff);
  }
  auto result = integrate_sqrt_substituted(f, cutoff, scale, spec);
  result.error_estimate += bound;
  return result;
}

}  // namespace bes3
