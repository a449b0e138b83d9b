#pragma once

#include <functional>
#include <span>

namespace bes3 {

struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

/// Adaptive Gauss-Kronrod (7/15) over [lo, hi], bisecting the interval with
/// the largest error first. `breakpoints` seed the initial partition and must
/// lie strictly inside (lo, hi) in ascending order.
///
/// Throws QuadratureError when max_subdivisions is reached before the total
/// error drops below max(abs_tol, rel_tol * |value|).
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureSpec& spec = {},
                           std::span<const double> breakpoints = {});

/// Integral of f over [0, t_max] through s = v^2, which removes 1/sqrt(s)
/// endpoint singularities. `scale` is a characteristic length in v so the
/// initial partition is geometric (scale * 2^k) and cannot skip the bulk.
QuadratureResult integrate_sqrt_substituted(const std::function<double(double)>& f,
                                            double t_max, double scale,
                                            const QuadratureSpec& spec = {});

/// Integral of f over [0, inf). The range is truncated at the first
/// t* = scale^2 * 2^k with tail_bound(t*) <= spec.abs_tol and the bound is
/// added to the error estimate. tail_bound must be non-increasing.
QuadratureResult integrate_half_line(const std::function<double(double)>& f,
                                     const std::function<double(double)>& tail_bound,
                                     double scale, const QuadratureSpec& spec = {});

}  // namespace bes3
