#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bes3/errors.hpp"
#include "bes3/quadrature.hpp"

namespace bes3 {

/// Density of the first hitting time of level a by Brownian motion from 0,
/// |a| exp(-a^2 / 2t) / sqrt(2 pi t^3). For a = 0 the law is a point mass at
/// t = 0, so the density is 0 for every t > 0.
template <typename Scalar>
Scalar hitting_density(Scalar t, Scalar a) {
  using std::abs;
  using std::exp;
  using std::sqrt;
  if (!(t > Scalar(0))) throw DomainError("hitting_density: t must be > 0");
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  return abs(a) * exp(-a * a / (Scalar(2) * t)) / sqrt(two_pi * t * t * t);
}

/// Density p(t) of the last time g at which BES(3) from r sits at its
/// ultimate minimum.
template <typename Scalar>
Scalar g_density(Scalar t, Scalar r) {
  using std::expm1;
  using std::sqrt;
  if (!(t > Scalar(0))) throw DomainError("g_density: t must be > 0");
  if (!(r > Scalar(0))) throw DomainError("g_density: r must be > 0");
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  return -expm1(-r * r / (Scalar(2) * t)) / (r * sqrt(two_pi * t));
}

/// E[exp(-lambda g)] = (1 - exp(-x)) / x with x = sqrt(2 lambda) r.
template <typename Scalar>
Scalar g_laplace(Scalar lambda, Scalar r) {
  using std::expm1;
  using std::sqrt;
  if (!(lambda >= Scalar(0))) throw DomainError("g_laplace: lambda must be >= 0");
  if (!(r > Scalar(0))) throw DomainError("g_laplace: r must be > 0");
  const Scalar x = sqrt(Scalar(2) * lambda) * r;
  if (x < Scalar(1e-8)) return Scalar(1) - x / Scalar(2);
  return -expm1(-x) / x;
}

/// Azema supermartingale P(g > t | F_t) = I_t / R_t.
template <typename Scalar>
Scalar azema_z(Scalar running_inf, Scalar current) {
  if (!(running_inf > Scalar(0)) || !(current > Scalar(0)))
    throw DomainError("azema_z: inputs must be > 0");
  if (running_inf > current)
    throw DomainError("azema_z: running infimum exceeds current value");
  return running_inf / current;
}

/// CDF of the ultimate minimum, uniform on [0, r].
template <typename Scalar>
Scalar ultimate_inf_cdf(Scalar x, Scalar r) {
  if (!(r > Scalar(0))) throw DomainError("ultimate_inf_cdf: r must be > 0");
  return std::clamp(x / r, Scalar(0), Scalar(1));
}

/// P(g <= t) by quadrature of g_density.
QuadratureResult g_cdf(double t, double r, const QuadratureSpec& quad = {});

/// Integral of exp(-lambda t) p(t) over [0, inf); lambda = 0 gives the total
/// mass of p.
QuadratureResult g_laplace_numeric(double lambda, double r, const QuadratureSpec& quad = {});

/// Total mass of hitting_density(., a) over (0, inf).
QuadratureResult hitting_density_mass(double a, const QuadratureSpec& quad = {});

}  // namespace bes3
