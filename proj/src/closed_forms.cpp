#include "bes3/closed_forms.hpp"

#include <cmath>
#include <numbers>

namespace bes3 {
namespace {

const double kSqrtTwoPi = std::sqrt(2.0 * std::numbers::pi);

}  // namespace

QuadratureResult g_cdf(double t, double r, const QuadratureSpec& quad) {
  if (!(r > 0.0)) throw DomainError("g_cdf: r must be > 0");
  if (!(t >= 0.0)) throw DomainError("g_cdf: t must be >= 0");
  if (t == 0.0) return {};
  return integrate_sqrt_substituted([r](double s) { return g_density(s, r); }, t, r, quad);
}

QuadratureResult g_laplace_numeric(double lambda, double r, const QuadratureSpec& quad) {
  if (!(lambda >= 0.0)) throw DomainError("g_laplace_numeric: lambda must be >= 0");
  if (!(r > 0.0)) throw DomainError("g_laplace_numeric: r must be > 0");
  // p(t) <= 1 / (r sqrt(2 pi t)) and p(t) <= r / (2 t sqrt(2 pi t)), so the
  // tail past T is at most r / sqrt(2 pi T), and for lambda > 0 also at most
  // exp(-lambda T) / (lambda r sqrt(2 pi T)).
  auto tail = [lambda, r](double cutoff) {
    const double mass = r / (kSqrtTwoPi * std::sqrt(cutoff));
    if (lambda == 0.0) return mass;
    return std::min(mass, std::exp(-lambda * cutoff) / (lambda * r * kSqrtTwoPi * std::sqrt(cutoff)));
  };
  auto integrand = [lambda, r](double s) { return std::exp(-lambda * s) * g_density(s, r); };
  return integrate_half_line(integrand, tail, r, quad);
}

QuadratureResult hitting_density_mass(double a, const QuadratureSpec& quad) {
  if (a == 0.0 || !std::isfinite(a))
    throw DomainError("hitting_density_mass: level must be finite and non-zero");
  const double level = std::abs(a);
  auto tail = [level](double cutoff) { return 2.0 * level / (kSqrtTwoPi * std::sqrt(cutoff)); };
  return integrate_half_line([level](double s) { return hitting_density(s, level); }, tail,
                             level, quad);
}

}  // namespace bes3
