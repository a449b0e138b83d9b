#pragma once

#include <cmath>

#include "bes3/rng.hpp"

namespace bes3 {

/// First hitting time of a level at distance `level_distance` by a standard
/// Brownian motion started at zero.
struct FirstPassageSample {
  double level_distance = 0.0;
  double time = 0.0;
};

/// Exact draw of the last-hitting time g of BES(3) from r, together with the
/// uniform that fixes its ultimate minimum a = r u.
struct GSample {
  double u = 0.0;
  double a = 0.0;
  double g = 0.0;
};

namespace detail {

template <DrawSource Source>
double nonzero_normal(Source& source) {
  double n = source.draw_standard_normal();
  while (n == 0.0) n = source.draw_standard_normal();
  return n;
}

}  // namespace detail

/// T = d^2 / N^2 with N standard normal has exactly the first-passage density
/// |d| exp(-d^2 / 2t) / sqrt(2 pi t^3). One normal is consumed even when
/// d = 0 so that draw counts do not depend on the level.
template <DrawSource Source>
FirstPassageSample sample_first_passage(Source& source, double distance) {
  const double n = detail::nonzero_normal(source);
  const double scaled = distance / n;
  return {distance, distance == 0.0 ? 0.0 : scaled * scaled};
}

/// Draw order: one uniform, then one normal. g is the first passage of a
/// Brownian motion from 0 to r(1 - U).
template <DrawSource Source>
GSample sample_g_exact(Source& source, double r) {
  const double u = source.draw_uniform01();
  const auto passage = sample_first_passage(source, r * (1.0 - u));
  return {u, r * u, passage.time};
}

}  // namespace bes3
