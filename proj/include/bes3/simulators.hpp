#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bes3/errors.hpp"
#include "bes3/rng.hpp"

namespace bes3 {

enum class Method { norm3d, euler, williams, figure1 };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct SimConfig {
  double r = 1.0;
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 0;
  Method method = Method::norm3d;

  /// Throws ConfigError unless r, horizon, dt are positive, dt <= horizon and
  /// horizon / dt is an integer up to rounding noise.
  void validate() const;
  std::size_t steps() const;
};

struct SamplePath {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
  std::size_t reflect_count = 0;

  Eigen::Index size() const { return values.size(); }
};

struct PathSummary {
  double terminal = 0.0;
  double running_min = 0.0;
  double argmin_time = 0.0;
  Eigen::Index argmin_index = 0;
};

/// Williams splice: Brownian motion from r until it first reaches a = r u,
/// then a plus an independent BES(3) from 0.
struct WilliamsSample {
  double u = 0.0;
  double a = 0.0;
  double g_grid = 0.0;  // first grid time at or after the crossing of a
  SamplePath pre_path;  // grid points strictly before g_grid, all above a
  SamplePath post_path; // own grid starting at 0 with value a
  std::size_t retries = 0;

  /// Pre path followed by the post path with its times shifted by g_grid.
  SamplePath concatenated() const;
};

/// The Williams splice restricted to [0, horizon]: when g lies beyond the
/// horizon the window holds only the Brownian pre part.
struct WilliamsWindow {
  double u = 0.0;
  double a = 0.0;
  std::optional<double> g_grid;
  SamplePath path;
};

struct EulerOptions {
  bool drift = true;  // false gives plain reflected Brownian motion
};

struct WilliamsOptions {
  double pre_cap_factor = 50.0;  // pre-g cap in units of r^2
  bool shift_post = true;        // false drops the "+ a" on the post part
  bool square_uniform = false;   // true uses U^2 in place of U
};

/// Exponent beyond which the bridge crossing probability exp(-x) is treated as
/// zero and no uniform is drawn.
inline constexpr double kBridgeExponentCutoff = 40.0;

namespace detail {

inline SamplePath make_path(const std::vector<double>& values, double dt, double t0 = 0.0) {
  SamplePath path;
  path.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  path.times.resize(path.values.size());
  for (Eigen::Index k = 0; k < path.times.size(); ++k) path.times[k] = t0 + static_cast<double>(k) * dt;
  return path;
}

template <DrawSource Source>
Eigen::Vector3d normal3(Source& source) {
  Eigen::Vector3d z;
  z[0] = source.draw_standard_normal();
  z[1] = source.draw_standard_normal();
  z[2] = source.draw_standard_normal();
  return z;
}

struct PreSegment {
  std::vector<double> values;  // all strictly above the level
  bool crossed = false;
};

/// Brownian motion from `start` on the dt grid until it crosses `level`,
/// either at a grid point or inside a step by the bridge test, or until
/// max_steps steps have been taken without crossing.
template <DrawSource Source>
PreSegment brownian_until_crossing(double start, double level, double dt, std::size_t max_steps,
                                   Source& source) {
  PreSegment seg;
  if (start <= level) {
    seg.crossed = true;
    return seg;
  }
  const double sqrt_dt = std::sqrt(dt);
  double x = start;
  seg.values.push_back(x);
  for (std::size_t k = 0; k < max_steps; ++k) {
    const double next = x + sqrt_dt * source.draw_standard_normal();
    if (next <= level) {
      seg.crossed = true;
      return seg;
    }
    const double exponent = 2.0 * (x - level) * (next - level) / dt;
    if (exponent < kBridgeExponentCutoff && source.draw_uniform01() < std::exp(-exponent)) {
      seg.crossed = true;
      return seg;
    }
    x = next;
    seg.values.push_back(x);
  }
  return seg;
}

template <DrawSource Source>
double draw_minimum_fraction(Source& source, const WilliamsOptions& options) {
  const double u = source.draw_uniform01();
  return options.square_uniform ? u * u : u;
}

}  // namespace detail

/// Exact Gaussian walk of a 3-D Brownian motion; visit(k, state) runs after
/// each of the `steps` increments of variance dt per coordinate.
template <DrawSource Source, class Visitor>
Eigen::Vector3d walk_3d(Eigen::Vector3d state, double dt, std::size_t steps, Source& source,
                        Visitor&& visit) {
  const double sqrt_dt = std::sqrt(dt);
  for (std::size_t k = 1; k <= steps; ++k) {
    state += sqrt_dt * detail::normal3(source);
    visit(k, state);
  }
  return state;
}

/// R_k = |(r, 0, 0) + W_{k dt}| on a grid of `steps` steps.
template <DrawSource Source>
SamplePath norm3d_path(double r, double dt, std::size_t steps, Source& source) {
  std::vector<double> values;
  values.reserve(steps + 1);
  values.push_back(r);
  walk_3d(Eigen::Vector3d(r, 0.0, 0.0), dt, steps, source,
          [&](std::size_t, const Eigen::Vector3d& x) { values.push_back(x.norm()); });
  return detail::make_path(values, dt);
}

/// Euler-Maruyama for dR = dB + dt / R. A non-positive update is replaced by
/// its absolute value and counted in reflect_count.
template <DrawSource Source>
SamplePath euler_path(double r, double dt, std::size_t steps, Source& source,
                      const EulerOptions& options = {}) {
  const double sqrt_dt = std::sqrt(dt);
  std::vector<double> values;
  values.reserve(steps + 1);
  values.push_back(r);
  std::size_t reflections = 0;
  double x = r;
  for (std::size_t k = 0; k < steps; ++k) {
    double next = x + sqrt_dt * source.draw_standard_normal();
    if (options.drift) next += dt / x;
    if (next <= 0.0) {
      next = std::abs(next);
      ++reflections;
    }
    x = next;
    values.push_back(x);
  }
  auto path = detail::make_path(values, dt);
  path.reflect_count = reflections;
  return path;
}

/// Norm of start + partial sums of i.i.d. uniform [-1/2, 1/2]^3 steps, with
/// one step per unit of time.
template <DrawSource Source>
SamplePath figure1_walk(Source& source, std::size_t steps, const Eigen::Vector3d& start) {
  std::vector<double> values;
  values.reserve(steps + 1);
  Eigen::Vector3d x = start;
  values.push_back(x.norm());
  for (std::size_t k = 0; k < steps; ++k) {
    for (int c = 0; c < 3; ++c) x[c] += source.draw_uniform01() - 0.5;
    values.push_back(x.norm());
  }
  return detail::make_path(values, 1.0);
}

/// Draw order: U, then the pre-g normals (each possibly followed by one
/// bridge-test uniform), then three normals per post-g step. When the pre
/// part exceeds pre_cap_factor * r^2 time units without crossing, U is
/// redrawn and the attempt counted in `retries`.
template <DrawSource Source>
WilliamsSample williams_sample(double r, double dt, std::size_t post_steps, Source& source,
                               const WilliamsOptions& options = {}) {
  const auto cap_steps =
      static_cast<std::size_t>(std::ceil(options.pre_cap_factor * r * r / dt));
  WilliamsSample sample;
  for (;;) {
    sample.u = detail::draw_minimum_fraction(source, options);
    sample.a = r * sample.u;
    auto pre = detail::brownian_until_crossing(r, sample.a, dt, cap_steps, source);
    if (!pre.crossed) {
      ++sample.retries;
      continue;
    }
    sample.g_grid = static_cast<double>(pre.values.size()) * dt;
    sample.pre_path = detail::make_path(pre.values, dt);
    break;
  }
  const double shift = options.shift_post ? sample.a : 0.0;
  std::vector<double> post;
  post.reserve(post_steps + 1);
  post.push_back(shift);
  walk_3d(Eigen::Vector3d::Zero(), dt, post_steps, source,
          [&](std::size_t, const Eigen::Vector3d& x) { post.push_back(shift + x.norm()); });
  sample.post_path = detail::make_path(post, dt);
  return sample;
}

/// The Williams construction observed on [0, steps * dt] only. Uses the same
/// draw order as williams_sample; no cap is needed since the pre part stops at
/// the horizon.
template <DrawSource Source>
WilliamsWindow williams_window(double r, double dt, std::size_t steps, Source& source,
                               const WilliamsOptions& options = {}) {
  WilliamsWindow window;
  window.u = detail::draw_minimum_fraction(source, options);
  window.a = r * window.u;
  auto pre = detail::brownian_until_crossing(r, window.a, dt, steps, source);
  std::vector<double> values = std::move(pre.values);
  if (pre.crossed) {
    const std::size_t pre_points = values.size();
    window.g_grid = static_cast<double>(pre_points) * dt;
    const double shift = options.shift_post ? window.a : 0.0;
    if (pre_points <= steps) {
      values.push_back(shift);
      walk_3d(Eigen::Vector3d::Zero(), dt, steps - pre_points, source,
              [&](std::size_t, const Eigen::Vector3d& x) { values.push_back(shift + x.norm()); });
    }
  }
  window.path = detail::make_path(values, dt);
  return window;
}

/// Running minimum of |X| for a 3-D Brownian motion observed on a grid,
/// including the dips between grid points. Steps whose endpoints lie close to
/// the running minimum are bisected with exact Brownian-bridge midpoints until
/// sqrt(h) <= kRelativeStep * |X|; at that scale the radial part is locally a
/// Brownian bridge and its minimum is sampled in closed form.
template <DrawSource Source>
class RefinedInfimum {
 public:
  static constexpr double kRelativeStep = 0.1;
  static constexpr int kMaxDepth = 24;

  explicit RefinedInfimum(const Eigen::Vector3d& start) : value_(start.norm()) {}

  /// Account for the segment from `from` (already observed) to `to` over
  /// [t, t + h].
  void observe(const Eigen::Vector3d& from, const Eigen::Vector3d& to, double t, double h,
               Source& source) {
    refine(from, to, from.norm(), to.norm(), t, h, source, 0);
  }

  double value() const { return value_; }
  double argmin_time() const { return argmin_time_; }

 private:
  void refine(const Eigen::Vector3d& from, const Eigen::Vector3d& to, double r1, double r2,
              double t, double h, Source& source, int depth) {
    const double level = std::min(value_, r2);
    const double exponent = 2.0 * (r1 - level) * (r2 - level) / h;
    if (exponent > kBridgeExponentCutoff) return;
    if (depth < kMaxDepth && std::sqrt(h) > kRelativeStep * std::min(r1, r2)) {
      const Eigen::Vector3d mid = 0.5 * (from + to) + std::sqrt(0.25 * h) * detail::normal3(source);
      const double rm = mid.norm();
      refine(from, mid, r1, rm, t, 0.5 * h, source, depth + 1);
      refine(mid, to, rm, r2, t + 0.5 * h, 0.5 * h, source, depth + 1);
      return;
    }
    const double v = source.draw_uniform01();
    const double gap = r1 - r2;
    double dip = 0.5 * (r1 + r2 - std::sqrt(gap * gap - 2.0 * h * std::log(v)));
    if (dip <= 0.0) dip = std::min(r1, r2) * 1e-12;
    if (dip < value_) {
      value_ = dip;
      argmin_time_ = t + 0.5 * h;
    }
  }

  double value_;
  double argmin_time_ = 0.0;
};

struct InfimumTrace {
  double infimum = 0.0;
  double argmin_time = 0.0;
  double terminal = 0.0;
  std::size_t steps = 0;
};

/// norm3d from r over [0, horizon] on an adaptive grid, tracked by
/// RefinedInfimum. Each step is min(max_step, (kRelativeStep R)^2) clipped to
/// the time left; Gaussian increments keep every grid value exact, and the
/// refinement resolves the dips near the running minimum.
template <DrawSource Source>
InfimumTrace norm3d_infimum(double r, double horizon, double max_step, Source& source) {
  using Tracker = RefinedInfimum<Source>;
  const double min_step = 1e-12 * horizon;
  Eigen::Vector3d x(r, 0.0, 0.0);
  Tracker tracker(x);
  InfimumTrace trace;
  double t = 0.0;
  while (t < horizon) {
    const double local = Tracker::kRelativeStep * x.norm();
    double h = std::max(min_step, std::min(max_step, local * local));
    const bool last = t + h >= horizon;
    if (last) h = horizon - t;
    const Eigen::Vector3d next = x + std::sqrt(h) * detail::normal3(source);
    tracker.observe(x, next, t, h, source);
    x = next;
    t = last ? horizon : t + h;
    ++trace.steps;
  }
  trace.infimum = tracker.value();
  trace.argmin_time = tracker.argmin_time();
  trace.terminal = x.norm();
  return trace;
}

/// Running minimum and earliest argmin over grid points.
PathSummary path_summary(const SamplePath& path);

SamplePath simulate_norm3d(const SimConfig& config, RngStream& rng);
SamplePath simulate_euler_sde(const SimConfig& config, RngStream& rng,
                              const EulerOptions& options = {});
/// `horizon` is the post-g segment length; the pre-g cap comes from options.
WilliamsSample simulate_williams(const SimConfig& config, RngStream& rng,
                                 const WilliamsOptions& options = {});
SamplePath simulate_figure1_walk(RngStream& rng, std::size_t steps,
                                 const Eigen::Vector3d& start = Eigen::Vector3d(4.0, 4.0, 2.0));

/// One path as a SamplePath for any method. Williams paths are concatenated;
/// figure1 takes round(horizon / dt) unit-time steps from (4, 4, 2) rescaled
/// to norm r.
SamplePath simulate_path(const SimConfig& config, RngStream& rng);

struct BatchMetadata {
  std::size_t total_steps = 0;
  std::size_t reflect_count = 0;
  std::size_t williams_retries = 0;
  bool reflect_warning = false;  // reflections above 0.1% of steps
};

struct BatchResult {
  std::vector<PathSummary> summaries;
  std::vector<SamplePath> paths;  // empty unless requested
  BatchMetadata metadata;
};

/// Path i is driven by RngStream(config.seed, i); output is independent of
/// the worker count.
BatchResult simulate_batch(const SimConfig& config, bool keep_paths, unsigned threads);

}  // namespace bes3
