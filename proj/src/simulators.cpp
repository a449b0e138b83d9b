#include "bes3/simulators.hpp"

#include <cmath>

#include "bes3/parallel.hpp"

namespace bes3 {

std::string to_string(Method method) {
  switch (method) {
    case Method::norm3d: return "norm3d";
    case Method::euler: return "euler";
    case Method::williams: return "williams";
    case Method::figure1: return "figure1";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "norm3d") return Method::norm3d;
  if (name == "euler") return Method::euler;
  if (name == "williams") return Method::williams;
  if (name == "figure1") return Method::figure1;
  throw ConfigError("unknown method '" + name + "' (expected norm3d, euler, williams, figure1)");
}

void SimConfig::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("r must be a positive finite number");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (dt > horizon) throw ConfigError("dt must not exceed horizon");
  const double ratio = horizon / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * rounded)
    throw ConfigError("horizon must be an integer multiple of dt");
  if (n_paths == 0) throw ConfigError("n_paths must be positive");
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

SamplePath WilliamsSample::concatenated() const {
  const Eigen::Index n_pre = pre_path.size();
  const Eigen::Index n_post = post_path.size();
  SamplePath out;
  out.times.resize(n_pre + n_post);
  out.values.resize(n_pre + n_post);
  out.times.head(n_pre) = pre_path.times;
  out.values.head(n_pre) = pre_path.values;
  out.times.tail(n_post) = post_path.times.array() + g_grid;
  out.values.tail(n_post) = post_path.values;
  return out;
}

PathSummary path_summary(const SamplePath& path) {
  if (path.size() == 0) throw UsageError("path_summary: empty path");
  PathSummary summary;
  summary.terminal = path.values[path.size() - 1];
  // minCoeff returns the first index attaining the minimum.
  summary.running_min = path.values.minCoeff(&summary.argmin_index);
  summary.argmin_time = path.times[summary.argmin_index];
  return summary;
}

SamplePath simulate_norm3d(const SimConfig& config, RngStream& rng) {
  config.validate();
  return norm3d_path(config.r, config.dt, config.steps(), rng);
}

SamplePath simulate_euler_sde(const SimConfig& config, RngStream& rng, const EulerOptions& options) {
  config.validate();
  return euler_path(config.r, config.dt, config.steps(), rng, options);
}

WilliamsSample simulate_williams(const SimConfig& config, RngStream& rng,
                                 const WilliamsOptions& options) {
  config.validate();
  if (!(options.pre_cap_factor > 0.0)) throw ConfigError("pre-g cap must be > 0");
  return williams_sample(config.r, config.dt, config.steps(), rng, options);
}

SamplePath simulate_figure1_walk(RngStream& rng, std::size_t steps, const Eigen::Vector3d& start) {
  return figure1_walk(rng, steps, start);
}

SamplePath simulate_path(const SimConfig& config, RngStream& rng) {
  switch (config.method) {
    case Method::norm3d: return simulate_norm3d(config, rng);
    case Method::euler: return simulate_euler_sde(config, rng);
    case Method::williams: return simulate_williams(config, rng).concatenated();
    case Method::figure1: {
      config.validate();
      const Eigen::Vector3d start = Eigen::Vector3d(4.0, 4.0, 2.0) * (config.r / 6.0);
      return figure1_walk(rng, config.steps(), start);
    }
  }
  throw ConfigError("unknown method");
}

BatchResult simulate_batch(const SimConfig& config, bool keep_paths, unsigned threads) {
  config.validate();
  const std::size_t n = config.n_paths;
  BatchResult result;
  result.summaries.resize(n);
  if (keep_paths) result.paths.resize(n);
  std::vector<std::size_t> reflections(n, 0);
  std::vector<std::size_t> retries(n, 0);
  std::vector<std::size_t> steps(n, 0);

  parallel_for(
      n,
      [&](std::size_t i) {
        RngStream rng(config.seed, i);
        SamplePath path;
        if (config.method == Method::williams) {
          auto sample = simulate_williams(config, rng);
          retries[i] = sample.retries;
          path = sample.concatenated();
        } else {
          path = simulate_path(config, rng);
        }
        reflections[i] = path.reflect_count;
        steps[i] = static_cast<std::size_t>(path.size() - 1);
        result.summaries[i] = path_summary(path);
        if (keep_paths) result.paths[i] = std::move(path);
      },
      threads);

  for (std::size_t i = 0; i < n; ++i) {
    result.metadata.total_steps += steps[i];
    result.metadata.reflect_count += reflections[i];
    result.metadata.williams_retries += retries[i];
  }
  result.metadata.reflect_warning =
      result.metadata.reflect_count * 1000 > result.metadata.total_steps;
  return result;
}

}  // namespace bes3
