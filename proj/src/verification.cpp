#include "bes3/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "bes3/closed_forms.hpp"
#include "bes3/errors.hpp"
#include "bes3/parallel.hpp"
#include "bes3/rng.hpp"
#include "bes3/sampling.hpp"
#include "bes3/simulators.hpp"
#include "bes3/stats.hpp"

namespace bes3 {
namespace {

enum ScenarioIndex : std::uint64_t {
  kClosedFormConsistency,
  kNormalization,
  kMarginalAgreement,
  kLaplaceG,
  kGMatchesHitting,
  kAzemaIdentity,
  kInfUniform,
  kDoobScalar,
  kPreGDuration,
};

// Substream layout: (scenario + 1) << 40 | arm << 32 | index. Stream ids below
// 2^40 stay free for the CLI's path-per-stream batches.
RngStream substream(const VerifyConfig& config, std::uint64_t scenario, std::uint64_t arm,
                    std::uint64_t index) {
  return RngStream(config.seed, ((scenario + 1) << 40) | (arm << 32) | index);
}

constexpr double kSigmas = 3.0;

CheckResult verdict(CheckResult result) {
  result.passed = result.statistic <= result.threshold;
  result.status = result.passed ? CheckStatus::pass : CheckStatus::fail;
  return result;
}

CheckResult mean_check(std::string name, const MeanCi& estimate, double target,
                       double allowance = 0.0) {
  CheckResult result;
  result.name = std::move(name);
  result.estimate = estimate.mean;
  result.target = target;
  result.tolerance = kSigmas * estimate.standard_error + allowance;
  result.statistic = std::abs(estimate.mean - target);
  result.threshold = result.tolerance;
  result.detail["standard_error"] = estimate.standard_error;
  if (allowance > 0.0) result.detail["tail_allowance"] = allowance;
  return verdict(std::move(result));
}

CheckResult ks_check(std::string name, const KsResult& ks, double alpha, double allowance = 0.0) {
  CheckResult result;
  result.name = std::move(name);
  result.estimate = ks.statistic;
  result.target = 0.0;
  result.statistic = ks.statistic;
  const double critical = ks_critical_value(alpha, ks.effective_n());
  result.threshold = critical + allowance;
  result.tolerance = result.threshold;
  result.detail["n"] = ks.n;
  result.detail["m"] = ks.m;
  result.detail["p_value"] = ks.p_value;
  result.detail["alpha"] = alpha;
  result.detail["critical_value"] = critical;
  if (allowance > 0.0) result.detail["tail_allowance"] = allowance;
  return verdict(std::move(result));
}

WilliamsOptions williams_options(const VerifyConfig& config) {
  WilliamsOptions options;
  options.shift_post = config.mutation != Mutation::no_post_shift;
  options.square_uniform = config.mutation == Mutation::biased_u;
  return options;
}

/// Exact g draw, honouring the biased-U mutation.
GSample draw_g(RngStream& rng, double r, Mutation mutation) {
  if (mutation != Mutation::biased_u) return sample_g_exact(rng, r);
  const double u = rng.draw_uniform01();
  const double biased = u * u;
  const auto passage = sample_first_passage(rng, r * (1.0 - biased));
  return {biased, r * biased, passage.time};
}

/// Ultimate-minimum draws from the Williams construction, a = r U.
std::vector<double> williams_minima(const VerifyConfig& config, double r, std::uint64_t scenario,
                                    std::uint64_t arm, std::size_t n) {
  const auto options = williams_options(config);
  std::vector<double> minima(n);
  parallel_for(n, [&](std::size_t i) {
    auto rng = substream(config, scenario, arm, i);
    minima[i] = r * detail::draw_minimum_fraction(rng, options);
  });
  return minima;
}

/// norm3d paths from r over `horizon` with the continuous running infimum
/// (see norm3d_infimum); max_step caps the adaptive grid.
std::vector<InfimumTrace> norm3d_infima(const VerifyConfig& config, double r, double horizon,
                                        double max_step, std::size_t n, std::uint64_t scenario,
                                        std::uint64_t arm) {
  if (!(horizon > 0.0) || !(max_step > 0.0))
    throw ConfigError("infimum batch needs positive horizon and step");
  std::vector<InfimumTrace> out(n);
  parallel_for(n, [&](std::size_t i) {
    auto rng = substream(config, scenario, arm, i);
    out[i] = norm3d_infimum(r, horizon, max_step, rng);
  });
  return out;
}

template <class Fn>
std::vector<double> collect(std::size_t n, Fn&& fn) {
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace

std::string to_string(Mutation mutation) {
  switch (mutation) {
    case Mutation::none: return "none";
    case Mutation::no_drift: return "no-drift";
    case Mutation::no_post_shift: return "no-post-shift";
    case Mutation::biased_u: return "biased-u";
  }
  return "unknown";
}

Mutation mutation_from_string(const std::string& name) {
  if (name == "none") return Mutation::none;
  if (name == "no-drift") return Mutation::no_drift;
  if (name == "no-post-shift") return Mutation::no_post_shift;
  if (name == "biased-u") return Mutation::biased_u;
  throw UsageError("unknown mutation '" + name +
                   "' (expected none, no-drift, no-post-shift, biased-u)");
}

void VerifyConfig::set_paths(std::size_t n) {
  if (n < 2) throw UsageError("path count must be at least 2");
  marginal_paths = n;
  azema_paths = n;
  long_paths = n;
}

nlohmann::json VerifyConfig::to_json() const {
  return {
      {"r", r},
      {"alpha", alpha},
      {"horizon", horizon},
      {"marginal_paths", marginal_paths},
      {"norm3d_dt", norm3d_dt},
      {"euler_dt", euler_dt},
      {"williams_dt", williams_dt},
      {"laplace_samples", laplace_samples},
      {"laplace_r", laplace_r},
      {"laplace_lambda", laplace_lambda},
      {"hitting_samples", hitting_samples},
      {"doob_samples", doob_samples},
      {"doob_r", doob_r},
      {"azema_t", azema_t},
      {"azema_max_step", azema_max_step},
      {"azema_paths", azema_paths},
      {"long_horizon", long_horizon},
      {"long_max_step", long_max_step},
      {"long_paths", long_paths},
      {"bin", {bin_lo, bin_hi}},
      {"reference_samples", reference_samples},
      {"mutation", to_string(mutation)},
  };
}

double tail_allowance(double r, double horizon) {
  return r / std::sqrt(2.0 * std::numbers::pi * horizon);
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "closed_form_consistency", "normalization", "marginal_agreement",
      "laplace_g",               "g_matches_hitting", "azema_identity",
      "inf_uniform",             "doob_scalar",   "pre_g_duration",
  };
  return names;
}

std::vector<CheckResult> verify_closed_form_consistency(const VerifyConfig& config) {
  CheckResult result;
  result.name = "closed_form_consistency";
  result.tolerance = 1e-6;
  result.threshold = 1e-6;
  nlohmann::json grid = nlohmann::json::array();
  for (double r : {0.5, 1.0, 2.0, 6.0}) {
    for (double lambda : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const double closed = g_laplace(lambda, r);
      const auto numeric = g_laplace_numeric(lambda, r, config.quad);
      const double diff = std::abs(closed - numeric.value);
      grid.push_back({{"r", r}, {"lambda", lambda}, {"closed", closed},
                      {"numeric", numeric.value}, {"error_estimate", numeric.error_estimate}});
      if (diff >= result.statistic) {
        result.statistic = diff;
        result.estimate = numeric.value;
        result.target = closed;
      }
    }
  }
  result.detail["grid"] = grid;
  return {verdict(std::move(result))};
}

std::vector<CheckResult> verify_normalization(const VerifyConfig& config) {
  std::vector<CheckResult> out;
  auto mass_check = [](std::string name, const QuadratureResult& mass) {
    CheckResult result;
    result.name = std::move(name);
    result.estimate = mass.value;
    result.target = 1.0;
    result.tolerance = 1e-6;
    result.statistic = std::abs(mass.value - 1.0);
    result.threshold = 1e-6;
    result.detail["error_estimate"] = mass.error_estimate;
    return verdict(std::move(result));
  };
  for (double r : {0.5, 1.0, 6.0}) {
    std::ostringstream name;
    name << "normalization.g_density.r=" << r;
    out.push_back(mass_check(name.str(), g_laplace_numeric(0.0, r, config.quad)));
  }
  for (double a : {0.5, 1.0, 3.0}) {
    std::ostringstream name;
    name << "normalization.hitting_density.a=" << a;
    out.push_back(mass_check(name.str(), hitting_density_mass(a, config.quad)));
  }
  return out;
}

std::vector<CheckResult> verify_marginal_agreement(const VerifyConfig& config) {
  const std::size_t n = config.marginal_paths;
  const double r = config.r;
  SimConfig base{r, config.horizon, config.norm3d_dt, n, config.seed, Method::norm3d};
  base.validate();
  SimConfig euler = base;
  euler.dt = config.euler_dt;
  euler.validate();
  SimConfig williams = base;
  williams.dt = config.williams_dt;
  williams.validate();

  const auto norm3d_terminal = collect(n, [&](std::size_t i) {
    auto rng = substream(config, kMarginalAgreement, 0, i);
    return walk_3d(Eigen::Vector3d(r, 0.0, 0.0), base.dt, base.steps(), rng,
                   [](std::size_t, const Eigen::Vector3d&) {})
        .norm();
  });

  std::vector<std::size_t> reflections(n, 0);
  const EulerOptions euler_options{config.mutation != Mutation::no_drift};
  const auto euler_terminal = collect(n, [&](std::size_t i) {
    auto rng = substream(config, kMarginalAgreement, 1, i);
    const auto path = euler_path(r, euler.dt, euler.steps(), rng, euler_options);
    reflections[i] = path.reflect_count;
    return path.values[path.size() - 1];
  });

  const auto options = williams_options(config);
  std::vector<double> crossed(n, 0.0);
  const auto williams_terminal = collect(n, [&](std::size_t i) {
    auto rng = substream(config, kMarginalAgreement, 2, i);
    const auto window = williams_window(r, williams.dt, williams.steps(), rng, options);
    crossed[i] = window.g_grid ? 1.0 : 0.0;
    return window.path.values[window.path.size() - 1];
  });

  std::size_t total_reflections = 0;
  for (auto c : reflections) total_reflections += c;
  double crossed_fraction = 0.0;
  for (double c : crossed) crossed_fraction += c;
  crossed_fraction /= static_cast<double>(n);

  std::vector<CheckResult> out;
  auto pair = [&](const std::string& label, const std::vector<double>& x,
                  const std::vector<double>& y) {
    auto result = ks_check("marginal_agreement." + label, ks_two_sample(x, y), config.alpha);
    result.detail["horizon"] = config.horizon;
    result.detail["r"] = r;
    result.detail["seed"] = config.seed;
    result.detail["euler_reflections"] = total_reflections;
    result.detail["euler_reflect_warning"] =
        total_reflections * 1000 > n * euler.steps();
    result.detail["williams_g_within_horizon"] = crossed_fraction;
    out.push_back(std::move(result));
  };
  pair("norm3d_vs_euler", norm3d_terminal, euler_terminal);
  pair("norm3d_vs_williams", norm3d_terminal, williams_terminal);
  pair("euler_vs_williams", euler_terminal, williams_terminal);
  return out;
}

std::vector<CheckResult> verify_laplace_g(const VerifyConfig& config) {
  if (config.laplace_samples < 100000)
    throw ConfigError("laplace_g needs at least 1e5 samples");
  std::vector<CheckResult> out;
  for (std::size_t ri = 0; ri < config.laplace_r.size(); ++ri) {
    const double r = config.laplace_r[ri];
    const auto g = collect(config.laplace_samples, [&](std::size_t i) {
      auto rng = substream(config, kLaplaceG, ri, i);
      return draw_g(rng, r, config.mutation).g;
    });
    for (double lambda : config.laplace_lambda) {
      std::vector<double> weights(g.size());
      std::transform(g.begin(), g.end(), weights.begin(),
                     [lambda](double x) { return std::exp(-lambda * x); });
      std::ostringstream name;
      name << "laplace_g.r=" << r << ".lambda=" << lambda;
      auto result = mean_check(name.str(), mc_mean_ci(weights), g_laplace(lambda, r));
      result.detail["n"] = g.size();
      out.push_back(std::move(result));
    }
  }
  return out;
}

std::vector<CheckResult> verify_g_matches_hitting(const VerifyConfig& config) {
  const std::size_t n = config.hitting_samples;
  if (n < 1000) throw ConfigError("g_matches_hitting needs at least 1e3 samples");
  const double r = config.r;
  const auto g = collect(n, [&](std::size_t i) {
    auto rng = substream(config, kGMatchesHitting, 0, i);
    return draw_g(rng, r, config.mutation).g;
  });
  // T_{rU}: an independent uniform level and an independent first passage.
  const auto hitting = collect(n, [&](std::size_t i) {
    auto rng = substream(config, kGMatchesHitting, 1, i);
    const double u = rng.draw_uniform01();
    return sample_first_passage(rng, r * u).time;
  });
  auto result = ks_check("g_matches_hitting", ks_two_sample(g, hitting), config.alpha);
  result.detail["r"] = r;
  return {std::move(result)};
}

std::vector<CheckResult> verify_azema_identity(const VerifyConfig& config) {
  const double r = config.r;
  const double t = config.azema_t;
  if (config.long_horizon < 10.0 * t)
    throw ConfigError("azema_identity: long horizon must be at least 10 t");
  const double target = 1.0 - g_cdf(t, r, config.quad).value;
  std::vector<CheckResult> out;

  if (t == 0.0) {
    out.push_back(mean_check("azema_identity.ratio_mean", {1.0, 0.0}, target));
  } else {
    const auto paths =
        norm3d_infima(config, r, t, config.azema_max_step, config.azema_paths, kAzemaIdentity, 0);
    std::vector<double> ratio(paths.size());
    std::transform(paths.begin(), paths.end(), ratio.begin(), [](const InfimumTrace& o) {
      return azema_z(std::min(o.infimum, o.terminal), o.terminal);
    });
    auto result = mean_check("azema_identity.ratio_mean", mc_mean_ci(ratio), target);
    result.detail["n"] = ratio.size();
    result.detail["max_step"] = config.azema_max_step;
    out.push_back(std::move(result));
  }

  const auto long_paths = norm3d_infima(config, r, config.long_horizon, config.long_max_step,
                                        config.long_paths, kAzemaIdentity, 1);
  std::vector<double> late(long_paths.size());
  std::transform(long_paths.begin(), long_paths.end(), late.begin(),
                 [t](const InfimumTrace& o) { return o.argmin_time > t ? 1.0 : 0.0; });
  auto result = mean_check("azema_identity.argmin_after_t", mc_mean_ci(late), target,
                           tail_allowance(r, config.long_horizon));
  result.detail["n"] = late.size();
  result.detail["long_horizon"] = config.long_horizon;
  result.detail["max_step"] = config.long_max_step;
  out.push_back(std::move(result));
  return out;
}

std::vector<CheckResult> verify_inf_uniform(const VerifyConfig& config) {
  const double r = config.r;
  const auto uniform_cdf = [r](double x) { return ultimate_inf_cdf(x, r); };
  std::vector<CheckResult> out;

  const auto minima = williams_minima(config, r, kInfUniform, 0, config.long_paths);
  out.push_back(ks_check("inf_uniform.williams", ks_one_sample(minima, uniform_cdf), config.alpha));

  const auto paths = norm3d_infima(config, r, config.long_horizon, config.long_max_step,
                                   config.long_paths, kInfUniform, 1);
  std::vector<double> infima(paths.size());
  std::transform(paths.begin(), paths.end(), infima.begin(),
                 [](const InfimumTrace& o) { return o.infimum; });
  const double allowance = tail_allowance(r, config.long_horizon);
  auto ks = ks_check("inf_uniform.norm3d", ks_one_sample(infima, uniform_cdf), config.alpha,
                     allowance);
  ks.detail["long_horizon"] = config.long_horizon;
  ks.detail["max_step"] = config.long_max_step;
  out.push_back(std::move(ks));

  std::vector<double> below(infima.size());
  std::transform(infima.begin(), infima.end(), below.begin(),
                 [r](double x) { return x <= 0.5 * r ? 1.0 : 0.0; });
  auto point = mean_check("inf_uniform.half_level", mc_mean_ci(below), 0.5, allowance);
  point.detail["n"] = below.size();
  out.push_back(std::move(point));
  return out;
}

std::vector<CheckResult> verify_doob_scalar(const VerifyConfig& config) {
  if (config.doob_samples < 100000) throw ConfigError("doob_scalar needs at least 1e5 samples");
  std::vector<CheckResult> out;
  for (std::size_t ri = 0; ri < config.doob_r.size(); ++ri) {
    const double r = config.doob_r[ri];
    const auto minima = williams_minima(config, r, kDoobScalar, ri, config.doob_samples);
    // With P_r(T_a < inf) = a / r the right-hand side is (1/r) int_0^r phi(a) da;
    // for phi(a) = a^p that is r^p / (p + 1).
    for (int power = 0; power <= 2; ++power) {
      std::vector<double> phi(minima.size());
      std::transform(minima.begin(), minima.end(), phi.begin(),
                     [power](double a) { return std::pow(a, power); });
      std::ostringstream name;
      name << "doob_scalar.r=" << r << ".phi=a^" << power;
      auto result =
          mean_check(name.str(), mc_mean_ci(phi), std::pow(r, power) / (power + 1.0));
      result.detail["n"] = phi.size();
      out.push_back(std::move(result));
    }
  }
  return out;
}

std::vector<CheckResult> verify_pre_g_duration(const VerifyConfig& config) {
  const double r = config.r;
  const double lo = config.bin_lo * r;
  const double hi = config.bin_hi * r;
  if (!(lo > 0.0 && lo < hi && hi < r)) throw ConfigError("pre_g_duration: bad minimum bin");

  const auto paths = norm3d_infima(config, r, config.long_horizon, config.long_max_step,
                                   config.long_paths, kPreGDuration, 0);
  std::vector<double> durations;
  std::vector<double> distances;
  for (const auto& o : paths) {
    if (o.infimum >= lo && o.infimum <= hi) {
      durations.push_back(o.argmin_time);
      distances.push_back(r - o.infimum);
    }
  }
  if (durations.size() < 2) throw ConfigError("pre_g_duration: too few paths in the minimum bin");

  // Brownian first passage over the bin-centre distance, restricted to the
  // same finite horizon as the simulated argmins.
  const double centre = r - 0.5 * (lo + hi);
  std::vector<double> reference;
  reference.reserve(config.reference_samples);
  auto rng = substream(config, kPreGDuration, 1, 0);
  while (reference.size() < config.reference_samples) {
    const double time = sample_first_passage(rng, centre).time;
    if (time <= config.long_horizon) reference.push_back(time);
  }
  auto result = ks_check("pre_g_duration", ks_two_sample(durations, reference), config.alpha);

  // Bin-width sensitivity: the same comparison with each path's own distance.
  std::vector<double> matched(durations.size());
  auto matched_rng = substream(config, kPreGDuration, 2, 0);
  for (std::size_t i = 0; i < matched.size(); ++i) {
    double time;
    do {
      time = sample_first_passage(matched_rng, distances[i]).time;
    } while (time > config.long_horizon);
    matched[i] = time;
  }
  const auto matched_ks = ks_two_sample(durations, matched);
  result.detail["bin"] = {lo, hi};
  result.detail["paths_in_bin"] = durations.size();
  result.detail["matched_distance_statistic"] = matched_ks.statistic;
  result.detail["matched_distance_critical"] =
      ks_critical_value(config.alpha, matched_ks.effective_n());
  result.detail["long_horizon"] = config.long_horizon;
  return {std::move(result)};
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.status == CheckStatus::pass; });
}

namespace {

const char* status_name(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::error: return "error";
  }
  return "error";
}

}  // namespace

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json checks_json = nlohmann::json::array();
  for (const auto& c : checks) {
    checks_json.push_back({
        {"name", c.name},
        {"estimate", c.estimate},
        {"target", c.target},
        {"tolerance", c.tolerance},
        {"statistic", c.statistic},
        {"threshold", c.threshold},
        {"passed", c.passed},
        {"status", status_name(c.status)},
        {"detail", c.detail},
    });
  }
  return {
      {"schema", 1},
      {"seed", config.seed},
      {"config", config.to_json()},
      {"checks", checks_json},
      {"passed", passed()},
  };
}

std::string VerificationReport::to_text() const {
  std::ostringstream out;
  out.precision(6);
  for (const auto& c : checks) {
    out << (c.status == CheckStatus::pass ? "PASS " : c.status == CheckStatus::fail ? "FAIL " : "ERROR")
        << "  " << c.name << "  statistic=" << c.statistic << "  threshold=" << c.threshold
        << "  estimate=" << c.estimate << "  target=" << c.target;
    if (c.status == CheckStatus::error && c.detail.contains("error"))
      out << "  error=" << c.detail["error"].get<std::string>();
    out << '\n';
  }
  out << (passed() ? "all checks passed" : "some checks did not pass") << " (seed " << config.seed
      << ", mutation " << to_string(config.mutation) << ", " << wall_seconds << " s)\n";
  return out.str();
}

VerificationReport run_all(const VerifyConfig& config, const std::vector<std::string>& scenarios) {
  using Runner = std::function<std::vector<CheckResult>(const VerifyConfig&)>;
  const std::vector<Runner> runners = {
      verify_closed_form_consistency, verify_normalization, verify_marginal_agreement,
      verify_laplace_g,               verify_g_matches_hitting, verify_azema_identity,
      verify_inf_uniform,             verify_doob_scalar,   verify_pre_g_duration,
  };
  const auto& names = scenario_names();

  std::vector<bool> selected(names.size(), false);
  for (const auto& requested : scenarios) {
    if (requested == "all") {
      std::fill(selected.begin(), selected.end(), true);
      continue;
    }
    const auto it = std::find(names.begin(), names.end(), requested);
    if (it == names.end()) {
      std::string valid = "all";
      for (const auto& n : names) valid += ", " + n;
      throw UsageError("unknown scenario '" + requested + "' (valid: " + valid + ")");
    }
    selected[static_cast<std::size_t>(it - names.begin())] = true;
  }

  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  report.config = config;
  for (std::size_t s = 0; s < names.size(); ++s) {
    if (!selected[s]) continue;
    try {
      auto results = runners[s](config);
      report.checks.insert(report.checks.end(), std::make_move_iterator(results.begin()),
                           std::make_move_iterator(results.end()));
    } catch (const std::exception& e) {
      CheckResult errored;
      errored.name = names[s];
      errored.status = CheckStatus::error;
      errored.passed = false;
      errored.statistic = std::numeric_limits<double>::infinity();
      errored.detail["error"] = e.what();
      report.checks.push_back(std::move(errored));
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace bes3
