#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bes3/quadrature.hpp"

namespace bes3 {

enum class CheckStatus { pass, fail, error };

/// One verdict. Every check reduces to `statistic <= threshold`: for mean
/// checks statistic = |estimate - target| and threshold = tolerance, for KS
/// checks statistic = D and threshold = critical value (plus any allowance).
struct CheckResult {
  std::string name;
  double estimate = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  double statistic = 0.0;
  double threshold = 0.0;
  bool passed = false;
  CheckStatus status = CheckStatus::fail;
  nlohmann::json detail = nlohmann::json::object();
};

/// Sabotaged constructions used to show that the checks can fail.
enum class Mutation {
  none,
  no_drift,       // Euler without the 1/R drift: reflected Brownian motion
  no_post_shift,  // Williams post-g part without the "+ a"
  biased_u,       // U^2 wherever the uniform minimum fraction is drawn
};

std::string to_string(Mutation mutation);
Mutation mutation_from_string(const std::string& name);

/// Parameters of the named checks. Defaults are the acceptance scenario.
struct VerifyConfig {
  std::uint64_t seed = 7;
  double r = 1.0;
  double alpha = 0.001;
  double horizon = 1.0;

  // marginal agreement
  std::size_t marginal_paths = 10000;
  double norm3d_dt = 1e-3;
  double euler_dt = 1e-4;
  double williams_dt = 1e-4;

  // exact g samplers
  std::size_t laplace_samples = 1000000;
  std::vector<double> laplace_r = {1.0, 6.0};
  std::vector<double> laplace_lambda = {0.0, 0.5, 2.0};
  std::size_t hitting_samples = 100000;
  std::size_t doob_samples = 100000;
  std::vector<double> doob_r = {1.0, 6.0};

  // Azema identity; infimum checks run norm3d_infimum, whose grid adapts to
  // the process level below these step caps
  double azema_t = 1.0;
  double azema_max_step = 1e-2;
  std::size_t azema_paths = 100000;

  // long-horizon infimum checks
  double long_horizon = 200.0;
  double long_max_step = 0.5;
  std::size_t long_paths = 10000;

  // conditional pre-g duration
  double bin_lo = 0.45;
  double bin_hi = 0.55;
  std::size_t reference_samples = 100000;

  Mutation mutation = Mutation::none;
  QuadratureSpec quad{};

  /// Overrides the path counts of every simulation-driven check.
  void set_paths(std::size_t n);
  nlohmann::json to_json() const;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  VerifyConfig config;
  double wall_seconds = 0.0;  // not part of the JSON, which must be reproducible

  bool passed() const;
  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Scenario names in canonical order; a scenario's position fixes its
/// substream block so results do not depend on which scenarios run.
const std::vector<std::string>& scenario_names();

/// Tail allowance r / sqrt(2 pi T): bound on P(g > T).
double tail_allowance(double r, double horizon);

std::vector<CheckResult> verify_closed_form_consistency(const VerifyConfig& config);
std::vector<CheckResult> verify_normalization(const VerifyConfig& config);
std::vector<CheckResult> verify_marginal_agreement(const VerifyConfig& config);
std::vector<CheckResult> verify_laplace_g(const VerifyConfig& config);
std::vector<CheckResult> verify_g_matches_hitting(const VerifyConfig& config);
std::vector<CheckResult> verify_azema_identity(const VerifyConfig& config);
std::vector<CheckResult> verify_inf_uniform(const VerifyConfig& config);
std::vector<CheckResult> verify_doob_scalar(const VerifyConfig& config);
std::vector<CheckResult> verify_pre_g_duration(const VerifyConfig& config);

/// Runs the named scenarios ("all" expands to every scenario). A scenario
/// that throws yields one CheckResult with status error instead of aborting
/// the run. Unknown names throw UsageError.
VerificationReport run_all(const VerifyConfig& config, const std::vector<std::string>& scenarios);

}  // namespace bes3
