#include "bes3/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <system_error>

#include <CLI11.hpp>

#include "bes3/closed_forms.hpp"
#include "bes3/errors.hpp"
#include "bes3/parallel.hpp"
#include "bes3/rng.hpp"
#include "bes3/simulators.hpp"
#include "bes3/verification.hpp"

namespace bes3 {

std::string format_number(double value) {
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 9);
  return std::string(buffer, result.ptr);
}

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Standard output for "-" or an empty path, a truncated file otherwise.
class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) : path_(path) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::out | std::ios::trunc);
    if (!*file_) throw IoError("cannot open '" + path + "' for writing");
    stream_ = file_.get();
  }

  std::ostream& stream() { return *stream_; }

  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write to '" + (path_.empty() ? std::string("-") : path_) + "' failed");
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

struct SimulateArgs {
  std::string method = "norm3d";
  double r = 1.0;
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t paths = 10000;
  std::uint64_t seed = 0;
  std::string out;
  bool summary_only = false;
  bool full_paths = false;
};

struct DensityArgs {
  double r = 1.0;
  double t_min = 0.01;
  double t_max = 5.0;
  std::size_t points = 100;
  std::string out;
};

struct LaplaceArgs {
  double r = 1.0;
  double lambda_max = 4.0;
  std::size_t points = 17;
  std::string out;
};

struct VerifyArgs {
  std::vector<std::string> scenarios;
  std::uint64_t seed = 7;
  std::optional<std::size_t> paths;
  std::string format = "json";
  std::string out;
  std::string mutation = "none";
  std::size_t seeds = 1;
};

struct Figure1Args {
  std::uint64_t seed = 0;
  std::size_t steps = 1200;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  SimConfig config;
  config.method = method_from_string(args.method);
  config.r = args.r;
  config.horizon = args.horizon;
  config.dt = args.dt;
  config.n_paths = args.paths;
  config.seed = args.seed;
  config.validate();

  if (args.summary_only && args.full_paths)
    throw UsageError("--summary-only and --full-paths are mutually exclusive");
  const bool full = args.full_paths || (!args.summary_only && args.paths <= 1000);

  const auto batch = simulate_batch(config, full, worker_count());
  OutputTarget target(args.out, out);
  auto& os = target.stream();
  if (full) {
    os << "path_id,t,value\n";
    for (std::size_t i = 0; i < batch.paths.size(); ++i) {
      const auto& path = batch.paths[i];
      for (Eigen::Index k = 0; k < path.size(); ++k)
        os << i << ',' << format_number(path.times[k]) << ',' << format_number(path.values[k]) << '\n';
    }
  } else {
    os << "path_id,terminal,min,argmin_time\n";
    for (std::size_t i = 0; i < batch.summaries.size(); ++i) {
      const auto& s = batch.summaries[i];
      os << i << ',' << format_number(s.terminal) << ',' << format_number(s.running_min) << ','
         << format_number(s.argmin_time) << '\n';
    }
  }
  target.finish();

  if (batch.metadata.reflect_warning) {
    err << "warning: " << batch.metadata.reflect_count << " Euler reflections in "
        << batch.metadata.total_steps << " steps exceed 0.1%; dt is too coarse for r=" << args.r
        << '\n';
  }
  if (batch.metadata.williams_retries > 0) {
    err << "note: " << batch.metadata.williams_retries
        << " Williams pre-g segments hit the cap and were redrawn\n";
  }
  return kExitOk;
}

int cmd_density(const DensityArgs& args, std::ostream& out) {
  if (!(args.t_min > 0.0) || !(args.t_max >= args.t_min))
    throw UsageError("--t-min and --t-max must satisfy 0 < t-min < t-max");
  if (args.points == 0) throw UsageError("--points must be positive");
  if (args.t_max == args.t_min && args.points != 1)
    throw UsageError("--t-min and --t-max must satisfy 0 < t-min < t-max");
  if (!(args.r > 0.0)) throw UsageError("--r must be > 0");

  OutputTarget target(args.out, out);
  auto& os = target.stream();
  os << "t,p\n";
  for (std::size_t k = 0; k < args.points; ++k) {
    const double t = args.points == 1
                         ? args.t_min
                         : args.t_min + (args.t_max - args.t_min) * static_cast<double>(k) /
                                            static_cast<double>(args.points - 1);
    os << format_number(t) << ',' << format_number(g_density(t, args.r)) << '\n';
  }
  target.finish();
  return kExitOk;
}

int cmd_laplace(const LaplaceArgs& args, std::ostream& out) {
  if (!(args.r > 0.0)) throw UsageError("--r must be > 0");
  if (!(args.lambda_max >= 0.0)) throw UsageError("--lambda-max must be >= 0");
  if (args.points < 2) throw UsageError("--points must be at least 2");
  OutputTarget target(args.out, out);
  auto& os = target.stream();
  os << "lambda,closed_form,numeric,error_estimate\n";
  for (std::size_t k = 0; k < args.points; ++k) {
    const double lambda =
        args.lambda_max * static_cast<double>(k) / static_cast<double>(args.points - 1);
    const auto numeric = g_laplace_numeric(lambda, args.r);
    os << format_number(lambda) << ',' << format_number(g_laplace(lambda, args.r)) << ','
       << format_number(numeric.value) << ',' << format_number(numeric.error_estimate) << '\n';
  }
  target.finish();
  return kExitOk;
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  VerifyConfig config;
  config.mutation = mutation_from_string(args.mutation);
  if (args.paths) config.set_paths(*args.paths);
  if (args.seeds == 0) throw UsageError("--seeds must be positive");
  const std::vector<std::string> scenarios =
      args.scenarios.empty() ? std::vector<std::string>{"all"} : args.scenarios;
  // run_all rejects unknown names before doing any work.
  std::vector<VerificationReport> reports;
  for (std::size_t k = 0; k < args.seeds; ++k) {
    config.seed = args.seed + k;
    reports.push_back(run_all(config, scenarios));
  }

  OutputTarget target(args.out, out);
  auto& os = target.stream();
  bool all_passed = true;
  for (const auto& report : reports) all_passed = all_passed && report.passed();
  if (args.format == "json") {
    if (reports.size() == 1) {
      os << reports.front().to_json().dump(2) << '\n';
    } else {
      nlohmann::json sweep = nlohmann::json::array();
      for (const auto& report : reports) sweep.push_back(report.to_json());
      os << nlohmann::json{{"schema", 1}, {"sweep", sweep}, {"passed", all_passed}}.dump(2) << '\n';
    }
  } else {
    for (const auto& report : reports) os << report.to_text();
  }
  target.finish();
  for (const auto& report : reports)
    err << "verify: seed " << report.config.seed << ' ' << (report.passed() ? "passed" : "failed")
        << " in " << report.wall_seconds << " s\n";
  return all_passed ? kExitOk : kExitCheckFailed;
}

int cmd_figure1(const Figure1Args& args, std::ostream& out) {
  if (args.steps < 1) throw UsageError("--steps must be at least 1");
  auto rng = make_rng(args.seed, 0);
  const auto path = simulate_figure1_walk(rng, args.steps);
  OutputTarget target(args.out, out);
  auto& os = target.stream();
  os << "k,value\n";
  for (Eigen::Index k = 0; k < path.size(); ++k) os << k << ',' << format_number(path.values[k]) << '\n';
  target.finish();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bessel(3) process simulation, closed-form laws and verification"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate BES(3) paths");
  simulate->add_option("--method", sim.method, "norm3d, euler, williams or figure1")
      ->check(CLI::IsMember({"norm3d", "euler", "williams", "figure1"}));
  simulate->add_option("--r", sim.r, "Start level")->check(CLI::PositiveNumber);
  simulate->add_option("--horizon", sim.horizon, "Terminal time")->check(CLI::PositiveNumber);
  simulate->add_option("--dt", sim.dt, "Grid step")->check(CLI::PositiveNumber);
  simulate->add_option("--paths", sim.paths, "Number of paths")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Seed");
  simulate->add_option("--out", sim.out, "Output file (default standard output)");
  simulate->add_flag("--summary-only", sim.summary_only, "Write one summary row per path");
  simulate->add_flag("--full-paths", sim.full_paths, "Write every grid point, even above 1000 paths");

  DensityArgs den;
  auto* density = app.add_subcommand("density", "Tabulate the density of g");
  density->add_option("--r", den.r, "Start level")->check(CLI::PositiveNumber);
  density->add_option("--t-min", den.t_min, "First time point");
  density->add_option("--t-max", den.t_max, "Last time point");
  density->add_option("--points", den.points, "Number of points, endpoints included");
  density->add_option("--out", den.out, "Output file (default standard output)");

  LaplaceArgs lap;
  auto* laplace = app.add_subcommand("laplace", "Tabulate the Laplace transform of g");
  laplace->add_option("--r", lap.r, "Start level")->check(CLI::PositiveNumber);
  laplace->add_option("--lambda-max", lap.lambda_max, "Largest lambda (grid starts at 0)");
  laplace->add_option("--points", lap.points, "Number of points");
  laplace->add_option("--out", lap.out, "Output file (default standard output)");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run the statistical verification suite");
  verify->add_option("--scenario", ver.scenarios, "all or a scenario name (repeatable)");
  verify->add_option("--seed", ver.seed, "Seed");
  verify->add_option("--paths", ver.paths, "Override path counts of simulation checks");
  verify->add_option("--format", ver.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  verify->add_option("--out", ver.out, "Output file (default standard output)");
  verify->add_option("--mutation", ver.mutation, "none, no-drift, no-post-shift or biased-u");
  verify->add_option("--seeds", ver.seeds, "Sweep this many consecutive seeds");

  Figure1Args fig;
  auto* figure1 = app.add_subcommand("figure1", "Uniform-step 3-D random walk norm from (4, 4, 2)");
  figure1->add_option("--seed", fig.seed, "Seed");
  figure1->add_option("--steps", fig.steps, "Number of steps");
  figure1->add_option("--out", fig.out, "Output file (default standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out, err);
    if (*density) return cmd_density(den, out);
    if (*laplace) return cmd_laplace(lap, out);
    if (*verify) return cmd_verify(ver, out, err);
    if (*figure1) return cmd_figure1(fig, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace bes3
