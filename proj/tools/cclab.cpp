#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

#include "cclab/errors.hpp"
#include "cclab/runner.hpp"

namespace rn = cclab::runner;

namespace {

void print_violations(const std::vector<rn::Violation>& v) {
  for (const auto& x : v) std::cerr << "  " << x.field << ": " << x.message << "\n";
}

// Manifest for a run stopped by a library error, so the output directory
// always says what happened.
void write_failure(const rn::ExperimentConfig& cfg, const std::filesystem::path& dir,
                   const std::string& status, const std::string& what) {
  rn::Json m;
  m["artifact"] = rn::kArtifactName;
  m["version"] = rn::kArtifactVersion;
  m["experiment"] = rn::to_string(cfg.experiment);
  m["seed"] = cfg.seed;
  m["config"] = cfg.to_json();
  m["status"] = status;
  m["error"] = what;
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "manifest.json") << m.dump(2) << "\n";
}

int cmd_list() {
  std::size_t width = 0;
  for (const auto& e : rn::experiments()) width = std::max(width, e.name.size());
  for (const auto& e : rn::experiments()) {
    std::cout << std::left << std::setw(static_cast<int>(width) + 2) << e.name << e.summary << "\n";
  }
  return rn::kExitPass;
}

int cmd_validate(const std::string& path) {
  try {
    const auto v = rn::validate(rn::load_config_file(path));
    if (v.empty()) {
      std::cout << path << ": valid\n";
      return rn::kExitPass;
    }
    std::cerr << path << ": " << v.size() << " violation(s)\n";
    print_violations(v);
  } catch (const rn::ConfigError& e) {
    print_violations(e.violations());
  }
  return rn::kExitInvalidConfig;
}

int cmd_run(const std::string& path, const std::optional<std::uint64_t>& seed,
            const std::optional<std::string>& out, unsigned threads) {
  rn::ExperimentConfig cfg;
  try {
    cfg = rn::parse_config(rn::load_config_file(path));
  } catch (const rn::ConfigError& e) {
    std::cerr << "invalid configuration " << path << "\n";
    print_violations(e.violations());
    return rn::kExitInvalidConfig;
  }
  if (seed) cfg.seed = *seed;
  if (out) cfg.output_dir = *out;

  try {
    const rn::RunResult r = rn::run(cfg, {threads});
    rn::write_outputs(r, cfg.output_dir);
    for (const auto& c : r.criteria) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  measured=" << rn::format_number(c.measured)
                << "\n";
    }
    std::cout << "wrote " << r.files.size() + 1 << " files to " << cfg.output_dir.string() << "\n";
    return r.passed() ? rn::kExitPass : rn::kExitCriteriaFailed;
  } catch (const cclab::GuardViolation& e) {
    std::cerr << "guard tripped: " << e.what() << "\n";
    write_failure(cfg, cfg.output_dir, "guard_tripped", e.what());
    return rn::kExitGuardTripped;
  } catch (const cclab::ArgumentError& e) {
    std::cerr << "parameter rejected: " << e.what() << "\n";
    write_failure(cfg, cfg.output_dir, "invalid_config", e.what());
    return rn::kExitInvalidConfig;
  } catch (const cclab::DomainError& e) {
    std::cerr << "parameter rejected: " << e.what() << "\n";
    write_failure(cfg, cfg.output_dir, "invalid_config", e.what());
    return rn::kExitInvalidConfig;
  } catch (const cclab::Error& e) {
    std::cerr << "numerical check failed: " << e.what() << "\n";
    write_failure(cfg, cfg.output_dir, "guard_tripped", e.what());
    return rn::kExitGuardTripped;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditioned-collapse experiments: observed diffusions and observed quantum particles"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "run one experiment and write CSV, plot script and manifest");
  run->add_option("--config", config, "experiment configuration (JSON)")->required();
  run->add_option("--seed", seed, "override the configured seed");
  run->add_option("--out", out, "override the configured output directory");
  run->add_option("--threads", threads, "Monte Carlo worker threads (0 = all cores); outputs do not depend on it");

  auto* validate = app.add_subcommand("validate", "check a configuration without running it");
  validate->add_option("--config", config, "experiment configuration (JSON)")->required();

  app.add_subcommand("list", "list the experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rn::kExitInvalidConfig;
  }

  try {
    if (*run) return cmd_run(config, seed, out, threads);
    if (*validate) return cmd_validate(config);
    return cmd_list();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rn::kExitGuardTripped;
  }
}
