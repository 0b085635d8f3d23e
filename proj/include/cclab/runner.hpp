#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cclab::runner {

using Json = nlohmann::ordered_json;

inline constexpr const char* kArtifactName = "cclab";
inline constexpr const char* kArtifactVersion = "0.1.0";

enum class Experiment {
  kDiffusionEquivalence,
  kFlemingViot,
  kZenoScan,
  kQuantumVsDiffusionContrast,
  kPmwfFigure1,
  kTailFit,
  kMomentScan,
  kIntervalScaling,
  kKillingBalance,
};

struct ExperimentInfo {
  Experiment id;
  std::string name;
  std::string summary;
};

const std::vector<ExperimentInfo>& experiments();
std::optional<Experiment> experiment_from_name(std::string_view name);
const std::string& to_string(Experiment e);

/// One problem found in a configuration; `field` is a dotted path such as
/// "parameters.dt".
struct Violation {
  std::string field;
  std::string message;
};

/// A validated configuration. `parameters` holds every parameter of the
/// experiment, defaults filled in.
struct ExperimentConfig {
  Experiment experiment = Experiment::kPmwfFigure1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  Json parameters = Json::object();

  Json to_json() const;
};

/// Every violation in a raw configuration document; empty means valid.
/// Nothing is computed.
std::vector<Violation> validate(const Json& raw);

/// Thrown by parse_config for an invalid document.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

ExperimentConfig parse_config(const Json& raw);
ExperimentConfig default_config(Experiment e);

/// Reads and parses a JSON file; syntax errors become a ConfigError.
Json load_config_file(const std::filesystem::path& path);

/// An acceptance check with its measured value, tolerance and oracle.
struct Criterion {
  enum class Kind { kAtMost, kAtLeast, kWithin, kHolds };

  std::string name;
  Kind kind = Kind::kHolds;
  double measured = 0.0;
  double target = 0.0;     // kWithin: centre; kAtMost / kAtLeast: the limit
  double tolerance = 0.0;  // kWithin only
  std::string oracle;
  bool passed = false;

  static Criterion at_most(std::string name, double measured, double limit, std::string oracle);
  static Criterion at_least(std::string name, double measured, double limit, std::string oracle);
  static Criterion within(std::string name, double measured, double target, double tolerance,
                          std::string oracle);
  static Criterion holds(std::string name, bool value, std::string oracle);

  Json to_json() const;
};

struct Column {
  std::string name;
  std::string unit;
};

/// RFC-4180 table: CRLF line ends, fields quoted when they contain a comma,
/// quote or line break, numbers in shortest round-trip form with '.'.
class CsvTable {
 public:
  using Cell = std::variant<double, std::int64_t, std::string>;

  explicit CsvTable(std::vector<Column> columns);

  void add_row(std::vector<Cell> row);
  std::size_t rows() const { return rows_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  std::string render() const;

 private:
  std::vector<Column> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_number(double v);

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunOptions {
  unsigned threads = 0;  // Monte Carlo worker threads; 0 = hardware concurrency
};

struct RunResult {
  ExperimentConfig config;
  std::vector<Criterion> criteria;
  Json diagnostics = Json::object();
  std::vector<OutputFile> files;  // CSV tables and plot scripts
  double wall_clock_seconds = 0.0;

  bool passed() const;
  Json manifest() const;
};

/// Runs the experiment. Library errors propagate: GuardViolation for a
/// tripped numerical guard, ArgumentError / DomainError for parameters the
/// modules reject.
RunResult run(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes the files and manifest.json into `dir` (created if needed).
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

/// Process exit codes of the command line tool.
enum ExitCode : int {
  kExitPass = 0,
  kExitCriteriaFailed = 1,
  kExitInvalidConfig = 2,
  kExitGuardTripped = 3,
};

}  // namespace cclab::runner
