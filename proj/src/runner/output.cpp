#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>

#include "cclab/errors.hpp"
#include "registry.hpp"

namespace cclab::runner {

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

const char* kind_name(Criterion::Kind k) {
  switch (k) {
    case Criterion::Kind::kAtMost: return "at_most";
    case Criterion::Kind::kAtLeast: return "at_least";
    case Criterion::Kind::kWithin: return "within";
    case Criterion::Kind::kHolds: return "holds";
  }
  return "";
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Criterion Criterion::at_most(std::string name, double measured, double limit, std::string oracle) {
  Criterion c{std::move(name), Kind::kAtMost, measured, limit, 0.0, std::move(oracle), false};
  c.passed = measured <= limit;
  return c;
}

Criterion Criterion::at_least(std::string name, double measured, double limit, std::string oracle) {
  Criterion c{std::move(name), Kind::kAtLeast, measured, limit, 0.0, std::move(oracle), false};
  c.passed = measured >= limit;
  return c;
}

Criterion Criterion::within(std::string name, double measured, double target, double tolerance,
                            std::string oracle) {
  Criterion c{std::move(name), Kind::kWithin, measured, target, tolerance, std::move(oracle), false};
  c.passed = std::abs(measured - target) <= tolerance;
  return c;
}

Criterion Criterion::holds(std::string name, bool value, std::string oracle) {
  return Criterion{std::move(name), Kind::kHolds, value ? 1.0 : 0.0, 1.0, 0.0, std::move(oracle), value};
}

Json Criterion::to_json() const {
  Json j;
  j["name"] = name;
  j["kind"] = kind_name(kind);
  j["measured"] = number_or_null(measured);
  switch (kind) {
    case Kind::kAtMost: j["limit"] = target; break;
    case Kind::kAtLeast: j["limit"] = target; break;
    case Kind::kWithin:
      j["target"] = target;
      j["tolerance"] = tolerance;
      break;
    case Kind::kHolds: j["measured"] = passed; break;
  }
  j["oracle"] = oracle;
  j["passed"] = passed;
  return j;
}

CsvTable::CsvTable(std::vector<Column> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw std::logic_error("CsvTable: row has " + std::to_string(row.size()) + " cells, expected " +
                           std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c > 0) out += ',';
    out += quoted(columns_[c].name + " [" + columns_[c].unit + "]");
  }
  out += "\r\n";
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      if (const auto* d = std::get_if<double>(&row[c])) {
        out += format_number(*d);
      } else if (const auto* i = std::get_if<std::int64_t>(&row[c])) {
        out += std::to_string(*i);
      } else {
        out += quoted(std::get<std::string>(row[c]));
      }
    }
    out += "\r\n";
  }
  return out;
}

bool RunResult::passed() const {
  for (const auto& c : criteria) {
    if (!c.passed) return false;
  }
  return true;
}

Json RunResult::manifest() const {
  Json m;
  m["artifact"] = kArtifactName;
  m["version"] = kArtifactVersion;
  m["experiment"] = to_string(config.experiment);
  m["seed"] = config.seed;
  m["config"] = config.to_json();
  m["wall_clock_seconds"] = wall_clock_seconds;
  m["status"] = passed() ? "pass" : "criteria_failed";
  Json cs = Json::array();
  for (const auto& c : criteria) cs.push_back(c.to_json());
  m["criteria"] = cs;
  m["diagnostics"] = diagnostics;
  Json fs = Json::array();
  for (const auto& f : files) fs.push_back(f.name);
  fs.push_back("manifest.json");
  m["files"] = fs;
  return m;
}

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  detail::Outcome o = detail::definition(config.experiment).run(config, options);
  RunResult r;
  r.config = config;
  r.criteria = std::move(o.criteria);
  r.diagnostics = std::move(o.diagnostics);
  r.files = std::move(o.files);
  r.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  };
  for (const auto& f : result.files) put(f.name, f.content);
  put("manifest.json", result.manifest().dump(2) + "\n");
}

}  // namespace cclab::runner
