// Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion, with
// the measured values and tolerances indented above it.
//
//   acceptance [--criterion N]... [--work-dir DIR]

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "cclab/errors.hpp"
#include "cclab/pmwf.hpp"
#include "cclab/runner.hpp"

namespace fs = std::filesystem;
using namespace cclab::runner;

namespace {

constexpr std::uint64_t kSeed = 20240611;

fs::path g_work = fs::temp_directory_path() / "cclab_acceptance";

std::map<Experiment, RunResult>& cache() {
  static std::map<Experiment, RunResult> c;
  return c;
}

const RunResult& result(Experiment e) {
  auto it = cache().find(e);
  if (it == cache().end()) {
    auto cfg = default_config(e);
    cfg.seed = kSeed;
    it = cache().emplace(e, run(cfg)).first;
  }
  return it->second;
}

std::string describe(const Criterion& c) {
  std::ostringstream s;
  s << c.name << ": measured " << format_number(c.measured);
  switch (c.kind) {
    case Criterion::Kind::kAtMost: s << ", limit <= " << format_number(c.target); break;
    case Criterion::Kind::kAtLeast: s << ", limit >= " << format_number(c.target); break;
    case Criterion::Kind::kWithin:
      s << ", target " << format_number(c.target) << " +- " << format_number(c.tolerance);
      break;
    case Criterion::Kind::kHolds: break;
  }
  s << " [" << (c.passed ? "ok" : "violated") << "]";
  return s.str();
}

// Checks the named criteria of one run (all of them when `only` is empty).
bool report(Experiment e, const std::vector<std::string>& only = {}) {
  const RunResult& r = result(e);
  bool ok = true;
  std::size_t matched = 0;
  for (const auto& c : r.criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    ++matched;
    std::cout << "    " << to_string(e) << " " << describe(c) << "\n";
    ok = ok && c.passed;
  }
  if (!only.empty() && matched != only.size()) {
    std::cout << "    missing criteria in " << to_string(e) << "\n";
    return false;
  }
  return ok;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) out.push_back(cell);
  return out;
}

// The figure table is checked as written to disk.
bool criterion_8() {
  auto cfg = default_config(Experiment::kPmwfFigure1);
  const fs::path dir = g_work / "figure1";
  fs::remove_all(dir);
  write_outputs(result(Experiment::kPmwfFigure1), dir);
  bool ok = true;
  for (const char* f : {"figure1.csv", "figure1.plot", "manifest.json"}) {
    const bool there = fs::exists(dir / f);
    std::cout << "    file " << f << (there ? " present" : " missing") << "\n";
    ok = ok && there;
  }
  std::ifstream in(dir / "figure1.csv", std::ios::binary);
  std::string line;
  std::getline(in, line);
  const bool header = split_csv_line(line).size() == 5;
  std::cout << "    header has 5 columns [" << (header ? "ok" : "violated") << "]\n";
  cclab::Figure1Table t;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cells = split_csv_line(line);
    if (cells.size() != 5) {
      ok = false;
      break;
    }
    t.x.push_back(std::stod(cells[0]));
    t.re_instantaneous.push_back(std::stod(cells[1]));
    t.im_instantaneous.push_back(std::stod(cells[2]));
    t.re_continuous.push_back(std::stod(cells[3]));
    t.im_continuous.push_back(std::stod(cells[4]));
  }
  cclab::PlaneWaveSpec spec;
  spec.k = cfg.parameters["k"].get<double>();
  for (const auto& c : cclab::figure1_checks(t, spec)) {
    std::cout << "    " << c.name << " (" << c.detail << ") [" << (c.passed ? "ok" : "violated") << "]\n";
    ok = ok && c.passed;
  }
  return ok && header;
}

std::map<std::string, std::string> read_csvs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[entry.path().filename().string()] = s.str();
  }
  return out;
}

// Same (config, seed): two runs and three thread counts, CSVs compared as
// bytes on disk.
bool criterion_10() {
  std::vector<ExperimentConfig> configs;
  {
    Json j;
    j["experiment"] = "fleming-viot";
    j["seed"] = kSeed;
    j["parameters"] = {{"walkers", 2000}, {"dt", 1e-3}, {"t_final", 0.5},
                       {"sample_times", {0.25, 0.5}}, {"rate_from", 0.0}, {"rate_window_steps", 50}};
    configs.push_back(parse_config(j));
  }
  {
    Json j;
    j["experiment"] = "diffusion-equivalence";
    j["seed"] = kSeed;
    j["parameters"] = {{"cells", 128}, {"samples", 2}, {"t_final", 0.2}};
    configs.push_back(parse_config(j));
  }
  configs.push_back(default_config(Experiment::kPmwfFigure1));

  bool ok = true;
  for (const auto& cfg : configs) {
    std::map<std::string, std::string> first;
    int variant = 0;
    for (unsigned threads : {1u, 1u, 2u, 4u}) {
      const fs::path dir = g_work / ("det_" + to_string(cfg.experiment) + "_" + std::to_string(variant++));
      fs::remove_all(dir);
      write_outputs(run(cfg, {threads}), dir);
      auto csvs = read_csvs(dir);
      if (first.empty()) {
        first = std::move(csvs);
        continue;
      }
      const bool same = csvs == first;
      std::cout << "    " << to_string(cfg.experiment) << " threads=" << threads << ": " << csvs.size()
                << " CSVs " << (same ? "byte-identical" : "DIFFER") << " [" << (same ? "ok" : "violated")
                << "]\n";
      ok = ok && same && !csvs.empty();
    }
  }
  return ok;
}

struct Entry {
  int number;
  std::string title;
  std::function<bool()> check;
};

std::vector<Entry> criteria() {
  return {
      {1, "equivalence of the nonlinear solve and the renormalised Dirichlet solve",
       [] { return report(Experiment::kDiffusionEquivalence, {"equivalence_sup_distance", "equivalence_refinement_ratio"}); }},
      {2, "eigenprofile stationarity and flux",
       [] { return report(Experiment::kDiffusionEquivalence, {"eigenprofile_sup_drift", "eigenprofile_flux"}); }},
      {3, "Fleming-Viot profile and kill rate", [] { return report(Experiment::kFlemingViot); }},
      {4, "Zeno contrast: quantum ladder and diffusion killing",
       [] { return report(Experiment::kQuantumVsDiffusionContrast); }},
      {5, "epsilon-flux vanishing",
       [] { return report(Experiment::kZenoScan, {"epsilon_flux_slope", "epsilon_flux_first"}); }},
      {6, "tail exponents and moment verdicts",
       [] {
         const bool a = report(Experiment::kTailFit, {"tail_exponent_instantaneous", "tail_exponent_continuous"});
         const bool b = report(Experiment::kMomentScan);
         return a && b;
       }},
      {7, "interval-mean scaling exponents", [] { return report(Experiment::kIntervalScaling); }},
      {8, "figure table regeneration", criterion_8},
      {9, "dual-path agreement",
       [] { return report(Experiment::kPmwfFigure1, {"dual_path_phi_instantaneous", "image_method_vs_boxed_dirichlet"}); }},
      {10, "determinism across runs and thread counts", criterion_10},
  };
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      wanted.push_back(std::atoi(argv[++i]));
    } else if (a == "--work-dir" && i + 1 < argc) {
      g_work = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--criterion N]... [--work-dir DIR]\n";
      return 2;
    }
  }
  int failures = 0;
  for (const auto& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.number) == wanted.end()) continue;
    bool ok = false;
    try {
      ok = c.check();
    } catch (const std::exception& e) {
      std::cout << "    error: " << e.what() << "\n";
    }
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.title << "\n";
    failures += ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
