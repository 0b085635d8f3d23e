#include <doctest.h>

#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "cclab/errors.hpp"
#include "cclab/runner.hpp"

using namespace cclab::runner;

namespace {

Json raw(const std::string& experiment, Json parameters = Json::object()) {
  Json j;
  j["experiment"] = experiment;
  if (!parameters.empty()) j["parameters"] = parameters;
  return j;
}

bool names(const std::vector<Violation>& v, const std::string& field) {
  for (const auto& x : v) {
    if (x.field == field) return true;
  }
  return false;
}

Json small_fleming_viot() {
  return {{"walkers", 600}, {"dt", 1e-3}, {"t_final", 0.2}, {"sample_times", {0.1, 0.2}},
          {"rate_from", 0.0}, {"rate_window_steps", 20}, {"dimension", 2}};
}

}  // namespace

TEST_CASE("every experiment has a valid default configuration") {
  CHECK(experiments().size() == 9);
  std::set<std::string> seen;
  for (const auto& e : experiments()) {
    INFO(e.name);
    CHECK(validate(raw(e.name)).empty());
    CHECK(seen.insert(e.name).second);
    CHECK(experiment_from_name(e.name) == e.id);
    CHECK(to_string(e.id) == e.name);
    const auto cfg = default_config(e.id);
    CHECK(cfg.parameters.is_object());
    CHECK(!cfg.parameters.empty());
  }
  CHECK_FALSE(experiment_from_name("no-such-experiment"));
}

TEST_CASE("validate reports violations as data") {
  SUBCASE("dt <= 0 names the field") {
    for (double dt : {0.0, -1e-3}) {
      const auto v = validate(raw("fleming-viot", {{"dt", dt}}));
      REQUIRE(v.size() == 1);
      CHECK(v[0].field == "parameters.dt");
    }
  }
  SUBCASE("boundary off the grid cites the DomainSpec invariant") {
    const auto v = validate(raw("killing-balance", {{"boundary", 0.0012}}));
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "parameters.boundary");
    CHECK(v[0].message.find("DomainSpec") != std::string::npos);
  }
  SUBCASE("all violations are collected") {
    Json j = raw("zeno-scan", {{"tau", -1.0}, {"dt_ladder", {1e-3, 1e-2}}, {"bogus", 1}});
    j["seed"] = -4;
    j["colour"] = "red";
    const auto v = validate(j);
    CHECK(names(v, "parameters.tau"));
    CHECK(names(v, "parameters.dt_ladder"));
    CHECK(names(v, "parameters.bogus"));
    CHECK(names(v, "seed"));
    CHECK(names(v, "colour"));
  }
  SUBCASE("cross-parameter preconditions") {
    CHECK(names(validate(raw("diffusion-equivalence", {{"t_final", 1.0005}})), "parameters.t_final"));
    CHECK(names(validate(raw("diffusion-equivalence", {{"cells", 255}})), "parameters.cells"));
    CHECK(names(validate(raw("zeno-scan", {{"tau", 0.503}})), "parameters.dt_ladder"));
    CHECK(names(validate(raw("interval-scaling", {{"x1", 3.0}})), "parameters.x2"));
    CHECK(names(validate(raw("fleming-viot", {{"sample_times", {0.5, 3.0}}})), "parameters.sample_times"));
    CHECK(names(validate(raw("killing-balance", {{"x_max", 0.5}})), "parameters.x_max"));
    CHECK(names(validate(raw("moment-scan", {{"cutoffs", {10, 20}}})), "parameters.cutoffs"));
  }
  SUBCASE("malformed documents") {
    CHECK(names(validate(Json::array()), "(document)"));
    CHECK(names(validate(Json::object()), "experiment"));
    CHECK(names(validate(raw("nope")), "experiment"));
    CHECK(names(validate(raw("tail-fit", {{"points", 2.5}})), "parameters.points"));
    CHECK(names(validate(raw("tail-fit", {{"k", "one"}})), "parameters.k"));
    CHECK_THROWS_AS(parse_config(raw("tail-fit", {{"tau", 0.0}})), ConfigError);
  }
}

TEST_CASE("parse_config fills defaults and keeps the 64-bit seed") {
  Json j = raw("tail-fit", {{"tau", 2.0}});
  j["seed"] = std::numeric_limits<std::uint64_t>::max();
  j["output_dir"] = "somewhere";
  const auto cfg = parse_config(j);
  CHECK(cfg.seed == std::numeric_limits<std::uint64_t>::max());
  CHECK(cfg.output_dir == "somewhere");
  CHECK(cfg.parameters["tau"].get<double>() == 2.0);
  CHECK(cfg.parameters["release"].get<double>() == 1.0);
  CHECK(parse_config(cfg.to_json()).to_json() == cfg.to_json());
}

TEST_CASE("csv rendering") {
  CsvTable t({{"x", "dimensionless"}, {"label, with comma", "text"}});
  t.add_row({0.1, std::string("plain")});
  t.add_row({std::int64_t(-3), std::string("say \"hi\"")});
  t.add_row({1e-300, std::string("two\nlines")});
  CHECK(t.render() ==
        "x [dimensionless],\"label, with comma [text]\"\r\n"
        "0.1,plain\r\n"
        "-3,\"say \"\"hi\"\"\"\r\n"
        "1e-300,\"two\nlines\"\r\n");
  CHECK_THROWS(t.add_row({1.0}));

  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.0}) {
    const std::string s = format_number(v);
    CHECK(s.find(',') == std::string::npos);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
}

TEST_CASE("criteria") {
  CHECK(Criterion::at_most("a", 1.0, 1.0, "o").passed);
  CHECK_FALSE(Criterion::at_most("a", 1.5, 1.0, "o").passed);
  CHECK(Criterion::at_least("a", 3.0, 3.0, "o").passed);
  CHECK(Criterion::within("a", 0.55, 0.5, 0.05 + 1e-15, "o").passed);
  CHECK_FALSE(Criterion::within("a", 0.56, 0.5, 0.05, "o").passed);
  CHECK_FALSE(Criterion::at_most("a", std::nan(""), 1.0, "o").passed);
  CHECK_FALSE(Criterion::holds("a", false, "o").passed);
  const Json j = Criterion::within("w", 1.0, 1.5, 0.1, "oracle text").to_json();
  CHECK(j["target"] == 1.5);
  CHECK(j["tolerance"] == 0.1);
  CHECK(j["oracle"] == "oracle text");
  CHECK(j["passed"] == false);
}

TEST_CASE("manifest carries tolerance and oracle for every criterion") {
  const auto r = run(default_config(Experiment::kTailFit));
  const Json m = r.manifest();
  CHECK(m["artifact"] == kArtifactName);
  CHECK(m["version"] == kArtifactVersion);
  CHECK(m["config"] == r.config.to_json());
  CHECK(m["wall_clock_seconds"].get<double>() >= 0.0);
  REQUIRE(m["criteria"].size() == r.criteria.size());
  for (const auto& c : m["criteria"]) {
    CHECK(!c["oracle"].get<std::string>().empty());
    CHECK((c.contains("tolerance") || c.contains("limit") || c["kind"] == "holds"));
  }
  CHECK(m["status"] == (r.passed() ? "pass" : "criteria_failed"));
  for (const auto& f : r.files) {
    if (f.name.ends_with(".csv")) CHECK(f.content.find(" [") < f.content.find("\r\n"));
  }
}

TEST_CASE("pmwf-figure1 emits the figure table and its plot script") {
  const auto r = run(default_config(Experiment::kPmwfFigure1));
  std::set<std::string> files;
  for (const auto& f : r.files) files.insert(f.name);
  CHECK(files == std::set<std::string>{"figure1.csv", "figure1.plot"});
  const Json m = r.manifest();
  CHECK(m["files"] == Json({"figure1.csv", "figure1.plot", "manifest.json"}));
  CHECK(r.passed());
}

TEST_CASE("runs are pure functions of (config, seed)") {
  Json j = raw("fleming-viot", small_fleming_viot());
  j["seed"] = 99;
  const auto cfg = parse_config(j);
  const auto a = run(cfg, {1});
  const auto b = run(cfg, {3});
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].name == b.files[i].name);
    CHECK(a.files[i].content == b.files[i].content);
  }
  auto other = cfg;
  other.seed = 100;
  CHECK(run(other, {1}).files[0].content != a.files[0].content);
}

TEST_CASE("module errors propagate out of run") {
  Json j = raw("fleming-viot", {{"lower", 0.0},
                                {"upper", 1e-3},
                                {"dt", 10.0},
                                {"t_final", 100.0},
                                {"sample_times", {100.0}},
                                {"rate_from", 0.0},
                                {"rate_window_steps", 10},
                                {"walkers", 8}});
  CHECK_THROWS_AS(run(parse_config(j), {1}), cclab::GuardViolation);
}
