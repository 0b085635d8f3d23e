#include <cmath>
#include <fstream>
#include <sstream>

#include "registry.hpp"

namespace cclab::runner {

namespace detail {

ParamSpec positive(std::string name, double fallback) {
  ParamSpec p{std::move(name), ParamType::kNumber, fallback};
  p.lower = 0.0;
  p.lower_open = true;
  return p;
}

ParamSpec number(std::string name, double fallback) {
  return ParamSpec{std::move(name), ParamType::kNumber, fallback};
}

ParamSpec bounded(std::string name, double fallback, double lower, double upper) {
  ParamSpec p{std::move(name), ParamType::kNumber, fallback};
  p.lower = lower;
  p.upper = upper;
  return p;
}

ParamSpec integer(std::string name, std::int64_t fallback, std::int64_t lower, std::int64_t upper) {
  ParamSpec p{std::move(name), ParamType::kInteger, fallback};
  p.lower = static_cast<double>(lower);
  p.upper = static_cast<double>(upper);
  return p;
}

ParamSpec positive_list(std::string name, std::vector<double> fallback, Order order) {
  ParamSpec p{std::move(name), ParamType::kNumberList, Json(fallback)};
  p.lower = 0.0;
  p.lower_open = true;
  p.order = order;
  return p;
}

void Violations::add(const std::string& param, std::string message) {
  list_.push_back({"parameters." + param, std::move(message)});
}

void Violations::add_field(std::string field, std::string message) {
  list_.push_back({std::move(field), std::move(message)});
}

bool is_multiple(double t, double dt) {
  if (!(t > 0.0) || !(dt > 0.0)) return false;
  const double s = std::round(t / dt);
  return s >= 1.0 && std::abs(s * dt - t) <= 1e-9 * t;
}

const ExperimentDef& definition(Experiment e) {
  for (const auto& d : registry()) {
    if (d.info.id == e) return d;
  }
  throw std::logic_error("experiment missing from the registry");
}

}  // namespace detail

namespace {

using detail::Order;
using detail::ParamSpec;
using detail::ParamType;

std::string range_text(const ParamSpec& p) {
  std::ostringstream s;
  if (std::isfinite(p.lower)) s << (p.lower_open ? "> " : ">= ") << format_number(p.lower);
  if (std::isfinite(p.upper)) {
    if (std::isfinite(p.lower)) s << " and ";
    s << "<= " << format_number(p.upper);
  }
  return s.str();
}

bool in_range(const ParamSpec& p, double v) {
  if (!std::isfinite(v)) return false;
  if (p.lower_open ? !(v > p.lower) : !(v >= p.lower)) return false;
  return v <= p.upper;
}

// Returns false when the value is unusable.
bool check_param(const ParamSpec& p, const Json& v, detail::Violations& out) {
  switch (p.type) {
    case ParamType::kBool:
      if (!v.is_boolean()) {
        out.add(p.name, "must be true or false");
        return false;
      }
      return true;
    case ParamType::kInteger:
      if (!v.is_number_integer()) {
        out.add(p.name, "must be an integer");
        return false;
      }
      if (!in_range(p, static_cast<double>(v.get<std::int64_t>()))) {
        out.add(p.name, "must be " + range_text(p) + ", got " + v.dump());
        return false;
      }
      return true;
    case ParamType::kNumber:
      if (!v.is_number()) {
        out.add(p.name, "must be a number");
        return false;
      }
      if (!in_range(p, v.get<double>())) {
        out.add(p.name, "must be " + range_text(p) + ", got " + v.dump());
        return false;
      }
      return true;
    case ParamType::kNumberList: {
      if (!v.is_array() || v.empty()) {
        out.add(p.name, "must be a non-empty list of numbers");
        return false;
      }
      bool ok = true;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !in_range(p, v[i].get<double>())) {
          out.add(p.name + "[" + std::to_string(i) + "]", "must be a number " + range_text(p));
          ok = false;
        }
      }
      if (!ok) return false;
      for (std::size_t i = 1; i < v.size(); ++i) {
        const double a = v[i - 1].get<double>(), b = v[i].get<double>();
        if (p.order == Order::kDecreasing && !(b < a)) {
          out.add(p.name, "must be strictly decreasing");
          return false;
        }
        if (p.order == Order::kIncreasing && !(b > a)) {
          out.add(p.name, "must be strictly increasing");
          return false;
        }
      }
      return true;
    }
  }
  return false;
}

struct Checked {
  std::optional<ExperimentConfig> config;
  std::vector<Violation> violations;
};

Checked check(const Json& raw) {
  Checked result;
  detail::Violations out;
  if (!raw.is_object()) {
    out.add_field("(document)", "configuration must be a JSON object");
    result.violations = std::move(out.list());
    return result;
  }
  for (const auto& [key, value] : raw.items()) {
    if (key != "experiment" && key != "seed" && key != "output_dir" && key != "parameters") {
      out.add_field(key, "unknown key");
    }
  }

  ExperimentConfig cfg;
  const detail::ExperimentDef* def = nullptr;
  if (!raw.contains("experiment")) {
    out.add_field("experiment", "missing; run `list` for the experiment names");
  } else if (!raw["experiment"].is_string()) {
    out.add_field("experiment", "must be a string");
  } else if (auto e = experiment_from_name(raw["experiment"].get<std::string>())) {
    cfg.experiment = *e;
    def = &detail::definition(*e);
  } else {
    out.add_field("experiment", "unknown experiment \"" + raw["experiment"].get<std::string>() + "\"");
  }

  if (raw.contains("seed")) {
    const Json& s = raw["seed"];
    if (s.is_number_unsigned()) {
      cfg.seed = s.get<std::uint64_t>();
    } else if (s.is_number_integer() && s.get<std::int64_t>() >= 0) {
      cfg.seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
    } else {
      out.add_field("seed", "must be an integer in [0, 2^64)");
    }
  }
  if (raw.contains("output_dir")) {
    if (raw["output_dir"].is_string() && !raw["output_dir"].get<std::string>().empty()) {
      cfg.output_dir = raw["output_dir"].get<std::string>();
    } else {
      out.add_field("output_dir", "must be a non-empty string");
    }
  }

  Json given = Json::object();
  if (raw.contains("parameters")) {
    if (raw["parameters"].is_object()) {
      given = raw["parameters"];
    } else {
      out.add_field("parameters", "must be an object");
    }
  }

  if (def != nullptr) {
    for (const auto& [key, value] : given.items()) {
      bool known = false;
      for (const auto& p : def->params) known = known || p.name == key;
      if (!known) out.add(key, "unknown parameter for " + def->info.name);
    }
    bool usable = true;
    Json params = Json::object();
    for (const auto& p : def->params) {
      const Json& v = given.contains(p.name) ? given[p.name] : p.fallback;
      usable = check_param(p, v, out) && usable;
      params[p.name] = v;
    }
    if (usable && def->cross_check) def->cross_check(params, out);
    cfg.parameters = std::move(params);
  }

  result.violations = std::move(out.list());
  if (result.violations.empty()) result.config = std::move(cfg);
  return result;
}

std::string summarize(const std::vector<Violation>& v) {
  std::string s = "invalid configuration:";
  for (const auto& x : v) s += "\n  " + x.field + ": " + x.message;
  return s;
}

}  // namespace

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> v;
    for (const auto& d : detail::registry()) v.push_back(d.info);
    return v;
  }();
  return infos;
}

std::optional<Experiment> experiment_from_name(std::string_view name) {
  for (const auto& d : detail::registry()) {
    if (d.info.name == name) return d.info.id;
  }
  return std::nullopt;
}

const std::string& to_string(Experiment e) { return detail::definition(e).info.name; }

Json ExperimentConfig::to_json() const {
  Json j;
  j["experiment"] = to_string(experiment);
  j["seed"] = seed;
  j["output_dir"] = output_dir.string();
  j["parameters"] = parameters;
  return j;
}

ConfigError::ConfigError(std::vector<Violation> violations)
    : std::runtime_error(summarize(violations)), violations_(std::move(violations)) {}

std::vector<Violation> validate(const Json& raw) { return check(raw).violations; }

ExperimentConfig parse_config(const Json& raw) {
  auto c = check(raw);
  if (!c.config) throw ConfigError(std::move(c.violations));
  return std::move(*c.config);
}

ExperimentConfig default_config(Experiment e) {
  Json raw;
  raw["experiment"] = to_string(e);
  return parse_config(raw);
}

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({{"--config", "cannot open " + path.string()}});
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError({{"--config", path.string() + " is not valid JSON: " + e.what()}});
  }
}

}  // namespace cclab::runner
