#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cclab/runner.hpp"

namespace cclab::runner::detail {

enum class ParamType { kNumber, kInteger, kNumberList, kBool };
enum class Order { kAny, kIncreasing, kDecreasing };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::kNumber;
  Json fallback;
  double lower = -std::numeric_limits<double>::infinity();
  bool lower_open = false;
  double upper = std::numeric_limits<double>::infinity();
  Order order = Order::kAny;
};

ParamSpec positive(std::string name, double fallback);
ParamSpec number(std::string name, double fallback);
ParamSpec bounded(std::string name, double fallback, double lower, double upper);
ParamSpec integer(std::string name, std::int64_t fallback, std::int64_t lower,
                  std::int64_t upper = std::numeric_limits<std::int32_t>::max());
ParamSpec positive_list(std::string name, std::vector<double> fallback, Order order);

/// Problems collected while validating; parameter names are prefixed with
/// "parameters.".
class Violations {
 public:
  void add(const std::string& param, std::string message);
  void add_field(std::string field, std::string message);
  std::vector<Violation>& list() { return list_; }

 private:
  std::vector<Violation> list_;
};

/// Checks linking several parameters; only called once every parameter has
/// the right type and range.
using CrossCheck = std::function<void(const Json& params, Violations& out)>;

/// What an experiment produces, before manifest assembly.
struct Outcome {
  std::vector<Criterion> criteria;
  Json diagnostics = Json::object();
  std::vector<OutputFile> files;
};

using Runner = std::function<Outcome(const ExperimentConfig&, const RunOptions&)>;

struct ExperimentDef {
  ExperimentInfo info;
  std::vector<ParamSpec> params;
  CrossCheck cross_check;
  Runner run;
};

const std::vector<ExperimentDef>& registry();
const ExperimentDef& definition(Experiment e);

/// True when t is a positive integer multiple of dt to relative accuracy 1e-9.
bool is_multiple(double t, double dt);

}  // namespace cclab::runner::detail
