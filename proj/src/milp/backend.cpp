#include "odtmip/milp/backend.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "odtmip/error.hpp"
#include "odtmip/milp/bnb.hpp"

#ifndef ODTMIP_DEFAULT_BACKEND_SCRIPT
#define ODTMIP_DEFAULT_BACKEND_SCRIPT "tools/milp_backend.py"
#endif

namespace odtmip::milp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (const char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

json bound_json(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

const char* kind_name(VarKind kind) {
  switch (kind) {
    case VarKind::Continuous: return "continuous";
    case VarKind::Binary: return "binary";
    case VarKind::Integer: return "integer";
  }
  return "continuous";
}

const char* sense_name(Sense sense) {
  switch (sense) {
    case Sense::LessEqual: return "<=";
    case Sense::Equal: return "=";
    case Sense::GreaterEqual: return ">=";
  }
  return "=";
}

json model_document(const Model& model, const SolverConfig& config,
                    std::span<const double> warm_start) {
  json vars = json::array();
  for (const auto& v : model.variables()) {
    vars.push_back({{"kind", kind_name(v.kind)},
                    {"lb", bound_json(v.lower)},
                    {"ub", bound_json(v.upper)},
                    {"obj", v.objective}});
  }
  json rows = json::array();
  for (const auto& c : model.constraints()) {
    json terms = json::array();
    for (const auto& t : c.terms) terms.push_back({t.var.index, t.coef});
    rows.push_back({{"terms", std::move(terms)}, {"sense", sense_name(c.sense)}, {"rhs", c.rhs}});
  }
  json doc = {{"variables", std::move(vars)},
              {"constraints", std::move(rows)},
              {"objective_offset", model.objective_offset()},
              {"relative_gap", config.relative_gap},
              {"absolute_gap", config.absolute_gap}};
  doc["time_limit"] = bound_json(config.time_limit_seconds);
  if (!warm_start.empty()) {
    doc["warm_start"] = std::vector<double>(warm_start.begin(), warm_start.end());
  } else {
    doc["warm_start"] = nullptr;
  }
  return doc;
}

SolveStatus parse_status(const std::string& name) {
  if (name == "Optimal") return SolveStatus::Optimal;
  if (name == "Feasible") return SolveStatus::Feasible;
  if (name == "Infeasible") return SolveStatus::Infeasible;
  if (name == "TimeLimit") return SolveStatus::TimeLimit;
  if (name == "Unbounded") return SolveStatus::Unbounded;
  throw Error(ErrorCode::BackendFailure, "external solver reported status '" + name + "'");
}

fs::path unique_temp(const std::string& stem, const std::string& ext) {
  static std::atomic<unsigned long> counter{0};
  std::ostringstream name;
  name << "odtmip-" << ::getpid() << '-' << counter.fetch_add(1) << '-' << stem << ext;
  return fs::temp_directory_path() / name.str();
}

}  // namespace

Solution BuiltinBackend::solve(const Model& model, const SolverConfig& config,
                               std::span<const double> warm_start) const {
  return solve_bnb(model, config, warm_start);
}

ExternalBackend::ExternalBackend(std::string python, std::string script)
    : python_(std::move(python)), script_(std::move(script)) {}

std::string ExternalBackend::default_script() {
  if (const char* env = std::getenv("ODTMIP_BACKEND_SCRIPT"); env != nullptr && *env != '\0') {
    return env;
  }
  return ODTMIP_DEFAULT_BACKEND_SCRIPT;
}

bool ExternalBackend::probe() const {
  if (!fs::exists(script_)) return false;
  const auto out = unique_temp("probe", ".txt");
  const std::string command = shell_quote(python_) + " " + shell_quote(script_) +
                              " --probe > " + shell_quote(out.string()) + " 2>/dev/null";
  const int rc = std::system(command.c_str());
  std::ifstream in(out);
  std::string engine;
  std::getline(in, engine);
  std::error_code ec;
  fs::remove(out, ec);
  if (rc != 0 || engine.empty()) return false;
  engine_ = engine;
  return true;
}

Solution ExternalBackend::solve(const Model& model, const SolverConfig& config,
                                std::span<const double> warm_start) const {
  const auto model_path = unique_temp("model", ".json");
  const auto solution_path = unique_temp("solution", ".json");
  const auto log_path = unique_temp("log", ".txt");
  {
    std::ofstream out(model_path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + model_path.string());
    out << model_document(model, config, warm_start).dump();
  }
  const std::string command = shell_quote(python_) + " " + shell_quote(script_) + " " +
                              shell_quote(model_path.string()) + " " +
                              shell_quote(solution_path.string()) + " > " +
                              shell_quote(log_path.string()) + " 2>&1";
  const int rc = std::system(command.c_str());
  std::error_code ec;
  fs::remove(model_path, ec);
  if (rc != 0 || !fs::exists(solution_path)) {
    std::ifstream log(log_path);
    std::stringstream text;
    text << log.rdbuf();
    fs::remove(log_path, ec);
    fs::remove(solution_path, ec);
    throw Error(ErrorCode::BackendFailure, "external solver failed: " + text.str());
  }
  fs::remove(log_path, ec);
  json doc;
  {
    std::ifstream in(solution_path);
    doc = json::parse(in);
  }
  fs::remove(solution_path, ec);

  Solution solution;
  solution.status = parse_status(doc.at("status").get<std::string>());
  if (doc.contains("engine") && doc["engine"].is_string()) engine_ = doc["engine"];
  if (doc.contains("values") && doc["values"].is_array()) {
    solution.values = doc["values"].get<std::vector<double>>();
  }
  if (doc.contains("objective") && doc["objective"].is_number()) {
    solution.objective = doc["objective"].get<double>();
  }
  if (doc.contains("best_bound") && doc["best_bound"].is_number()) {
    solution.best_bound = doc["best_bound"].get<double>();
  }
  return solution;
}

void BackendRegistry::add(std::shared_ptr<const Backend> backend) {
  std::lock_guard lock(mutex_);
  backends_[backend->name()] = std::move(backend);
}

void BackendRegistry::remove(const std::string& name) {
  std::lock_guard lock(mutex_);
  backends_.erase(name);
}

std::shared_ptr<const Backend> BackendRegistry::get(const std::string& name) const {
  std::lock_guard lock(mutex_);
  const auto it = backends_.find(name);
  if (it == backends_.end()) {
    throw Error(ErrorCode::BackendUnavailable, "no backend registered as '" + name + "'");
  }
  return it->second;
}

bool BackendRegistry::contains(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return backends_.count(name) != 0;
}

BackendRegistry& BackendRegistry::global() {
  static BackendRegistry* registry = [] {
    auto* r = new BackendRegistry;
    r->add(std::make_shared<BuiltinBackend>());
    auto external =
        std::make_shared<ExternalBackend>("python3", ExternalBackend::default_script());
    if (external->probe()) r->add(std::move(external));
    return r;
  }();
  return *registry;
}

Solution backend_solve(const Model& model, const SolverConfig& config,
                       std::span<const double> warm_start, const std::string& backend_name,
                       const BackendRegistry& registry) {
  config.validate();
  const auto backend = registry.get(backend_name);
  double warm_objective = kInfinity;
  if (!warm_start.empty()) {
    const auto report = check_feasible(model, warm_start, 1e-6, config.integrality_tolerance);
    if (!report.empty()) {
      throw Error(ErrorCode::InfeasibleWarmStart, "warm start is not feasible for the model");
    }
    warm_objective = model.evaluate_objective(warm_start);
  }

  Solution solution = backend->solve(model, config, warm_start);
  if (solution.values.size() == model.num_variables()) {
    const auto& vars = model.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
      if (vars[j].is_integral()) solution.values[j] = std::round(solution.values[j]);
    }
    const auto report = check_feasible(model, solution.values, 1e-6, 1e-6);
    if (!report.empty()) {
      // An answer outside tolerance is no incumbent at all.
      solution.values.clear();
      solution.objective = kInfinity;
      if (solution.status == SolveStatus::Optimal) solution.status = SolveStatus::Feasible;
    } else {
      solution.objective = model.evaluate_objective(solution.values);
    }
  } else {
    solution.values.clear();
    solution.objective = kInfinity;
  }

  if (!warm_start.empty() &&
      (solution.values.empty() || solution.objective > warm_objective + 1e-9)) {
    solution.values.assign(warm_start.begin(), warm_start.end());
    solution.objective = warm_objective;
    solution.from_warm_start = true;
  }
  if (solution.values.empty()) {
    if (solution.status == SolveStatus::Optimal || solution.status == SolveStatus::Feasible) {
      solution.status = SolveStatus::TimeLimit;
    }
  } else if (solution.status == SolveStatus::Infeasible ||
             solution.status == SolveStatus::Unbounded) {
    solution.status = SolveStatus::Feasible;
  }
  if (std::isfinite(solution.objective)) {
    solution.best_bound = std::isfinite(solution.best_bound)
                              ? std::min(solution.best_bound, solution.objective)
                              : solution.best_bound;
  }
  return solution;
}

}  // namespace odtmip::milp
