#include "odtmip/milp/model.hpp"

#include <algorithm>
#include <cmath>

#include "odtmip/error.hpp"

namespace odtmip {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InfeasibleWarmStart: return "InfeasibleWarmStart";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::Categorical: return "Categorical";
  }
  return "Unknown";
}

}  // namespace odtmip

namespace odtmip::milp {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::TimeLimit: return "TimeLimit";
    case SolveStatus::Unbounded: return "Unbounded";
  }
  return "Unknown";
}

double Solution::gap() const {
  if (values.empty() || !std::isfinite(objective) || !std::isfinite(best_bound)) {
    return kInfinity;
  }
  return std::max(0.0, objective - best_bound);
}

void SolverConfig::validate() const {
  if (!(time_limit_seconds > 0.0) || !(absolute_gap >= 0.0) || !(relative_gap >= 0.0) ||
      !(integrality_tolerance > 0.0) || !(feasibility_tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "solver tolerances and time limit must be positive");
  }
}

VarId Model::add_variable(std::string name, VarKind kind, double lower, double upper,
                          double objective) {
  if (kind == VarKind::Binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  if (std::isnan(lower) || std::isnan(upper) || std::isnan(objective)) {
    throw Error(ErrorCode::NonFinite, "variable '" + name + "' has NaN data");
  }
  variables_.push_back(Variable{std::move(name), kind, lower, upper, objective});
  return VarId{static_cast<std::int32_t>(variables_.size() - 1)};
}

void Model::normalize_terms(const std::string& name, std::vector<Term>& terms) const {
  for (const auto& t : terms) {
    if (!t.var.valid() || t.var.pos() >= variables_.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "constraint '" + name + "' references unknown variable");
    }
  }
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  terms = std::move(merged);
}

std::size_t Model::add_constraint(Constraint constraint) {
  normalize_terms(constraint.name, constraint.terms);
  constraints_.push_back(std::move(constraint));
  return constraints_.size() - 1;
}

void Model::add_terms(std::size_t row, std::vector<Term> terms) {
  auto& c = constraints_.at(row);
  terms.insert(terms.end(), c.terms.begin(), c.terms.end());
  normalize_terms(c.name, terms);
  c.terms = std::move(terms);
}

std::size_t Model::add_constraint(std::string name, std::vector<Term> terms, Sense sense,
                                  double rhs, ConstraintTag tag) {
  return add_constraint(Constraint{std::move(name), std::move(terms), sense, rhs, tag});
}

std::size_t Model::count_tagged(ConstraintTag tag) const {
  return static_cast<std::size_t>(std::count_if(
      constraints_.begin(), constraints_.end(),
      [tag](const Constraint& c) { return c.tag == tag; }));
}

bool Model::has_integer_variables() const {
  return std::any_of(variables_.begin(), variables_.end(),
                     [](const Variable& v) { return v.is_integral(); });
}

double Model::evaluate_objective(std::span<const double> values) const {
  double total = objective_offset_;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    if (variables_[j].objective != 0.0) total += variables_[j].objective * values[j];
  }
  return total;
}

double row_activity(const Constraint& row, std::span<const double> values) {
  double activity = 0.0;
  for (const auto& t : row.terms) activity += t.coef * values[t.var.pos()];
  return activity;
}

double row_violation(const Constraint& row, std::span<const double> values) {
  const double activity = row_activity(row, values);
  switch (row.sense) {
    case Sense::LessEqual: return std::max(0.0, activity - row.rhs);
    case Sense::GreaterEqual: return std::max(0.0, row.rhs - activity);
    case Sense::Equal: return std::abs(activity - row.rhs);
  }
  return 0.0;
}

std::vector<Violation> check_feasible(const Model& model, std::span<const double> values,
                                      double feasibility_tolerance,
                                      double integrality_tolerance) {
  if (values.size() != model.num_variables()) {
    throw Error(ErrorCode::DimensionMismatch, "value vector does not cover every variable");
  }
  std::vector<Violation> report;
  const auto& vars = model.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double x = values[j];
    if (!std::isfinite(x)) {
      report.push_back({Violation::Kind::LowerBound, j, kInfinity});
      continue;
    }
    if (x < vars[j].lower - feasibility_tolerance) {
      report.push_back({Violation::Kind::LowerBound, j, vars[j].lower - x});
    }
    if (x > vars[j].upper + feasibility_tolerance) {
      report.push_back({Violation::Kind::UpperBound, j, x - vars[j].upper});
    }
    if (vars[j].is_integral()) {
      const double frac = std::abs(x - std::round(x));
      if (frac > integrality_tolerance) {
        report.push_back({Violation::Kind::Integrality, j, frac});
      }
    }
  }
  const auto& rows = model.constraints();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double v = row_violation(rows[r], values);
    if (v > feasibility_tolerance) report.push_back({Violation::Kind::Constraint, r, v});
  }
  return report;
}

}  // namespace odtmip::milp
