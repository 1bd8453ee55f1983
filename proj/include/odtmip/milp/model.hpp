#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace odtmip::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Index of a variable inside a Model.
struct VarId {
  std::int32_t index = -1;

  constexpr bool valid() const { return index >= 0; }
  constexpr std::size_t pos() const { return static_cast<std::size_t>(index); }
  friend constexpr bool operator==(VarId, VarId) = default;
  friend constexpr auto operator<=>(VarId, VarId) = default;
};

enum class VarKind { Continuous, Binary, Integer };
enum class Sense { LessEqual, Equal, GreaterEqual };
enum class ConstraintTag { Core, UserCut };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInfinity;
  double objective = 0.0;

  bool is_integral() const { return kind != VarKind::Continuous; }
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  ConstraintTag tag = ConstraintTag::Core;
};

/// A minimization MILP. Variables and constraints are append-only; merging
/// duplicate terms happens in add_constraint so every coefficient list has
/// unique variable ids.
class Model {
 public:
  VarId add_variable(std::string name, VarKind kind, double lower, double upper,
                     double objective = 0.0);
  std::size_t add_constraint(Constraint constraint);
  std::size_t add_constraint(std::string name, std::vector<Term> terms, Sense sense,
                             double rhs, ConstraintTag tag = ConstraintTag::Core);

  /// Adds `terms` to an existing row, merging with its coefficients.
  void add_terms(std::size_t row, std::vector<Term> terms);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Variable& variable(VarId id) const { return variables_.at(id.pos()); }
  Variable& variable(VarId id) { return variables_.at(id.pos()); }

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }
  std::size_t count_tagged(ConstraintTag tag) const;
  bool has_integer_variables() const;

  void set_objective(VarId id, double coef) { variable(id).objective = coef; }
  void set_objective_offset(double offset) { objective_offset_ = offset; }
  double objective_offset() const { return objective_offset_; }

  /// Constant term plus sum of objective coefficients times values.
  double evaluate_objective(std::span<const double> values) const;

 private:
  void normalize_terms(const std::string& name, std::vector<Term>& terms) const;

  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  double objective_offset_ = 0.0;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, TimeLimit, Unbounded };

const char* to_string(SolveStatus status);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = kInfinity;
  double best_bound = -kInfinity;
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  /// True when the returned incumbent is the caller's warm start.
  bool from_warm_start = false;

  bool has_incumbent() const {
    return status == SolveStatus::Optimal || status == SolveStatus::Feasible ||
           (status == SolveStatus::TimeLimit && !values.empty());
  }
  double gap() const;
};

struct SolverConfig {
  double time_limit_seconds = kInfinity;
  double absolute_gap = 1e-9;
  double relative_gap = 1e-9;
  double integrality_tolerance = 1e-6;
  double feasibility_tolerance = 1e-7;
  std::uint64_t seed = 0;
  /// Nodes after which branch-and-bound stops and reports Feasible.
  std::size_t max_nodes = std::numeric_limits<std::size_t>::max();
  /// Dense tableau entries the built-in LP solver may allocate.
  std::size_t max_tableau_entries = std::size_t{1} << 27;

  void validate() const;
};

struct Violation {
  enum class Kind { Constraint, LowerBound, UpperBound, Integrality };
  Kind kind = Kind::Constraint;
  std::size_t index = 0;  ///< constraint index or variable index
  double magnitude = 0.0;
};

/// Every violated constraint, bound, and integrality requirement. The
/// report is empty iff the point is feasible within the tolerances.
std::vector<Violation> check_feasible(const Model& model, std::span<const double> values,
                                      double feasibility_tolerance = 1e-6,
                                      double integrality_tolerance = 1e-6);

double row_activity(const Constraint& row, std::span<const double> values);
double row_violation(const Constraint& row, std::span<const double> values);

}  // namespace odtmip::milp
