#include "odtmip/milp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "odtmip/error.hpp"

namespace odtmip::milp {
namespace {

// How an original variable maps onto nonnegative tableau columns.
enum class ColumnMap { Shift, Negate, Split };

struct VarMapping {
  ColumnMap map = ColumnMap::Shift;
  std::size_t column = 0;  // first column; Split uses column and column + 1
  double offset = 0.0;     // x = offset + x' (Shift) or offset - x' (Negate)
};

enum class ColStatus : unsigned char { Basic, AtLower, AtUpper };

class Tableau {
 public:
  Tableau(const Model& model, std::span<const double> lower, std::span<const double> upper,
          const LpOptions& options)
      : model_(model), options_(options) {
    build(lower, upper);
  }

  bool infeasible_bounds() const { return infeasible_bounds_; }
  bool too_large() const { return too_large_; }

  LpResult solve() {
    LpResult result;
    if (infeasible_bounds_) {
      result.status = SolveStatus::Infeasible;
      return result;
    }
    if (too_large_) {
      result.status = SolveStatus::TimeLimit;
      result.too_large = true;
      return result;
    }
    max_iterations_ = options_.max_iterations != 0
                          ? options_.max_iterations
                          : 20000 + 50 * (rows_ + cols_);

    if (num_artificial_ > 0) {
      set_phase_one_costs();
      const auto phase1 = iterate();
      result.iterations = iterations_;
      if (phase1 != SolveStatus::Optimal) {
        // Phase one is bounded below by zero; anything else is a limit hit.
        result.status = phase1 == SolveStatus::Unbounded ? SolveStatus::Infeasible : phase1;
        return result;
      }
      double infeasibility = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (is_artificial(basis_[r])) infeasibility += std::max(0.0, x_basic_[r]);
      }
      if (infeasibility > std::max(1e-7, options_.feasibility_tolerance * rows_)) {
        result.status = SolveStatus::Infeasible;
        return result;
      }
      // Artificials are pinned at zero for phase two.
      for (std::size_t c = first_artificial_; c < cols_; ++c) upper_[c] = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (is_artificial(basis_[r])) x_basic_[r] = 0.0;
      }
    }

    set_phase_two_costs();
    const auto phase2 = iterate();
    result.iterations = iterations_;
    if (phase2 != SolveStatus::Optimal) {
      result.status = phase2;
      return result;
    }
    result.status = SolveStatus::Optimal;
    result.values = extract_values();
    result.objective = model_.evaluate_objective(result.values);
    return result;
  }

 private:
  bool is_artificial(std::size_t column) const { return column >= first_artificial_; }

  double& at(std::size_t r, std::size_t c) { return tableau_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return tableau_[r * cols_ + c]; }

  void build(std::span<const double> lower, std::span<const double> upper) {
    const auto& vars = model_.variables();
    const auto& rows = model_.constraints();
    const std::size_t n = vars.size();
    mapping_.resize(n);

    std::size_t structural = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double lo = lower[j];
      const double hi = upper[j];
      if (lo > hi + options_.feasibility_tolerance) infeasible_bounds_ = true;
      if (std::isfinite(lo)) {
        mapping_[j] = {ColumnMap::Shift, structural, lo};
        col_upper_init_.push_back(std::isfinite(hi) ? std::max(0.0, hi - lo) : kInfinity);
        col_cost_.push_back(vars[j].objective);
        structural += 1;
      } else if (std::isfinite(hi)) {
        mapping_[j] = {ColumnMap::Negate, structural, hi};
        col_upper_init_.push_back(kInfinity);
        col_cost_.push_back(-vars[j].objective);
        structural += 1;
      } else {
        mapping_[j] = {ColumnMap::Split, structural, 0.0};
        col_upper_init_.push_back(kInfinity);
        col_upper_init_.push_back(kInfinity);
        col_cost_.push_back(vars[j].objective);
        col_cost_.push_back(-vars[j].objective);
        structural += 2;
      }
    }

    rows_ = rows.size();
    std::size_t slacks = 0;
    for (const auto& row : rows) {
      if (row.sense != Sense::Equal) ++slacks;
    }
    first_slack_ = structural;

    // Transformed right-hand sides and slack signs decide which rows need
    // an artificial column.
    std::vector<double> rhs(rows_);
    std::vector<double> row_sign(rows_, 1.0);
    std::vector<bool> needs_artificial(rows_, false);
    {
      for (std::size_t r = 0; r < rows_; ++r) {
        double b = rows[r].rhs;
        for (const auto& t : rows[r].terms) {
          const auto& mp = mapping_[t.var.pos()];
          if (mp.map != ColumnMap::Split) b -= t.coef * mp.offset;
        }
        double slack_coef = 0.0;
        if (rows[r].sense == Sense::LessEqual) slack_coef = 1.0;
        if (rows[r].sense == Sense::GreaterEqual) slack_coef = -1.0;
        if (b < 0.0) {
          row_sign[r] = -1.0;
          b = -b;
          slack_coef = -slack_coef;
        }
        rhs[r] = b;
        needs_artificial[r] = !(slack_coef > 0.0);
      }
    }
    num_artificial_ = static_cast<std::size_t>(
        std::count(needs_artificial.begin(), needs_artificial.end(), true));
    first_artificial_ = first_slack_ + slacks;
    cols_ = first_artificial_ + num_artificial_;

    if (rows_ * cols_ > options_.max_tableau_entries) {
      too_large_ = true;
      return;
    }
    if (infeasible_bounds_) return;

    tableau_.assign(rows_ * cols_, 0.0);
    upper_.assign(cols_, kInfinity);
    cost_.assign(cols_, 0.0);
    status_.assign(cols_, ColStatus::AtLower);
    basis_.assign(rows_, 0);
    x_basic_.assign(rows_, 0.0);
    std::copy(col_upper_init_.begin(), col_upper_init_.end(), upper_.begin());
    std::copy(col_cost_.begin(), col_cost_.end(), cost_.begin());

    std::size_t slack = first_slack_;
    std::size_t artificial = first_artificial_;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double sign = row_sign[r];
      for (const auto& t : rows[r].terms) {
        const auto& mp = mapping_[t.var.pos()];
        switch (mp.map) {
          case ColumnMap::Shift: at(r, mp.column) += sign * t.coef; break;
          case ColumnMap::Negate: at(r, mp.column) -= sign * t.coef; break;
          case ColumnMap::Split:
            at(r, mp.column) += sign * t.coef;
            at(r, mp.column + 1) -= sign * t.coef;
            break;
        }
      }
      x_basic_[r] = rhs[r];
      if (rows[r].sense != Sense::Equal) {
        const double coef = (rows[r].sense == Sense::LessEqual ? 1.0 : -1.0) * sign;
        at(r, slack) = coef;
        if (!needs_artificial[r]) {
          basis_[r] = slack;
          status_[slack] = ColStatus::Basic;
        }
        ++slack;
      }
      if (needs_artificial[r]) {
        at(r, artificial) = 1.0;
        basis_[r] = artificial;
        status_[artificial] = ColStatus::Basic;
        ++artificial;
      }
    }
    original_.assign(cols_, {});
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) {
        if (at(r, c) != 0.0) original_[c].emplace_back(r, at(r, c));
      }
    }
    rhs_ = x_basic_;
  }

  // Rebuilds the tableau for the current basis from the original columns
  // and recomputes the basic values, discarding accumulated round-off.
  // Leaves everything untouched if elimination meets a tiny pivot.
  bool refactor() {
    std::vector<double> t(rows_ * cols_, 0.0);
    for (std::size_t c = 0; c < cols_; ++c) {
      for (const auto& [r, v] : original_[c]) t[r * cols_ + c] = v;
    }
    std::vector<double> rhs = rhs_;
    std::vector<bool> done(rows_, false);
    std::vector<std::size_t> basis(rows_);
    for (std::size_t k = 0; k < rows_; ++k) {
      const std::size_t c = basis_[k];
      std::size_t pr = rows_;
      double best = 1e-11;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (!done[r] && std::abs(t[r * cols_ + c]) > best) {
          best = std::abs(t[r * cols_ + c]);
          pr = r;
        }
      }
      if (pr == rows_) return false;
      done[pr] = true;
      basis[pr] = c;
      double* prow = &t[pr * cols_];
      const double inv = 1.0 / prow[c];
      for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
      prow[c] = 1.0;
      rhs[pr] *= inv;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (r == pr) continue;
        double* row = &t[r * cols_];
        const double f = row[c];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < cols_; ++j) {
          if (prow[j] != 0.0) row[j] -= f * prow[j];
        }
        row[c] = 0.0;
        rhs[r] -= f * rhs[pr];
      }
    }
    tableau_ = std::move(t);
    basis_ = std::move(basis);
    for (std::size_t r = 0; r < rows_; ++r) {
      double v = rhs[r];
      for (std::size_t c = 0; c < cols_; ++c) {
        if (status_[c] == ColStatus::AtUpper) v -= at(r, c) * upper_[c];
      }
      x_basic_[r] = v;
    }
    if (phase_one_) {
      set_phase_one_costs();
    } else {
      set_phase_two_costs();
    }
    since_refactor_ = 0;
    return true;
  }

  void set_phase_one_costs() {
    std::vector<double> phase1(cols_, 0.0);
    for (std::size_t c = first_artificial_; c < cols_; ++c) phase1[c] = 1.0;
    load_costs(phase1);
    phase_one_ = true;
  }

  void set_phase_two_costs() {
    load_costs(cost_);
    phase_one_ = false;
  }

  // Phase one is done once every artificial is zero; further pivots are
  // degenerate and only accumulate round-off.
  bool artificials_cleared() const {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (is_artificial(basis_[r]) && x_basic_[r] > 1e-9) return false;
    }
    return true;
  }

  // Reduced costs d = c - c_B^T T for the current tableau.
  void load_costs(const std::vector<double>& costs) {
    reduced_.assign(costs.begin(), costs.end());
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = costs[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = &tableau_[r * cols_];
      for (std::size_t c = 0; c < cols_; ++c) reduced_[c] -= cb * row[c];
    }
    for (std::size_t r = 0; r < rows_; ++r) reduced_[basis_[r]] = 0.0;
  }

  bool may_enter(std::size_t c) const {
    if (status_[c] == ColStatus::Basic) return false;
    if (upper_[c] <= 0.0) return false;  // fixed columns (pinned artificials)
    return true;
  }

  // Returns the entering column or cols_ when the basis is optimal.
  std::size_t price(bool bland) const {
    const double tol = options_.optimality_tolerance;
    std::size_t best = cols_;
    double best_score = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
      const double d = reduced_[c];
      if (!(d < -tol || d > tol)) continue;
      if (!may_enter(c)) continue;
      double score = 0.0;
      if (status_[c] == ColStatus::AtLower && d < -tol) score = -d;
      if (status_[c] == ColStatus::AtUpper && d > tol) score = d;
      if (score <= 0.0) continue;
      if (bland) return c;
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    return best;
  }

  SolveStatus iterate() {
    std::size_t degenerate_run = 0;
    bool bland = options_.bland_only;
    std::vector<double> column(rows_);
    while (true) {
      if (iterations_ >= max_iterations_) return SolveStatus::TimeLimit;
      if (options_.deadline && (iterations_ & 31u) == 0 && Clock::now() > *options_.deadline) {
        return SolveStatus::TimeLimit;
      }
      if (since_refactor_ >= std::max<std::size_t>(100, rows_)) refactor();
      if (phase_one_ && artificials_cleared()) return SolveStatus::Optimal;
      std::size_t q = price(bland);
      if (q == cols_ && since_refactor_ > 0 && refactor()) {
        if (phase_one_ && artificials_cleared()) return SolveStatus::Optimal;
        q = price(bland);
      }
      if (q == cols_) return SolveStatus::Optimal;
      ++iterations_;
      ++since_refactor_;

      const double direction = status_[q] == ColStatus::AtLower ? 1.0 : -1.0;
      for (std::size_t r = 0; r < rows_; ++r) column[r] = at(r, q);

      // Ratio test in two passes: the minimum ratio, then a choice among
      // the rows that tie it. Bland's lowest index is only taken among
      // pivots within a factor 100 of the largest tied one.
      std::vector<double>& ratios = ratio_;
      ratios.assign(rows_, kInfinity);
      std::vector<bool>& upper_side = upper_side_;
      upper_side.assign(rows_, false);
      double best_ratio = kInfinity;
      for (std::size_t r = 0; r < rows_; ++r) {
        const double alpha = direction * column[r];
        if (alpha > options_.pivot_tolerance) {
          ratios[r] = std::max(0.0, x_basic_[r]) / alpha;
        } else if (alpha < -options_.pivot_tolerance && std::isfinite(upper_[basis_[r]])) {
          ratios[r] = std::max(0.0, upper_[basis_[r]] - x_basic_[r]) / -alpha;
          upper_side[r] = true;
        } else {
          continue;
        }
        best_ratio = std::min(best_ratio, ratios[r]);
      }
      std::size_t leave_row = rows_;
      bool leave_to_upper = false;
      if (std::isfinite(best_ratio)) {
        const double cutoff = best_ratio + 1e-12;
        double largest = 0.0;
        for (std::size_t r = 0; r < rows_; ++r) {
          if (ratios[r] <= cutoff) largest = std::max(largest, std::abs(column[r]));
        }
        for (std::size_t r = 0; r < rows_; ++r) {
          if (ratios[r] > cutoff) continue;
          const double mag = std::abs(column[r]);
          bool take = leave_row == rows_;
          if (!take && bland) {
            take = mag >= 0.01 * largest &&
                   (std::abs(column[leave_row]) < 0.01 * largest || basis_[r] < basis_[leave_row]);
          } else if (!take) {
            take = mag > std::abs(column[leave_row]);
          }
          if (take) {
            leave_row = r;
            leave_to_upper = upper_side[r];
          }
        }
        best_ratio = ratios[leave_row];
      }
      double theta = best_ratio;
      if (upper_[q] <= best_ratio) {
        theta = upper_[q];
        leave_row = rows_;
      }
      if (!std::isfinite(theta)) return SolveStatus::Unbounded;

      if (theta <= 1e-12) {
        ++degenerate_run;
        if (degenerate_run >= options_.degenerate_switch) bland = true;
      } else {
        degenerate_run = 0;
        bland = options_.bland_only;
      }

      const double step = direction * theta;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (column[r] != 0.0) x_basic_[r] -= step * column[r];
      }

      if (leave_row == rows_) {
        // Bound flip: the entering column reaches its own opposite bound.
        status_[q] = status_[q] == ColStatus::AtLower ? ColStatus::AtUpper : ColStatus::AtLower;
        continue;
      }

      const double entering_value =
          status_[q] == ColStatus::AtLower ? theta : upper_[q] - theta;
      const std::size_t leaving = basis_[leave_row];
      status_[leaving] = leave_to_upper ? ColStatus::AtUpper : ColStatus::AtLower;
      pivot(leave_row, q);
      basis_[leave_row] = q;
      status_[q] = ColStatus::Basic;
      x_basic_[leave_row] = entering_value;
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    double* prow = &tableau_[pr * cols_];
    const double inv = 1.0 / prow[pc];
    for (std::size_t c = 0; c < cols_; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    nonzero_.clear();
    for (std::size_t c = 0; c < cols_; ++c) {
      if (prow[c] != 0.0) nonzero_.push_back(c);
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      double* row = &tableau_[r * cols_];
      const double factor = row[pc];
      if (factor == 0.0) continue;
      for (const std::size_t c : nonzero_) row[c] -= factor * prow[c];
      row[pc] = 0.0;
    }
    const double dfactor = reduced_[pc];
    if (dfactor != 0.0) {
      for (const std::size_t c : nonzero_) reduced_[c] -= dfactor * prow[c];
      reduced_[pc] = 0.0;
    }
  }

  std::vector<double> extract_values() const {
    std::vector<double> col_value(cols_, 0.0);
    for (std::size_t c = 0; c < cols_; ++c) {
      if (status_[c] == ColStatus::AtUpper) col_value[c] = upper_[c];
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      double v = x_basic_[r];
      const std::size_t c = basis_[r];
      v = std::max(0.0, v);
      if (std::isfinite(upper_[c])) v = std::min(v, upper_[c]);
      col_value[c] = v;
    }
    std::vector<double> values(mapping_.size());
    for (std::size_t j = 0; j < mapping_.size(); ++j) {
      const auto& mp = mapping_[j];
      switch (mp.map) {
        case ColumnMap::Shift: values[j] = mp.offset + col_value[mp.column]; break;
        case ColumnMap::Negate: values[j] = mp.offset - col_value[mp.column]; break;
        case ColumnMap::Split:
          values[j] = col_value[mp.column] - col_value[mp.column + 1];
          break;
      }
    }
    return values;
  }

  const Model& model_;
  const LpOptions& options_;
  std::vector<VarMapping> mapping_;
  std::vector<double> col_upper_init_;
  std::vector<double> col_cost_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t first_slack_ = 0;
  std::size_t first_artificial_ = 0;
  std::size_t num_artificial_ = 0;
  std::vector<double> tableau_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> reduced_;
  std::vector<ColStatus> status_;
  std::vector<std::size_t> basis_;
  std::vector<double> x_basic_;
  std::vector<std::size_t> nonzero_;
  std::vector<double> ratio_;
  std::vector<bool> upper_side_;
  std::vector<std::vector<std::pair<std::size_t, double>>> original_;
  std::vector<double> rhs_;
  bool phase_one_ = false;
  std::size_t since_refactor_ = 0;
  std::size_t iterations_ = 0;
  std::size_t max_iterations_ = 0;
  bool infeasible_bounds_ = false;
  bool too_large_ = false;
};

}  // namespace

LpResult solve_lp_relaxation(const Model& model, std::span<const double> lower,
                             std::span<const double> upper, const LpOptions& options) {
  if (lower.size() != model.num_variables() || upper.size() != model.num_variables()) {
    throw Error(ErrorCode::DimensionMismatch, "bound vectors do not match the model");
  }
  Tableau tableau(model, lower, upper, options);
  return tableau.solve();
}

Solution solve_lp_simplex(const Model& model, const SolverConfig& config) {
  config.validate();
  std::vector<double> lower;
  std::vector<double> upper;
  lower.reserve(model.num_variables());
  upper.reserve(model.num_variables());
  for (const auto& v : model.variables()) {
    lower.push_back(v.lower);
    upper.push_back(v.upper);
  }
  LpOptions options;
  options.max_tableau_entries = config.max_tableau_entries;
  if (std::isfinite(config.time_limit_seconds)) {
    options.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                          std::chrono::duration<double>(config.time_limit_seconds));
  }
  const LpResult lp = solve_lp_relaxation(model, lower, upper, options);
  Solution solution;
  solution.status = lp.status;
  solution.lp_iterations = lp.iterations;
  if (lp.status == SolveStatus::Optimal) {
    solution.values = lp.values;
    solution.objective = lp.objective;
    solution.best_bound = lp.objective;
  }
  return solution;
}

}  // namespace odtmip::milp
