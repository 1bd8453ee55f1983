#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>

#include "odtmip/milp/model.hpp"

namespace odtmip::milp {

/// A MILP solver behind the Solution contract of solve_bnb.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual Solution solve(const Model& model, const SolverConfig& config,
                         std::span<const double> warm_start) const = 0;
};

/// Branch-and-bound from bnb.hpp.
class BuiltinBackend final : public Backend {
 public:
  std::string name() const override { return "builtin"; }
  Solution solve(const Model& model, const SolverConfig& config,
                 std::span<const double> warm_start) const override;
};

/// Runs tools/milp_backend.py in a child process; the script drives HiGHS
/// (highspy if installed, scipy.optimize.milp otherwise). The model and the
/// solution travel through JSON files in the temporary directory.
class ExternalBackend final : public Backend {
 public:
  ExternalBackend(std::string python, std::string script);

  std::string name() const override { return "external"; }
  Solution solve(const Model& model, const SolverConfig& config,
                 std::span<const double> warm_start) const override;

  /// Script path from $ODTMIP_BACKEND_SCRIPT, falling back to the copy in
  /// the source tree.
  static std::string default_script();
  /// True when the interpreter can import the solver used by the script.
  bool probe() const;

  const std::string& engine() const { return engine_; }

 private:
  std::string python_;
  std::string script_;
  mutable std::string engine_;
};

class BackendRegistry {
 public:
  void add(std::shared_ptr<const Backend> backend);
  void remove(const std::string& name);
  /// Throws ErrorCode::BackendUnavailable for unknown names.
  std::shared_ptr<const Backend> get(const std::string& name) const;
  bool contains(const std::string& name) const;

  /// Process-wide registry holding "builtin", plus "external" when its
  /// probe succeeds.
  static BackendRegistry& global();

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Backend>> backends_;
};

/// Solves through a registered backend. The answer is checked against the
/// model (integers snapped, feasibility within 1e-6) and never worse than
/// a supplied warm start.
Solution backend_solve(const Model& model, const SolverConfig& config,
                       std::span<const double> warm_start, const std::string& backend_name,
                       const BackendRegistry& registry = BackendRegistry::global());

}  // namespace odtmip::milp
