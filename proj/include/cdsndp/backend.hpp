/**
 * @file backend.hpp
 * @brief MILP backends: the built-in branch-and-bound and an adapter for an
 * external HiGHS command-line solver.
 */
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cdsndp/milp_model.hpp"

namespace cdsndp {

enum class MilpStatus { Optimal, Infeasible, TimeLimit, TimeLimitNoSolution, Unbounded, Error };

std::string to_string(MilpStatus status);

struct SolveLimits {
  double time_limit = 3600.0;  ///< seconds
  double gap_tol = 1e-6;       ///< relative, (|incumbent - bound|) / max(1, |incumbent|)
  long node_limit = -1;        ///< negative means unlimited
  bool verbose = false;
};

struct MilpResult {
  MilpStatus status = MilpStatus::Error;
  std::vector<double> values;  ///< empty when no feasible point is known
  double objective = 0.0;      ///< in the model's sense, offset included
  double best_bound = 0.0;     ///< same units as objective
  double gap = 0.0;
  double wall_time = 0.0;
  long nodes = 0;
  std::string backend;
  std::string message;

  bool has_solution() const { return !values.empty(); }
};

class MilpBackend {
 public:
  virtual ~MilpBackend() = default;
  virtual std::string name() const = 0;
  virtual MilpResult solve(const MilpModel& model, const SolveLimits& limits) = 0;
};

/// LP-based best-first branch-and-bound on the built-in dual simplex.
class BranchAndBound : public MilpBackend {
 public:
  std::string name() const override { return "builtin"; }
  MilpResult solve(const MilpModel& model, const SolveLimits& limits) override;
};

/// Writes the model as an LP file and calls a HiGHS-compatible executable.
class HighsCliBackend : public MilpBackend {
 public:
  /// `command` defaults to $CDSNDP_HIGHS, then "highs" on PATH.
  explicit HighsCliBackend(std::string command = "");
  std::string name() const override { return "highs"; }
  MilpResult solve(const MilpModel& model, const SolveLimits& limits) override;
  const std::string& command() const { return command_; }
  /// True when the command can be started.
  bool available() const;

 private:
  std::string command_;
};

/// "builtin" or "highs". Throws InputError for unknown names.
std::unique_ptr<MilpBackend> make_backend(const std::string& name);

}  // namespace cdsndp
