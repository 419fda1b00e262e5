/**
 * @file lp_solver.hpp
 * @brief Bounded dual simplex used by the built-in branch-and-bound.
 *
 * Solves  min c'x  s.t.  row_lo <= A x <= row_hi,  col_lo <= x <= col_hi.
 * The constraint matrix is fixed at construction; column bounds and costs
 * are passed per solve so that branch-and-bound nodes can warm start from
 * their parent basis.
 */
#pragma once

#include <Eigen/SparseCore>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace cdsndp {

struct LpProblem {
  Eigen::SparseMatrix<double> a;  ///< rows x cols, column major
  std::vector<double> cost;
  std::vector<double> col_lo, col_hi;
  std::vector<double> row_lo, row_hi;

  int num_rows() const { return static_cast<int>(a.rows()); }
  int num_cols() const { return static_cast<int>(a.cols()); }
};

enum class BasisStatus : std::uint8_t { Basic, AtLower, AtUpper };

/// Status of every structural column followed by every row logical.
struct LpBasis {
  std::vector<BasisStatus> status;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, TimeLimit, NumericalError };

const char* to_string(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::NumericalError;
  double objective = 0.0;
  std::vector<double> x;             ///< structural values
  std::vector<double> reduced_cost;  ///< structural reduced costs
  LpBasis basis;
  long iterations = 0;
};

struct LpOptions {
  double primal_tol = 1e-7;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  /// Box applied to structurals with an infinite bound. A solution resting on it is reported unbounded.
  double infinite_box = 1e8;
  long iteration_limit = 1'000'000;
  int refactor_interval = 64;
  bool perturb = true;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

class DualSimplex {
 public:
  explicit DualSimplex(LpProblem problem, LpOptions options = {});
  ~DualSimplex();
  DualSimplex(const DualSimplex&) = delete;
  DualSimplex& operator=(const DualSimplex&) = delete;

  const LpProblem& problem() const { return problem_; }
  LpOptions& options() { return options_; }

  /// Solve with the problem's own column bounds.
  LpResult solve(const LpBasis* warm = nullptr);
  /// Solve with overridden column bounds (same size as the problem's).
  LpResult solve(const std::vector<double>& col_lo, const std::vector<double>& col_hi, const LpBasis* warm = nullptr);

 private:
  struct Impl;
  LpProblem problem_;
  LpOptions options_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cdsndp
