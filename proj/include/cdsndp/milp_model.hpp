/**
 * @file milp_model.hpp
 * @brief Solver-agnostic mixed-integer linear model.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cdsndp {

enum class VarKind { Continuous, Integer, Binary };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  VarKind kind = VarKind::Continuous;
  /// Higher values are branched on first by the built-in branch-and-bound.
  int branch_priority = 0;

  bool is_integral() const { return kind != VarKind::Continuous; }
};

enum class Sense { LessEqual, GreaterEqual, Equal };

struct LinearTerm {
  int var = -1;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<LinearTerm> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

enum class ObjectiveSense { Maximize, Minimize };

class MilpModel {
 public:
  int add_variable(std::string name, double lower, double upper, VarKind kind, int branch_priority = 0);
  int add_constraint(std::string name, std::vector<LinearTerm> terms, Sense sense, double rhs);
  void add_objective(int var, double coef);

  void set_sense(ObjectiveSense sense) { sense_ = sense; }
  ObjectiveSense sense() const { return sense_; }
  void set_objective_offset(double offset) { offset_ = offset; }
  double objective_offset() const { return offset_; }

  const std::vector<Variable>& variables() const { return vars_; }
  std::vector<Variable>& variables() { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  const std::vector<double>& objective() const { return obj_; }

  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return cons_.size(); }
  std::size_t num_integral() const;

  /// Objective value (including offset) of a full assignment.
  double evaluate(const std::vector<double>& values) const;
  /// Largest bound, constraint or integrality violation of an assignment.
  double max_violation(const std::vector<double>& values) const;

  /// Optional feasible starting point handed to backends that accept one.
  void set_start(std::vector<double> values) { start_ = std::move(values); }
  const std::optional<std::vector<double>>& start() const { return start_; }

  /// Throws ModelError if a term references an undeclared variable or a bound is inverted.
  void check() const;

  /// CPLEX-LP text rendering (names sanitized, one constraint per line).
  std::string to_lp_format() const;
  /// Column names as written by to_lp_format(), in variable order.
  std::vector<std::string> lp_column_names() const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  std::vector<double> obj_;
  double offset_ = 0.0;
  ObjectiveSense sense_ = ObjectiveSense::Maximize;
  std::optional<std::vector<double>> start_;
};

}  // namespace cdsndp
