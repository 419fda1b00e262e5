#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <queue>

#include "cdsndp/backend.hpp"
#include "cdsndp/error.hpp"
#include "cdsndp/lp_solver.hpp"

namespace cdsndp {

std::string to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::Optimal:
      return "optimal";
    case MilpStatus::Infeasible:
      return "infeasible";
    case MilpStatus::TimeLimit:
      return "time_limit";
    case MilpStatus::TimeLimitNoSolution:
      return "time_limit_no_solution";
    case MilpStatus::Unbounded:
      return "unbounded";
    case MilpStatus::Error:
      return "error";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIntTol = 1e-6;

struct BoundChange {
  int var;
  double lo, hi;
};

struct Node {
  double bound = -kInf;  // parent LP value (internal minimization)
  std::vector<BoundChange> changes;
  std::shared_ptr<const LpBasis> basis;
  int depth = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.depth < b.depth;
  }
};

LpProblem relaxation(const MilpModel& model, double sgn) {
  LpProblem p;
  const auto& vars = model.variables();
  const auto& cons = model.constraints();
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < cons.size(); ++i) {
    for (const auto& t : cons[i].terms) trip.emplace_back(static_cast<int>(i), t.var, t.coef);
    switch (cons[i].sense) {
      case Sense::LessEqual:
        p.row_lo.push_back(-kInf);
        p.row_hi.push_back(cons[i].rhs);
        break;
      case Sense::GreaterEqual:
        p.row_lo.push_back(cons[i].rhs);
        p.row_hi.push_back(kInf);
        break;
      case Sense::Equal:
        p.row_lo.push_back(cons[i].rhs);
        p.row_hi.push_back(cons[i].rhs);
        break;
    }
  }
  p.a.resize(static_cast<Eigen::Index>(cons.size()), static_cast<Eigen::Index>(vars.size()));
  p.a.setFromTriplets(trip.begin(), trip.end());  // duplicates are summed
  for (std::size_t j = 0; j < vars.size(); ++j) {
    double lo = vars[j].lower, hi = vars[j].upper;
    if (vars[j].is_integral()) {
      lo = std::ceil(lo - kIntTol);
      hi = std::floor(hi + kIntTol);
    }
    p.col_lo.push_back(lo);
    p.col_hi.push_back(hi);
    p.cost.push_back(sgn * model.objective()[j]);
  }
  return p;
}

}  // namespace

MilpResult BranchAndBound::solve(const MilpModel& model, const SolveLimits& limits) {
  model.check();
  const auto t0 = Clock::now();
  const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(limits.time_limit));
  const double sgn = model.sense() == ObjectiveSense::Maximize ? -1.0 : 1.0;
  const auto& vars = model.variables();
  const std::size_t n = vars.size();

  LpOptions opts;
  opts.deadline = deadline;
  DualSimplex lp(relaxation(model, sgn), opts);
  const std::vector<double> root_lo = lp.problem().col_lo;
  const std::vector<double> root_hi = lp.problem().col_hi;

  MilpResult out;
  out.backend = name();

  double inc = kInf;  // internal (minimization, offset excluded)
  std::vector<double> inc_x;
  auto try_incumbent = [&](const std::vector<double>& x) {
    if (model.max_violation(x) > 1e-6) return false;
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += lp.problem().cost[j] * x[j];
    if (v < inc) {
      inc = v;
      inc_x = x;
      if (limits.verbose) std::fprintf(stderr, "[bb] incumbent %.10g\n", sgn * inc + model.objective_offset());
      return true;
    }
    return false;
  };
  auto cutoff = [&]() {
    return inc - limits.gap_tol * std::max(1.0, std::abs(sgn * inc + model.objective_offset()));
  };

  if (model.start()) {
    std::vector<double> s = *model.start();
    if (s.size() == n) {
      for (std::size_t j = 0; j < n; ++j)
        if (vars[j].is_integral()) s[j] = std::round(s[j]);
      try_incumbent(s);
    }
  }

  // Fixes every integral column at its rounded value and solves for the continuous ones.
  auto fix_and_solve = [&](const std::vector<double>& x, std::vector<double> lo, std::vector<double> hi,
                           const LpBasis* basis) -> std::optional<std::vector<double>> {
    for (std::size_t j = 0; j < n; ++j) {
      if (!vars[j].is_integral()) continue;
      const double v = std::clamp(std::round(x[j]), lo[j], hi[j]);
      lo[j] = hi[j] = v;
    }
    auto r = lp.solve(lo, hi, basis);
    if (r.status != LpStatus::Optimal) return std::nullopt;
    for (std::size_t j = 0; j < n; ++j)
      if (vars[j].is_integral()) r.x[j] = lo[j];
    return r.x;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push(Node{});
  std::optional<Node> dive;
  double unresolved_bound = kInf;  // bounds of nodes dropped for numerical reasons
  bool timed_out = false;
  long nodes = 0;

  while (dive || !open.empty()) {
    Node node;
    if (dive) {
      node = std::move(*dive);
      dive.reset();
    } else {
      node = open.top();
      open.pop();
    }
    if (node.bound >= cutoff()) continue;
    if (Clock::now() > deadline || (limits.node_limit >= 0 && nodes >= limits.node_limit)) {
      open.push(std::move(node));
      timed_out = true;
      break;
    }

    std::vector<double> lo = root_lo, hi = root_hi;
    for (const auto& c : node.changes) {
      lo[c.var] = c.lo;
      hi[c.var] = c.hi;
    }
    auto res = lp.solve(lo, hi, node.basis.get());
    if (res.status == LpStatus::NumericalError || res.status == LpStatus::IterationLimit)
      res = lp.solve(lo, hi, nullptr);
    ++nodes;
    if (res.status == LpStatus::TimeLimit) {
      open.push(std::move(node));
      timed_out = true;
      break;
    }
    if (res.status == LpStatus::Infeasible) continue;
    if (res.status == LpStatus::Unbounded) {
      if (node.depth == 0) {
        out.status = MilpStatus::Unbounded;
        out.message = "LP relaxation is unbounded";
        out.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
        return out;
      }
      unresolved_bound = std::min(unresolved_bound, node.bound);
      continue;
    }
    if (res.status != LpStatus::Optimal) {
      unresolved_bound = std::min(unresolved_bound, node.bound);
      continue;
    }
    const double z = res.objective;
    if (z >= cutoff()) continue;

    int branch = -1;
    int best_prio = std::numeric_limits<int>::min();
    double best_frac = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!vars[j].is_integral()) continue;
      const double f = res.x[j] - std::floor(res.x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist <= kIntTol) continue;
      if (vars[j].branch_priority > best_prio || (vars[j].branch_priority == best_prio && dist > best_frac)) {
        best_prio = vars[j].branch_priority;
        best_frac = dist;
        branch = static_cast<int>(j);
      }
    }
    auto basis = std::make_shared<const LpBasis>(std::move(res.basis));

    if (branch < 0) {
      if (auto polished = fix_and_solve(res.x, lo, hi, basis.get())) {
        try_incumbent(*polished);
      } else {
        std::vector<double> x = res.x;
        for (std::size_t j = 0; j < n; ++j)
          if (vars[j].is_integral()) x[j] = std::round(x[j]);
        try_incumbent(x);
      }
      continue;
    }

    // Rounding heuristic at the root and periodically afterwards.
    if (nodes == 1 || nodes % 100 == 0) {
      if (auto x = fix_and_solve(res.x, lo, hi, basis.get())) try_incumbent(*x);
    }

    const double v = res.x[static_cast<std::size_t>(branch)];
    Node down, up;
    down.bound = up.bound = z;
    down.depth = up.depth = node.depth + 1;
    down.basis = up.basis = basis;
    down.changes = node.changes;
    down.changes.push_back({branch, lo[branch], std::floor(v)});
    up.changes = std::move(node.changes);
    up.changes.push_back({branch, std::ceil(v), hi[branch]});
    if (v - std::floor(v) >= 0.5) {
      dive = std::move(up);
      open.push(std::move(down));
    } else {
      dive = std::move(down);
      open.push(std::move(up));
    }
    if (limits.verbose && nodes % 1000 == 0)
      std::fprintf(stderr, "[bb] nodes %ld open %zu bound %.10g incumbent %.10g\n", nodes, open.size(),
                   sgn * (open.empty() ? z : std::min(z, open.top().bound)), sgn * inc);
  }

  double bound = inc;
  if (dive) bound = std::min(bound, dive->bound);
  if (!open.empty()) bound = std::min(bound, open.top().bound);
  bound = std::min(bound, unresolved_bound);

  out.nodes = nodes;
  out.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  const double offset = model.objective_offset();
  if (inc_x.empty()) {
    out.status = timed_out ? MilpStatus::TimeLimitNoSolution : MilpStatus::Infeasible;
    out.best_bound = std::isfinite(bound) ? sgn * bound + offset : sgn * -kInf;
    if (unresolved_bound < kInf && !timed_out) {
      out.status = MilpStatus::Error;
      out.message = "nodes were dropped after LP failures";
    }
    return out;
  }
  out.values = inc_x;
  out.objective = model.evaluate(inc_x);
  out.best_bound = std::isfinite(bound) ? sgn * bound + offset : sgn * -kInf;
  out.gap = std::abs(out.objective - out.best_bound) / std::max(1.0, std::abs(out.objective));
  if (!std::isfinite(bound)) out.gap = kInf;
  out.status = timed_out ? MilpStatus::TimeLimit : MilpStatus::Optimal;
  if (unresolved_bound < inc && !timed_out) out.message = "some nodes were dropped after LP failures";
  return out;
}

}  // namespace cdsndp
