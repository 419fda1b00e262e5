#include "cdsndp/lp_solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "cdsndp/error.hpp"

namespace cdsndp {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::IterationLimit:
      return "iteration_limit";
    case LpStatus::TimeLimit:
      return "time_limit";
    case LpStatus::NumericalError:
      return "numerical_error";
  }
  return "?";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Deterministic pseudo-random magnitude in [0.5, 1) * scale.
double perturbation(int j, double c) {
  std::uint64_t h = static_cast<std::uint64_t>(j + 1) * 0x9E3779B97F4A7C15ull;
  h ^= h >> 31;
  h *= 0xBF58476D1CE4E5B9ull;
  h ^= h >> 27;
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return (0.5 + 0.5 * u) * 1e-7 * (1.0 + std::abs(c));
}

}  // namespace

struct DualSimplex::Impl {
  const LpProblem& p;
  const LpOptions& o;
  int m = 0, n = 0, N = 0;
  std::vector<double> lo, hi, c, x, d, w;
  std::vector<bool> boxed_artificially;
  std::vector<BasisStatus> st;
  std::vector<int> head;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;

  struct Eta {
    int r = 0;
    double diag = 1.0;
    std::vector<int> idx;
    std::vector<double> val;
  };
  std::vector<Eta> etas;
  long iters = 0;
  int recoveries = 0;

  Impl(const LpProblem& prob, const LpOptions& opt) : p(prob), o(opt) {
    m = p.num_rows();
    n = p.num_cols();
    N = n + m;
  }

  void add_col(int j, double s, Vec& v) const {
    if (j < n) {
      for (SpMat::InnerIterator it(p.a, j); it; ++it) v[it.row()] += s * it.value();
    } else {
      v[j - n] -= s;
    }
  }

  double dot_col(int j, const Vec& y) const {
    if (j >= n) return -y[j - n];
    double s = 0.0;
    for (SpMat::InnerIterator it(p.a, j); it; ++it) s += it.value() * y[it.row()];
    return s;
  }

  bool factor() {
    etas.clear();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(m) * 2);
    for (int r = 0; r < m; ++r) {
      const int j = head[r];
      if (j < n) {
        for (SpMat::InnerIterator it(p.a, j); it; ++it) t.emplace_back(static_cast<int>(it.row()), r, it.value());
      } else {
        t.emplace_back(j - n, r, -1.0);
      }
    }
    SpMat b(m, m);
    b.setFromTriplets(t.begin(), t.end());
    b.makeCompressed();
    lu.compute(b);
    return lu.info() == Eigen::Success;
  }

  void ftran(Vec& v) const {
    Vec s = lu.solve(v);
    v.swap(s);
    for (const auto& e : etas) {
      const double vr = v[e.r];
      if (vr == 0.0) continue;
      v[e.r] = vr * e.diag;
      for (std::size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] += e.val[k] * vr;
    }
  }

  void btran(Vec& v) {
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double s = v[it->r] * it->diag;
      for (std::size_t k = 0; k < it->idx.size(); ++k) s += it->val[k] * v[it->idx[k]];
      v[it->r] = s;
    }
    Vec s = lu.transpose().solve(v);
    v.swap(s);
  }

  void slack_basis() {
    head.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < n; ++j)
      if (st[j] == BasisStatus::Basic) st[j] = BasisStatus::AtLower;
    for (int i = 0; i < m; ++i) {
      st[n + i] = BasisStatus::Basic;
      head[i] = n + i;
    }
  }

  void compute_primal() {
    for (int j = 0; j < N; ++j) {
      if (st[j] == BasisStatus::AtLower) x[j] = lo[j];
      if (st[j] == BasisStatus::AtUpper) x[j] = hi[j];
    }
    Vec rhs = Vec::Zero(m);
    for (int j = 0; j < N; ++j)
      if (st[j] != BasisStatus::Basic && x[j] != 0.0) add_col(j, -x[j], rhs);
    ftran(rhs);
    for (int i = 0; i < m; ++i) x[head[i]] = rhs[i];
  }

  void compute_dual() {
    Vec y(m);
    for (int i = 0; i < m; ++i) y[i] = c[head[i]];
    btran(y);
    for (int j = 0; j < N; ++j) d[j] = st[j] == BasisStatus::Basic ? 0.0 : c[j] - dot_col(j, y);
  }

  // Puts every nonbasic at the bound its reduced cost asks for; returns whether anything moved.
  bool fix_statuses() {
    bool changed = false;
    for (int j = 0; j < N; ++j) {
      if (st[j] == BasisStatus::Basic) continue;
      BasisStatus want = st[j];
      if (lo[j] == hi[j]) {
        want = BasisStatus::AtLower;
      } else if (d[j] < -o.dual_tol) {
        want = BasisStatus::AtUpper;
      } else if (d[j] > o.dual_tol) {
        want = BasisStatus::AtLower;
      }
      if (want != st[j]) {
        st[j] = want;
        changed = true;
      }
    }
    return changed;
  }

  // Rebuilds the factorization and all iterates; falls back to the slack basis if B is singular.
  bool refresh() {
    if (!factor()) {
      if (++recoveries > 5) return false;
      slack_basis();
      if (!factor()) return false;
      w.assign(static_cast<std::size_t>(m), 1.0);
    }
    compute_dual();
    fix_statuses();
    compute_primal();
    return true;
  }

  LpResult run(const std::vector<double>& col_lo, const std::vector<double>& col_hi, const LpBasis* warm) {
    LpResult res;
    lo.assign(static_cast<std::size_t>(N), 0.0);
    hi.assign(static_cast<std::size_t>(N), 0.0);
    boxed_artificially.assign(static_cast<std::size_t>(n), false);
    for (int j = 0; j < n; ++j) {
      lo[j] = col_lo[j];
      hi[j] = col_hi[j];
      if (lo[j] > hi[j] + o.primal_tol) {
        res.status = LpStatus::Infeasible;
        return res;
      }
      if (lo[j] > hi[j]) lo[j] = hi[j];
      if (std::isinf(lo[j])) {
        lo[j] = std::isinf(hi[j]) ? -o.infinite_box : std::min(hi[j], 0.0) - o.infinite_box;
        boxed_artificially[j] = true;
      }
      if (std::isinf(hi[j])) {
        hi[j] = std::max(lo[j], 0.0) + o.infinite_box;
        boxed_artificially[j] = true;
      }
    }
    // Logicals with an open side get a bound just beyond the implied activity range.
    std::vector<double> amin(static_cast<std::size_t>(m), 0.0), amax(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < n; ++j) {
      for (SpMat::InnerIterator it(p.a, j); it; ++it) {
        const double a = it.value();
        amin[it.row()] += a > 0 ? a * lo[j] : a * hi[j];
        amax[it.row()] += a > 0 ? a * hi[j] : a * lo[j];
      }
    }
    for (int i = 0; i < m; ++i) {
      double l = p.row_lo[i], u = p.row_hi[i];
      if (l > u + o.primal_tol) {
        res.status = LpStatus::Infeasible;
        return res;
      }
      if (std::isinf(l)) l = std::min(amin[i], u) - 1.0 - 1e-6 * std::abs(amin[i]);
      if (std::isinf(u)) u = std::max(amax[i], l) + 1.0 + 1e-6 * std::abs(amax[i]);
      lo[n + i] = l;
      hi[n + i] = std::max(l, u);
    }

    c.assign(static_cast<std::size_t>(N), 0.0);
    for (int j = 0; j < n; ++j) c[j] = p.cost[j];
    x.assign(static_cast<std::size_t>(N), 0.0);
    d.assign(static_cast<std::size_t>(N), 0.0);
    w.assign(static_cast<std::size_t>(m), 1.0);
    st.assign(static_cast<std::size_t>(N), BasisStatus::AtLower);
    head.clear();

    bool warm_ok = false;
    if (warm && warm->status.size() == static_cast<std::size_t>(N)) {
      st = warm->status;
      for (int j = 0; j < N; ++j)
        if (st[j] == BasisStatus::Basic) head.push_back(j);
      warm_ok = static_cast<int>(head.size()) == m;
    }
    if (!warm_ok) {
      st.assign(static_cast<std::size_t>(N), BasisStatus::AtLower);
      slack_basis();
    }

    if (m == 0) {
      for (int j = 0; j < n; ++j) x[j] = c[j] >= 0 ? lo[j] : hi[j];
      return finish(LpStatus::Optimal);
    }

    bool perturbed = o.perturb;
    if (perturbed)
      for (int j = 0; j < n; ++j) c[j] += (st[j] == BasisStatus::AtUpper ? -1.0 : 1.0) * perturbation(j, c[j]);
    if (!refresh()) return finish(LpStatus::NumericalError);

    std::vector<double> arow(static_cast<std::size_t>(N), 0.0);
    std::vector<int> cand;
    bool retried = false;
    int bad_pivots = 0;

    while (true) {
      if (++iters > o.iteration_limit) return finish(LpStatus::IterationLimit);
      if (o.deadline && (iters & 31) == 0 && std::chrono::steady_clock::now() > *o.deadline)
        return finish(LpStatus::TimeLimit);
      if (static_cast<int>(etas.size()) >= o.refactor_interval && !refresh()) return finish(LpStatus::NumericalError);

      // Leaving row: largest squared infeasibility relative to its dual steepest-edge weight.
      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        const int j = head[i];
        double inf = 0.0;
        if (x[j] < lo[j] - o.primal_tol) inf = lo[j] - x[j];
        else if (x[j] > hi[j] + o.primal_tol) inf = x[j] - hi[j];
        if (inf > 0.0 && inf * inf > best * w[i]) {
          best = inf * inf / w[i];
          r = i;
        }
      }
      if (r < 0) {
        if (perturbed) {
          perturbed = false;
          for (int j = 0; j < n; ++j) c[j] = p.cost[j];
          if (!refresh()) return finish(LpStatus::NumericalError);
          continue;
        }
        return finish(LpStatus::Optimal);
      }

      const int leave = head[r];
      const double sigma = x[leave] < lo[leave] ? 1.0 : -1.0;
      Vec rho = Vec::Zero(m);
      rho[r] = 1.0;
      btran(rho);

      // Harris two-pass ratio test.
      cand.clear();
      double tmax = kInf;
      for (int j = 0; j < N; ++j) {
        if (st[j] == BasisStatus::Basic) {
          arow[j] = 0.0;
          continue;
        }
        const double at = -sigma * dot_col(j, rho);
        arow[j] = at;
        if (lo[j] == hi[j]) continue;
        if (st[j] == BasisStatus::AtLower && at > o.pivot_tol) {
          tmax = std::min(tmax, (d[j] + o.dual_tol) / at);
          cand.push_back(j);
        } else if (st[j] == BasisStatus::AtUpper && at < -o.pivot_tol) {
          tmax = std::min(tmax, (d[j] - o.dual_tol) / at);
          cand.push_back(j);
        }
      }
      if (cand.empty()) {
        if (!retried && !etas.empty()) {
          retried = true;
          if (!refresh()) return finish(LpStatus::NumericalError);
          continue;
        }
        return finish(LpStatus::Infeasible);
      }
      retried = false;
      int q = -1;
      double qa = 0.0;
      for (int j : cand) {
        if (d[j] / arow[j] <= tmax && std::abs(arow[j]) > qa) {
          qa = std::abs(arow[j]);
          q = j;
        }
      }
      const double t = std::max(0.0, d[q] / arow[q]);

      Vec aq = Vec::Zero(m);
      add_col(q, 1.0, aq);
      ftran(aq);
      const double arq_row = -sigma * arow[q];
      const double arq = aq[r];
      if (std::abs(arq - arq_row) > 1e-7 * (1.0 + std::abs(arq_row)) || std::abs(arq) < o.pivot_tol) {
        if (++bad_pivots > 20) return finish(LpStatus::NumericalError);
        if (!etas.empty()) {
          if (!refresh()) return finish(LpStatus::NumericalError);
          continue;
        }
        if (std::abs(arq) < o.pivot_tol) return finish(LpStatus::NumericalError);
      }

      // Dual update.
      for (int j = 0; j < N; ++j)
        if (st[j] != BasisStatus::Basic) d[j] -= t * arow[j];
      d[q] = 0.0;
      d[leave] = sigma * t;

      // Bound flips keep the remaining nonbasics dual feasible.
      Vec delta = Vec::Zero(m);
      bool flipped = false;
      for (int j = 0; j < N; ++j) {
        if (j == q || st[j] == BasisStatus::Basic || lo[j] == hi[j]) continue;
        if (st[j] == BasisStatus::AtLower && d[j] < -o.dual_tol) {
          st[j] = BasisStatus::AtUpper;
          add_col(j, hi[j] - lo[j], delta);
          x[j] = hi[j];
          flipped = true;
        } else if (st[j] == BasisStatus::AtUpper && d[j] > o.dual_tol) {
          st[j] = BasisStatus::AtLower;
          add_col(j, lo[j] - hi[j], delta);
          x[j] = lo[j];
          flipped = true;
        }
      }
      if (flipped) {
        ftran(delta);
        for (int i = 0; i < m; ++i) x[head[i]] -= delta[i];
      }

      // Primal step.
      const double target = sigma > 0 ? lo[leave] : hi[leave];
      const double theta = (x[leave] - target) / arq;
      for (int i = 0; i < m; ++i) x[head[i]] -= theta * aq[i];
      x[q] += theta;
      x[leave] = target;

      // Dual steepest-edge weights.
      Vec tau = rho;
      const double wr = rho.squaredNorm();
      ftran(tau);
      for (int i = 0; i < m; ++i) {
        if (i == r || aq[i] == 0.0) continue;
        const double ratio = aq[i] / arq;
        w[i] = std::max(w[i] - 2.0 * ratio * tau[i] + ratio * ratio * wr, 1e-8);
      }
      w[r] = std::max(wr / (arq * arq), 1e-8);

      st[leave] = sigma > 0 ? BasisStatus::AtLower : BasisStatus::AtUpper;
      st[q] = BasisStatus::Basic;
      head[r] = q;
      Eta e;
      e.r = r;
      e.diag = 1.0 / arq;
      for (int i = 0; i < m; ++i) {
        if (i != r && std::abs(aq[i]) > 1e-14) {
          e.idx.push_back(i);
          e.val.push_back(-aq[i] / arq);
        }
      }
      etas.push_back(std::move(e));
    }
  }

  LpResult finish(LpStatus status) {
    LpResult res;
    res.status = status;
    res.iterations = iters;
    res.x.assign(x.begin(), x.begin() + n);
    res.reduced_cost.assign(d.begin(), d.begin() + n);
    res.basis.status = st;
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += p.cost[j] * x[j];
    res.objective = obj;
    if (status == LpStatus::Optimal) {
      for (int j = 0; j < n; ++j) {
        if (boxed_artificially[j] && std::abs(x[j]) >= 0.5 * o.infinite_box) {
          res.status = LpStatus::Unbounded;
          break;
        }
      }
    }
    return res;
  }
};

DualSimplex::DualSimplex(LpProblem problem, LpOptions options)
    : problem_(std::move(problem)), options_(options) {
  const auto n = static_cast<std::size_t>(problem_.num_cols());
  const auto m = static_cast<std::size_t>(problem_.num_rows());
  if (problem_.cost.size() != n || problem_.col_lo.size() != n || problem_.col_hi.size() != n ||
      problem_.row_lo.size() != m || problem_.row_hi.size() != m)
    throw SolverError("LP dimensions do not match the constraint matrix");
  problem_.a.makeCompressed();
}

DualSimplex::~DualSimplex() = default;

LpResult DualSimplex::solve(const LpBasis* warm) { return solve(problem_.col_lo, problem_.col_hi, warm); }

LpResult DualSimplex::solve(const std::vector<double>& col_lo, const std::vector<double>& col_hi, const LpBasis* warm) {
  if (col_lo.size() != problem_.cost.size() || col_hi.size() != problem_.cost.size())
    throw SolverError("bound vectors do not match the LP");
  impl_ = std::make_unique<Impl>(problem_, options_);
  return impl_->run(col_lo, col_hi, warm);
}

}  // namespace cdsndp
