#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <limits>
#include <random>

#include "cdsndp/lp_solver.hpp"
#include "doctest.h"

using namespace cdsndp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DenseLp {
  Eigen::MatrixXd a;
  std::vector<double> c, cl, cu, rl, ru;
};

LpProblem to_problem(const DenseLp& d) {
  LpProblem p;
  p.a = d.a.sparseView();
  p.cost = d.c;
  p.col_lo = d.cl;
  p.col_hi = d.cu;
  p.row_lo = d.rl;
  p.row_hi = d.ru;
  return p;
}

// Brute force: every vertex is the solution of n tight constraints chosen among bounds and rows.
std::optional<double> enumerate_vertices(const DenseLp& d) {
  const int n = static_cast<int>(d.c.size());
  const int m = static_cast<int>(d.a.rows());
  struct Face {
    Eigen::RowVectorXd a;
    double b;
  };
  std::vector<Face> faces;
  for (int j = 0; j < n; ++j) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e[j] = 1;
    if (std::isfinite(d.cl[j])) faces.push_back({e, d.cl[j]});
    if (std::isfinite(d.cu[j])) faces.push_back({e, d.cu[j]});
  }
  for (int i = 0; i < m; ++i) {
    if (std::isfinite(d.rl[i])) faces.push_back({d.a.row(i), d.rl[i]});
    if (std::isfinite(d.ru[i])) faces.push_back({d.a.row(i), d.ru[i]});
  }
  const int f = static_cast<int>(faces.size());
  std::optional<double> best;
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int k, int start) {
    if (k == n) {
      Eigen::MatrixXd mat(n, n);
      Eigen::VectorXd rhs(n);
      for (int t = 0; t < n; ++t) {
        mat.row(t) = faces[pick[t]].a;
        rhs[t] = faces[pick[t]].b;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
      if (lu.rank() < n) return;
      Eigen::VectorXd x = lu.solve(rhs);
      for (int j = 0; j < n; ++j)
        if (x[j] < d.cl[j] - 1e-7 || x[j] > d.cu[j] + 1e-7) return;
      Eigen::VectorXd act = d.a * x;
      for (int i = 0; i < m; ++i)
        if (act[i] < d.rl[i] - 1e-7 || act[i] > d.ru[i] + 1e-7) return;
      double obj = 0;
      for (int j = 0; j < n; ++j) obj += d.c[j] * x[j];
      if (!best || obj < *best) best = obj;
      return;
    }
    for (int s = start; s < f; ++s) {
      pick[k] = s;
      rec(k + 1, s + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("dual simplex solves a textbook LP") {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3  -> (3, 1), value 11
  DenseLp d;
  d.a = Eigen::MatrixXd{{1, 1}, {1, 3}};
  d.c = {-3, -2};
  d.cl = {0, 0};
  d.cu = {3, kInf};
  d.rl = {-kInf, -kInf};
  d.ru = {4, 6};
  DualSimplex lp(to_problem(d));
  auto r = lp.solve();
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-11));
  CHECK(r.x[0] == doctest::Approx(3));
  CHECK(r.x[1] == doctest::Approx(1));
}

TEST_CASE("dual simplex detects infeasibility") {
  DenseLp d;
  d.a = Eigen::MatrixXd{{1, 1}, {1, 1}};
  d.c = {1, 1};
  d.cl = {0, 0};
  d.cu = {10, 10};
  d.rl = {5, -kInf};
  d.ru = {kInf, 3};
  DualSimplex lp(to_problem(d));
  CHECK(lp.solve().status == LpStatus::Infeasible);
}

TEST_CASE("dual simplex reports an unbounded ray") {
  DenseLp d;
  d.a = Eigen::MatrixXd{{1, -1}};
  d.c = {-1, 0};
  d.cl = {0, 0};
  d.cu = {kInf, kInf};
  d.rl = {-kInf};
  d.ru = {1};
  DualSimplex lp(to_problem(d));
  CHECK(lp.solve().status == LpStatus::Unbounded);
}

TEST_CASE("equality rows and fixed columns") {
  DenseLp d;
  d.a = Eigen::MatrixXd{{1, 1, 1}, {1, -1, 0}};
  d.c = {1, 2, 3};
  d.cl = {0, 0, 1};
  d.cu = {5, 5, 1};
  d.rl = {4, 0};
  d.ru = {4, 0};
  DualSimplex lp(to_problem(d));
  auto r = lp.solve();
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.5 + 3 + 3));
}

TEST_CASE("random LPs match vertex enumeration, cold and warm") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_int_distribution<int> bnd(0, 6);
  int solved = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 3;
    const int m = 1 + trial % 4;
    DenseLp d;
    d.a = Eigen::MatrixXd(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) d.a(i, j) = coef(rng);
    for (int j = 0; j < n; ++j) {
      d.c.push_back(coef(rng));
      d.cl.push_back(-bnd(rng));
      d.cu.push_back(bnd(rng));
    }
    for (int i = 0; i < m; ++i) {
      const int kind = trial * 7 % 3 == 0 ? (i % 3) : bnd(rng) % 3;
      const double v = coef(rng) * 2;
      d.rl.push_back(kind == 1 ? -kInf : v);
      d.ru.push_back(kind == 0 ? kInf : v + (kind == 2 ? bnd(rng) : 0));
    }
    DualSimplex lp(to_problem(d));
    auto r = lp.solve();
    auto ref = enumerate_vertices(d);
    if (!ref) {
      CHECK(r.status == LpStatus::Infeasible);
      ++infeasible;
      continue;
    }
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(*ref).epsilon(1e-7));
    ++solved;

    // Tighten one column and re-solve from the previous basis.
    auto lo = d.cl, hi = d.cu;
    const int j = trial % n;
    hi[j] = std::floor((lo[j] + hi[j]) / 2);
    auto r2 = lp.solve(lo, hi, &r.basis);
    DenseLp d2 = d;
    d2.cu = hi;
    auto ref2 = enumerate_vertices(d2);
    if (!ref2) {
      CHECK(r2.status == LpStatus::Infeasible);
    } else {
      REQUIRE(r2.status == LpStatus::Optimal);
      CHECK(r2.objective == doctest::Approx(*ref2).epsilon(1e-7));
    }
  }
  CHECK(solved > 50);
  CHECK(infeasible > 5);
}

TEST_CASE("larger sparse transport problem stays consistent") {
  // Supply/demand transport: min sum c_ij x_ij, rows sum_j x_ij <= s_i, sum_i x_ij = t_j.
  const int S = 30, T = 40;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  std::vector<Eigen::Triplet<double>> trip;
  LpProblem p;
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < T; ++j) {
      const int col = i * T + j;
      trip.emplace_back(i, col, 1.0);
      trip.emplace_back(S + j, col, 1.0);
      p.cost.push_back(u(rng));
      p.col_lo.push_back(0);
      p.col_hi.push_back(kInf);
    }
  p.a.resize(S + T, S * T);
  p.a.setFromTriplets(trip.begin(), trip.end());
  double total = 0;
  for (int j = 0; j < T; ++j) {
    const double t = std::floor(u(rng) * 3);
    total += t;
    p.row_lo.push_back(0);
    p.row_hi.push_back(0);
    p.row_lo.back() = t;
    p.row_hi.back() = t;
  }
  std::vector<double> rl, ru;
  for (int i = 0; i < S; ++i) {
    rl.push_back(-kInf);
    ru.push_back(total / S * 1.5);
  }
  p.row_lo.insert(p.row_lo.begin(), rl.begin(), rl.end());
  p.row_hi.insert(p.row_hi.begin(), ru.begin(), ru.end());
  DualSimplex lp(p);
  auto r = lp.solve();
  REQUIRE(r.status == LpStatus::Optimal);
  // Primal feasibility of the reported point.
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(r.x.data(), S * T);
  Eigen::VectorXd act = p.a * x;
  for (int i = 0; i < S + T; ++i) {
    CHECK(act[i] >= p.row_lo[i] - 1e-6);
    CHECK(act[i] <= p.row_hi[i] + 1e-6);
  }
  for (double v : r.x) CHECK(v >= -1e-7);
  // Dual feasibility: nonbasic reduced costs have the right sign.
  for (int j = 0; j < S * T; ++j) {
    if (r.basis.status[j] == BasisStatus::AtLower) CHECK(r.reduced_cost[j] >= -1e-6);
  }
}
