#include "cdsndp/reformulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdsndp/error.hpp"

namespace cdsndp {

namespace {

constexpr double kMargin = 1e-4;

int frequency_cap(const Instance& inst, std::size_t s, std::size_t k) {
  const int w = max_cycles(inst.services[s], k, inst.vehicle_types[k]);
  return std::min(inst.max_frequency, w * inst.vehicle_types[k].count);
}

int num_bits(long reach) {
  int b = 0;
  while ((1L << b) <= reach) ++b;
  return b;
}

const Instance& ensure_valid(const Instance& inst, Instance& storage) {
  if (inst.validated) return inst;
  storage = validate_instance(inst);
  return storage;
}

}  // namespace

BigMConfig compute_big_m(const Instance& inst, const UtilitySpec& spec, const Sample& sample) {
  Instance storage;
  const Instance& in = ensure_valid(inst, storage);
  spec.validate();
  UtilityEvaluator ev(in, spec, sample);
  const std::size_t A = in.num_arcs(), H = in.num_competitors(), R = sample.realizations;
  BigMConfig cfg;
  cfg.price_upper.assign(A, 0.0);
  cfg.freq_upper.assign(A, 0);
  cfg.per_arc.resize(A);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t s = 0; s < in.num_services(); ++s) {
      if (!in.incidence.covers(a, s)) continue;
      for (std::size_t k = 0; k < in.num_vehicle_types(); ++k) cfg.freq_upper[a] += frequency_cap(in, s, k);
    }
    cfg.price_upper[a] = in.price_cap[a];
    if (!(in.demand[a] > 0.0)) continue;

    const double fmax = cfg.freq_upper[a];
    double p_out = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < R; ++r) {
      const double bc = ev.price_coefficient(r);
      const double ub = ev.best_competitor(a, r).first;
      p_out = std::max(p_out, (ub - ev.operator_base(a, r) - spec.beta_f * fmax) / bc);
    }
    cfg.price_upper[a] = std::max(in.price_cap[a], p_out + 1.0);

    cfg.per_arc[a].resize(R);
    for (std::size_t r = 0; r < R; ++r) {
      ArcBigM& m = cfg.per_arc[a][r];
      const double base = ev.operator_base(a, r);
      const auto [ub, hb] = ev.best_competitor(a, r);
      m.u_best = ub;
      m.h_best = hb;
      m.u_op_hi = base + spec.beta_f * fmax;
      m.u_op_lo = base + ev.price_coefficient(r) * cfg.price_upper[a];
      const double top = std::max(m.u_op_hi, ub);
      m.lambda_lo = -top;
      m.lambda_hi = -std::max(m.u_op_lo, ub);
      m.m_i = top - m.u_op_lo + kMargin;
      m.m_ii = in.demand[a];
      m.m_ih.assign(H, 0.0);
      m.m_iih.assign(H, 0.0);
      for (std::size_t h = 0; h < H; ++h) {
        if (!in.competitors[h].available(a)) continue;
        m.m_ih[h] = top - ev.competitor_utility(a, h, r) + kMargin;
        m.m_iih[h] = in.demand[a];
      }
    }
  }
  return cfg;
}

namespace {

CdMilp build(const Instance& inst, const UtilitySpec& spec, const Sample& sample) {
  CdMilp out;
  out.instance = inst.validated ? inst : validate_instance(inst);
  out.spec = spec;
  out.sample = sample;
  const Instance& in = out.instance;
  spec.validate();
  if (sample.realizations == 0) throw InputError("empty sample");
  out.bigm = compute_big_m(in, spec, sample);
  UtilityEvaluator ev(in, out.spec, out.sample);

  const std::size_t S = in.num_services(), K = in.num_vehicle_types(), A = in.num_arcs(),
                    H = in.num_competitors(), R = sample.realizations;
  const double inv_r = 1.0 / static_cast<double>(R);
  MilpModel& m = out.model;
  CdIndex& ix = out.index;
  m.set_sense(ObjectiveSense::Maximize);
  std::vector<double> start;
  auto var = [&](std::string name, double lo, double hi, VarKind kind, int prio, double init) {
    start.push_back(init);
    return m.add_variable(std::move(name), lo, hi, kind, prio);
  };

  // Upper level: fleet, cycles, binary frequency expansion.
  ix.v.assign(S, std::vector<int>(K, -1));
  ix.f.assign(S, std::vector<int>(K, -1));
  ix.f_bits.assign(S, std::vector<std::vector<int>>(K));
  for (std::size_t s = 0; s < S; ++s) {
    const auto& sv = in.services[s];
    for (std::size_t k = 0; k < K; ++k) {
      const auto& vt = in.vehicle_types[k];
      const std::string tag = sv.id + "_" + vt.id;
      const int w = max_cycles(sv, k, vt);
      ix.v[s][k] = var("v_" + tag, 0, vt.count, VarKind::Integer, 2, 0);
      ix.f[s][k] = var("f_" + tag, 0, frequency_cap(in, s, k), VarKind::Integer, 2, 0);
      m.add_objective(ix.f[s][k], -sv.fixed_cost[k]);
      const int bits = num_bits(static_cast<long>(w) * vt.count);
      std::vector<LinearTerm> expand{{ix.f[s][k], 1.0}};
      for (int b = 0; b < bits; ++b) {
        const int fb = var("fb_" + tag + "_" + std::to_string(b), 0, 1, VarKind::Binary, 3, 0);
        ix.f_bits[s][k].push_back(fb);
        expand.push_back({fb, -std::ldexp(1.0, b)});
      }
      m.add_constraint("fbin_" + tag, expand, Sense::Equal, 0.0);
      m.add_constraint("cycle_" + tag, {{ix.f[s][k], 1.0}, {ix.v[s][k], -static_cast<double>(w)}}, Sense::LessEqual,
                       0.0);
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<LinearTerm> t;
    for (std::size_t s = 0; s < S; ++s) t.push_back({ix.v[s][k], 1.0});
    m.add_constraint("fleet_" + in.vehicle_types[k].id, t, Sense::LessEqual, in.vehicle_types[k].count);
  }

  out.active_arc.assign(A, 0);
  ix.p.assign(A, -1);
  for (std::size_t a = 0; a < A; ++a) {
    if (!(in.demand[a] > 0.0)) continue;
    out.active_arc[a] = 1;
    ix.p[a] = var("p_" + in.arc_name(a), 0, out.bigm.price_upper[a], VarKind::Continuous, 0, out.bigm.price_upper[a]);
  }

  // Lower level per realization: flows, duals, complementarity, revenue substitution.
  ix.x.assign(R, std::vector<std::vector<std::vector<int>>>(A, std::vector<std::vector<int>>(S, std::vector<int>(K, -1))));
  ix.z.assign(R, std::vector<std::vector<int>>(A, std::vector<int>(H, -1)));
  ix.lambda.assign(R, std::vector<int>(A, -1));
  ix.y_i = ix.lambda;
  ix.y_ii = ix.lambda;
  ix.y_ih = ix.z;
  ix.y_iih = ix.z;
  ix.a.assign(R, std::vector<std::vector<CdIndex::Product>>(A));
  const double bf = spec.beta_f;

  for (std::size_t r = 0; r < R; ++r) {
    const double bc = ev.price_coefficient(r);
    const double rev = -1.0 / bc * inv_r;  // EUR per utility unit, averaged over the sample
    for (std::size_t a = 0; a < A; ++a) {
      if (!out.active_arc[a]) continue;
      const ArcBigM& bm = out.bigm.per_arc[a][r];
      const double D = in.demand[a];
      const double ubar = ev.operator_base(a, r);
      const std::string tag = in.arc_name(a) + "_r" + std::to_string(r);

      std::vector<LinearTerm> flow;  // X = sum_sk x
      for (std::size_t s = 0; s < S; ++s) {
        if (!in.incidence.covers(a, s)) continue;
        for (std::size_t k = 0; k < K; ++k) {
          const int x = var("x_" + tag + "_" + in.services[s].id + "_" + in.vehicle_types[k].id, 0, D,
                            VarKind::Continuous, 0, 0);
          ix.x[r][a][s][k] = x;
          m.add_objective(x, rev * ubar - in.services[s].variable_cost[a][k] * inv_r);
          flow.push_back({x, 1.0});
        }
      }
      std::vector<LinearTerm> freq;  // sum of covering frequencies
      for (std::size_t s = 0; s < S; ++s)
        if (in.incidence.covers(a, s))
          for (std::size_t k = 0; k < K; ++k) freq.push_back({ix.f[s][k], bf});

      const int lam = var("lambda_" + tag, bm.lambda_lo, bm.lambda_hi, VarKind::Continuous, 0, -bm.u_best);
      ix.lambda[r][a] = lam;
      m.add_objective(lam, rev * D);
      const int yi = var("yI_" + tag, 0, 1, VarKind::Binary, 1, 1);
      const int yii = var("yII_" + tag, 0, 1, VarKind::Binary, 1, 0);
      ix.y_i[r][a] = yi;
      ix.y_ii[r][a] = yii;

      std::vector<LinearTerm> t{{lam, 1.0}, {ix.p[a], bc}};
      t.insert(t.end(), freq.begin(), freq.end());
      m.add_constraint("dualop_" + tag, t, Sense::LessEqual, -ubar);
      t = {{lam, -1.0}, {ix.p[a], -bc}, {yi, -bm.m_i}};
      for (const auto& q : freq) t.push_back({q.var, -q.coef});
      m.add_constraint("compIop_" + tag, t, Sense::LessEqual, ubar);
      t = flow;
      t.push_back({yii, -bm.m_ii});
      m.add_constraint("compIIop_" + tag, t, Sense::LessEqual, 0.0);
      m.add_constraint("flagop_" + tag, {{yi, 1.0}, {yii, 1.0}}, Sense::LessEqual, 1.0);

      std::vector<LinearTerm> demand = flow;
      for (std::size_t h = 0; h < H; ++h) {
        if (!in.competitors[h].available(a)) continue;
        const double uh = ev.competitor_utility(a, h, r);
        const std::string htag = tag + "_" + in.competitors[h].name;
        const bool best = h == bm.h_best;
        const bool tight = uh >= bm.u_best;
        const int z = var("z_" + htag, 0, D, VarKind::Continuous, 0, best ? D : 0.0);
        ix.z[r][a][h] = z;
        m.add_objective(z, rev * uh);
        const int yih = var("yIh_" + htag, 0, 1, VarKind::Binary, 1, tight ? 0 : 1);
        const int yiih = var("yIIh_" + htag, 0, 1, VarKind::Binary, 1, tight ? 1 : 0);
        ix.y_ih[r][a][h] = yih;
        ix.y_iih[r][a][h] = yiih;
        m.add_constraint("dualh_" + htag, {{lam, 1.0}}, Sense::LessEqual, -uh);
        m.add_constraint("compIh_" + htag, {{lam, -1.0}, {yih, -bm.m_ih[h]}}, Sense::LessEqual, uh);
        m.add_constraint("compIIh_" + htag, {{z, 1.0}, {yiih, -bm.m_iih[h]}}, Sense::LessEqual, 0.0);
        m.add_constraint("flagh_" + htag, {{yih, 1.0}, {yiih, 1.0}}, Sense::LessEqual, 1.0);
        demand.push_back({z, 1.0});
      }
      m.add_constraint("demand_" + tag, demand, Sense::Equal, D);

      // f_ij * X through the bits of every covering (s', k').
      if (bf == 0.0 || flow.empty()) continue;
      for (std::size_t s = 0; s < S; ++s) {
        if (!in.incidence.covers(a, s)) continue;
        for (std::size_t k = 0; k < K; ++k) {
          for (std::size_t b = 0; b < ix.f_bits[s][k].size(); ++b) {
            const int fb = ix.f_bits[s][k][b];
            const std::string ptag = tag + "_" + in.services[s].id + "_" + in.vehicle_types[k].id + "_" + std::to_string(b);
            const int av = var("a_" + ptag, 0, D, VarKind::Continuous, 0, 0);
            ix.a[r][a].push_back({static_cast<int>(s), static_cast<int>(k), static_cast<int>(b), av});
            m.add_objective(av, rev * bf * std::ldexp(1.0, static_cast<int>(b)));
            m.add_constraint("aD_" + ptag, {{av, 1.0}, {fb, -D}}, Sense::LessEqual, 0.0);
            t = {{av, 1.0}};
            for (const auto& q : flow) t.push_back({q.var, -1.0});
            m.add_constraint("ax_" + ptag, t, Sense::LessEqual, 0.0);
            t = {{av, 1.0}, {fb, -D}};
            for (const auto& q : flow) t.push_back({q.var, -1.0});
            m.add_constraint("axD_" + ptag, t, Sense::GreaterEqual, -D);
          }
        }
      }
    }
  }

  // Leg capacity on the realization-averaged flows.
  for (std::size_t s = 0; s < S; ++s) {
    const auto& sv = in.services[s];
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t l = 0; l < sv.legs.size(); ++l) {
        std::vector<LinearTerm> t;
        for (std::size_t r = 0; r < R; ++r)
          for (std::size_t a = 0; a < A; ++a)
            if (ix.x[r][a][s][k] >= 0 && in.incidence.uses_leg(a, s, l)) t.push_back({ix.x[r][a][s][k], inv_r});
        if (t.empty()) continue;
        t.push_back({ix.f[s][k], -in.vehicle_types[k].capacity});
        m.add_constraint("cap_" + sv.id + "_" + in.vehicle_types[k].id + "_l" + std::to_string(l), t,
                         Sense::LessEqual, 0.0);
      }
    }
  }
  m.set_start(std::move(start));
  m.check();
  return out;
}

}  // namespace

CdMilp build_deterministic_milp(const Instance& instance, const UtilitySpec& spec) {
  if (spec.is_random()) throw InputError("the deterministic model needs a spec without random terms");
  return build(instance, spec, degenerate_sample(instance.num_arcs(), instance.num_competitors() + 1));
}

CdMilp build_saa_milp(const Instance& instance, const UtilitySpec& spec, const Sample& sample) {
  return build(instance, spec, sample);
}

int Solution::arc_frequency(const Instance& instance, std::size_t arc) const {
  int f = 0;
  for (std::size_t s = 0; s < instance.num_services(); ++s)
    if (instance.incidence.covers(arc, s))
      for (std::size_t k = 0; k < instance.num_vehicle_types(); ++k) f += frequency[s][k];
  return f;
}

double Solution::operator_volume(std::size_t arc) const {
  if (x.empty()) return 0.0;
  double v = 0.0;
  for (const auto& xr : x)
    for (const auto& xs : xr[arc])
      for (double q : xs) v += q;
  return v / static_cast<double>(x.size());
}

double direct_profit(const Instance& in, const Solution& sol) {
  const std::size_t R = sol.realizations();
  double profit = 0.0;
  for (std::size_t s = 0; s < in.num_services(); ++s)
    for (std::size_t k = 0; k < in.num_vehicle_types(); ++k) profit -= in.services[s].fixed_cost[k] * sol.frequency[s][k];
  if (R == 0) return profit;
  double flows = 0.0;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t a = 0; a < in.num_arcs(); ++a)
      for (std::size_t s = 0; s < in.num_services(); ++s)
        for (std::size_t k = 0; k < in.num_vehicle_types(); ++k) {
          const double q = sol.x[r][a][s][k];
          if (q == 0.0) continue;
          flows += q * (sol.price[a] - in.services[s].variable_cost[a][k]);
        }
  return profit + flows / static_cast<double>(R);
}

double upper_level_violation(const Instance& in, const Solution& sol) {
  const std::size_t S = in.num_services(), K = in.num_vehicle_types(), A = in.num_arcs(), R = sol.realizations();
  double worst = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    int used = 0;
    for (std::size_t s = 0; s < S; ++s) used += sol.vehicles[s][k];
    worst = std::max(worst, static_cast<double>(used - in.vehicle_types[k].count));
  }
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t k = 0; k < K; ++k) {
      const int w = max_cycles(in.services[s], k, in.vehicle_types[k]);
      worst = std::max(worst, static_cast<double>(sol.frequency[s][k] - w * sol.vehicles[s][k]));
      worst = std::max(worst, static_cast<double>(sol.frequency[s][k] - in.max_frequency));
      worst = std::max(worst, static_cast<double>(-sol.frequency[s][k]));
      for (std::size_t l = 0; l < in.services[s].legs.size(); ++l) {
        double load = 0.0;
        for (std::size_t r = 0; r < R; ++r)
          for (std::size_t a = 0; a < A; ++a)
            if (in.incidence.uses_leg(a, s, l)) load += sol.x[r][a][s][k];
        if (R > 0) load /= static_cast<double>(R);
        worst = std::max(worst, load - in.vehicle_types[k].capacity * sol.frequency[s][k]);
      }
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t a = 0; a < A; ++a) {
      double total = 0.0;
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t k = 0; k < K; ++k) {
          const double q = sol.x[r][a][s][k];
          worst = std::max(worst, -q);
          if (!in.incidence.covers(a, s)) worst = std::max(worst, std::abs(q));
          total += q;
        }
      for (double q : sol.z[r][a]) {
        worst = std::max(worst, -q);
        total += q;
      }
      worst = std::max(worst, std::abs(total - in.demand[a]));
    }
  }
  return worst;
}

Solution extract_solution(const CdMilp& milp, const MilpResult& res) {
  const Instance& in = milp.instance;
  const CdIndex& ix = milp.index;
  const std::size_t S = in.num_services(), K = in.num_vehicle_types(), A = in.num_arcs(),
                    H = in.num_competitors(), R = milp.sample.realizations;
  Solution sol;
  sol.status = res.status;
  sol.backend = res.backend;
  sol.objective = res.objective;
  sol.best_bound = res.best_bound;
  sol.gap = res.gap;
  sol.wall_time = res.wall_time;
  sol.nodes = res.nodes;
  if (!res.has_solution()) return sol;
  const auto& val = res.values;
  auto get = [&](int v) { return v >= 0 ? val[static_cast<std::size_t>(v)] : 0.0; };
  // Tiny negative round-off on flows is clipped.
  auto flow = [&](int v) { return std::max(0.0, get(v)); };

  sol.vehicles.assign(S, std::vector<int>(K, 0));
  sol.frequency.assign(S, std::vector<int>(K, 0));
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k) {
      sol.vehicles[s][k] = static_cast<int>(std::lround(get(ix.v[s][k])));
      sol.frequency[s][k] = static_cast<int>(std::lround(get(ix.f[s][k])));
    }
  sol.price.assign(A, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t a = 0; a < A; ++a)
    if (ix.p[a] >= 0) sol.price[a] = get(ix.p[a]);
  sol.x.assign(R, std::vector<std::vector<std::vector<double>>>(A, std::vector<std::vector<double>>(S, std::vector<double>(K, 0.0))));
  sol.z.assign(R, std::vector<std::vector<double>>(A, std::vector<double>(H, 0.0)));
  sol.lambda.assign(R, std::vector<double>(A, 0.0));
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t k = 0; k < K; ++k) sol.x[r][a][s][k] = flow(ix.x[r][a][s][k]);
      for (std::size_t h = 0; h < H; ++h) sol.z[r][a][h] = flow(ix.z[r][a][h]);
      sol.lambda[r][a] = get(ix.lambda[r][a]);
    }
  sol.expected_profit = direct_profit(in, sol);
  return sol;
}

Solution solve(const CdMilp& milp, MilpBackend& backend, const SolveLimits& limits) {
  return extract_solution(milp, backend.solve(milp.model, limits));
}

double KktReport::max_residual() const { return std::max({dual_feasibility, complementarity, duality, demand}); }

KktReport verify_kkt(const Solution& sol, const Instance& in, const UtilitySpec& spec, const Sample& sample) {
  KktReport rep;
  if (sol.realizations() == 0) return rep;
  UtilityEvaluator ev(in, spec, sample);
  const std::size_t S = in.num_services(), K = in.num_vehicle_types(), H = in.num_competitors();
  for (std::size_t r = 0; r < sol.realizations(); ++r) {
    for (std::size_t a = 0; a < in.num_arcs(); ++a) {
      const double D = in.demand[a];
      if (!(D > 0.0)) continue;
      const double lam = sol.lambda[r][a];
      const double uo = ev.operator_utility(a, sol.price[a], sol.arc_frequency(in, a), r);
      double X = 0.0;
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t k = 0; k < K; ++k) X += sol.x[r][a][s][k];
      double lower = uo * X, total = X;
      rep.dual_feasibility = std::max(rep.dual_feasibility, lam + uo);
      rep.complementarity = std::max(rep.complementarity, std::abs((-uo - lam) * X));
      for (std::size_t h = 0; h < H; ++h) {
        if (!in.competitors[h].available(a)) continue;
        const double uh = ev.competitor_utility(a, h, r);
        const double z = sol.z[r][a][h];
        rep.dual_feasibility = std::max(rep.dual_feasibility, lam + uh);
        rep.complementarity = std::max(rep.complementarity, std::abs((-uh - lam) * z));
        lower += uh * z;
        total += z;
      }
      rep.duality = std::max(rep.duality, std::abs(-lower - D * lam));
      rep.demand = std::max(rep.demand, std::abs(total - D));
    }
  }
  return rep;
}

Sample sample_for(const Instance& instance, const UtilitySpec& spec, std::size_t draws, std::uint64_t seed) {
  if (!spec.is_random()) return degenerate_sample(instance.num_arcs(), instance.num_competitors() + 1);
  return draw_sample(spec, draws, seed, instance.num_arcs(), instance.num_competitors() + 1);
}

}  // namespace cdsndp
