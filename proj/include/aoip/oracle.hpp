#pragma once

// Brute-force ground truth for tiny networks.
//
// optimal_average_cost: value iteration over the exact per-slot dynamics,
// state = per node (aoiu capped at z_max, remaining busy slots). The stage
// cost charges w_i (aoiu_i + tau_i), which equals the processed-age cost of
// any drop-free policy in the long run, so the result g* is directly
// comparable to simulated awsaoip and to the convex lower bound. Wasteful
// transmissions are excluded from the action set (they never help; the
// augmented oracle below double-checks that).
//
// exact_aoip_average_cost: the same optimization with aoip carried in the
// state explicitly, the stage cost w_i aoip_i, and wasteful transmissions
// allowed. Much bigger states, tiny instances only; exists so tests can
// confirm both routes land on the same optimum.
//
// best_cyclic_schedule: exhaustive search over repeating decision patterns,
// an independent upper-bound oracle with an exact closed-form steady-state
// cost per pattern.
//
// Value iteration uses the standard damping h' = c + (h + min_succ h) / 2;
// the half-and-half mix removes the oscillation a deterministic periodic
// chain otherwise exhibits without changing the average cost or the fixed
// point. Each sweep brackets g* by the min/max of h'(s) - h(s); iteration
// stops when the bracket is narrower than tol. The greedy limit cycle is
// then extracted and its exact mean cost reported alongside.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "model.hpp"
#include "policies.hpp"
#include "rate_solver.hpp"

namespace aoip {

struct OracleOptions {
  i64 z_max = 0;  // aoiu cap; 0 picks 4*sum(ceil(1/r_i)) shrunk to budget,
                  // never below 4*max(tau)
  double tol = 1e-9;
  i64 state_budget = 1'000'000;
  i64 max_iterations = 200'000;
};

struct OracleResult {
  double g_star = 0.0;  // optimal long-run weighted processed age, (1/N) scaled
  double lo = 0.0, hi = 0.0;  // final value-iteration bracket around g_star
  i64 iterations = 0;
  i64 states = 0;
  i64 z_max_used = 0;
  bool cap_hit = false;  // greedy trajectory saturated the aoiu cap; g_star
                         // is then untrustworthy and needs a larger z_max
  double greedy_cycle_cost = 0.0;  // exact mean cost of the greedy limit cycle
  i64 cycle_length = 0;
};

namespace detail {

// Deterministic finite MDP: succ[a][s] is the successor under action a,
// -1 where a is not allowed. Action 0 must always be allowed.
struct DetMdp {
  i64 states = 0;
  int actions = 0;
  std::vector<std::vector<int32_t>> succ;
  std::vector<double> cost;
};

struct RviOutcome {
  double lo = 0.0, hi = 0.0;
  i64 iterations = 0;
  std::vector<double> h;
};

inline RviOutcome relative_value_iteration(const DetMdp& mdp, double tol,
                                           i64 max_iterations) {
  const i64 V = mdp.states;
  std::vector<double> h(size_t(V), 0.0), h2(size_t(V), 0.0);
  RviOutcome out;

  for (i64 iter = 1; iter <= max_iterations; ++iter) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (i64 s = 0; s < V; ++s) {
      double best = h[size_t(mdp.succ[0][size_t(s)])];
      for (int a = 1; a < mdp.actions; ++a) {
        const int32_t nxt = mdp.succ[size_t(a)][size_t(s)];
        if (nxt >= 0) best = std::min(best, h[size_t(nxt)]);
      }
      const double updated = mdp.cost[size_t(s)] + 0.5 * (h[size_t(s)] + best);
      const double delta = updated - h[size_t(s)];
      lo = std::min(lo, delta);
      hi = std::max(hi, delta);
      h2[size_t(s)] = updated;
    }
    const double ref = h2[0];
    for (double& v : h2) v -= ref;
    h.swap(h2);
    if (hi - lo <= tol) {
      out.lo = lo;
      out.hi = hi;
      out.iterations = iter;
      out.h = std::move(h);
      return out;
    }
  }
  throw numerical_error("value iteration did not reach tol within " +
                        std::to_string(max_iterations) + " sweeps");
}

struct GreedyCycle {
  std::vector<int32_t> states;   // the cycle, in visit order
  std::vector<int> actions;
  double mean_cost = 0.0;
};

// Follows the h-greedy action from s0 until a state repeats; the repeated
// tail is the limit cycle. Ties prefer the lowest action index.
inline GreedyCycle greedy_limit_cycle(const DetMdp& mdp,
                                      const std::vector<double>& h,
                                      int32_t s0) {
  std::vector<int32_t> seen(size_t(mdp.states), -1);
  std::vector<int32_t> path;
  std::vector<int> acts;
  int32_t s = s0;
  while (seen[size_t(s)] < 0) {
    seen[size_t(s)] = int32_t(path.size());
    int best_a = 0;
    double best = h[size_t(mdp.succ[0][size_t(s)])];
    for (int a = 1; a < mdp.actions; ++a) {
      const int32_t nxt = mdp.succ[size_t(a)][size_t(s)];
      if (nxt >= 0 && h[size_t(nxt)] < best) {
        best = h[size_t(nxt)];
        best_a = a;
      }
    }
    path.push_back(s);
    acts.push_back(best_a);
    s = mdp.succ[size_t(best_a)][size_t(s)];
  }
  const int32_t start = seen[size_t(s)];
  GreedyCycle cyc;
  double sum = 0.0;
  for (size_t k = size_t(start); k < path.size(); ++k) {
    cyc.states.push_back(path[k]);
    cyc.actions.push_back(acts[k]);
    sum += mdp.cost[size_t(path[k])];
  }
  cyc.mean_cost = sum / double(cyc.states.size());
  return cyc;
}

}  // namespace detail

inline OracleResult optimal_average_cost(const NetworkConfig& cfg,
                                         const OracleOptions& opts = {}) {
  cfg.validate();
  const int n = cfg.n();

  i64 z_max = opts.z_max;
  i64 tau_max = 0;
  for (const auto& nd : cfg.nodes) tau_max = std::max(tau_max, nd.proc_time);
  const i64 z_floor = 4 * tau_max;

  const auto states_for = [&](i64 z) {
    i64 v = 1;
    for (const auto& nd : cfg.nodes) {
      v *= z * nd.proc_time;
      if (v > opts.state_budget) return i64(-1);
    }
    return v;
  };

  if (z_max == 0) {
    const RateSolution sol = solve_rates(cfg);
    i64 z = 0;
    for (double r : sol.rates) z += ceil_snapped(1.0 / r);
    z_max = std::max(4 * z, z_floor);
    // Shrink toward the largest cap the state budget accommodates.
    double prod_tau = 1.0;
    for (const auto& nd : cfg.nodes) prod_tau *= double(nd.proc_time);
    const i64 fit = i64(std::pow(double(opts.state_budget) / prod_tau,
                                 1.0 / double(n))) + 2;
    z_max = std::clamp(fit, z_floor, z_max);
    while (z_max > z_floor && states_for(z_max) < 0) z_max -= 1;
  } else if (z_max < z_floor) {
    throw config_error("oracle z_max below 4*max(proc_time)");
  }

  const i64 V = states_for(z_max);
  if (V < 0)
    throw budget_error("oracle state space exceeds budget even at z_max = " +
                       std::to_string(z_max));

  // Mixed-radix encoding, node 0 slowest: digit_i = (z_i - 1) * tau_i + r_i.
  std::vector<i64> dim(n), stride(n);
  for (int i = 0; i < n; ++i) dim[i] = z_max * cfg.nodes[i].proc_time;
  stride[n - 1] = 1;
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dim[i + 1];

  detail::DetMdp mdp;
  mdp.states = V;
  mdp.actions = n + 1;  // 0 = idle, 1+i = transmit node i
  mdp.succ.assign(size_t(n) + 1, std::vector<int32_t>(size_t(V), -1));
  mdp.cost.assign(size_t(V), 0.0);

  double wtau = 0.0;
  for (const auto& nd : cfg.nodes) wtau += nd.weight * double(nd.proc_time);

  std::vector<i64> z(n), r(n);
  for (i64 s = 0; s < V; ++s) {
    i64 rem = s;
    double c = wtau;
    for (int i = 0; i < n; ++i) {
      const i64 digit = rem / stride[i];
      rem %= stride[i];
      z[i] = digit / cfg.nodes[i].proc_time + 1;
      r[i] = digit % cfg.nodes[i].proc_time;
      c += cfg.nodes[i].weight * double(z[i]);
    }
    mdp.cost[size_t(s)] = c / double(n);

    i64 idle = 0;
    for (int i = 0; i < n; ++i) {
      const i64 zi = std::min(z[i] + 1, z_max);
      const i64 ri = r[i] > 0 ? r[i] - 1 : 0;
      idle += ((zi - 1) * cfg.nodes[i].proc_time + ri) * stride[i];
    }
    mdp.succ[0][size_t(s)] = int32_t(idle);

    for (int j = 0; j < n; ++j) {
      if (r[j] != 0) continue;  // busy processor: transmitting would waste
      const i64 digit_j_idle =
          (std::min(z[j] + 1, z_max) - 1) * cfg.nodes[j].proc_time +
          (r[j] > 0 ? r[j] - 1 : 0);
      const i64 digit_j_tx = 0 * cfg.nodes[j].proc_time +
                             (cfg.nodes[j].proc_time - 1);  // z=1, r=tau-1
      mdp.succ[size_t(j) + 1][size_t(s)] =
          int32_t(idle + (digit_j_tx - digit_j_idle) * stride[j]);
    }
  }

  const auto rvi =
      detail::relative_value_iteration(mdp, opts.tol, opts.max_iterations);

  OracleResult res;
  res.lo = rvi.lo;
  res.hi = rvi.hi;
  res.g_star = 0.5 * (rvi.lo + rvi.hi);
  res.iterations = rvi.iterations;
  res.states = V;
  res.z_max_used = z_max;

  // Initial state: all ages 1, all processors free.
  i64 s0 = 0;
  for (int i = 0; i < n; ++i) s0 += 0 * stride[i];
  const auto cyc = detail::greedy_limit_cycle(mdp, rvi.h, int32_t(s0));
  res.greedy_cycle_cost = cyc.mean_cost;
  res.cycle_length = i64(cyc.states.size());

  // The cap distorts the optimum only if the greedy trajectory actually
  // truncates: some node sits at z_max and is not reset.
  for (size_t k = 0; k < cyc.states.size() && !res.cap_hit; ++k) {
    i64 rem = cyc.states[k];
    const int a = cyc.actions[k];
    for (int i = 0; i < n; ++i) {
      const i64 digit = rem / stride[i];
      rem %= stride[i];
      const i64 zi = digit / cfg.nodes[i].proc_time + 1;
      if (zi == z_max && a != i + 1) {
        res.cap_hit = true;
        break;
      }
    }
  }
  return res;
}

// Exact-aoip twin: per-node state (aoiu, aoip, p) where p counts slots until
// the in-flight packet's refresh becomes visible (0 = nothing in flight; the
// processor is busy while p >= 2). Any node may transmit in any slot; a
// transmission with p >= 2 is wasteful and only resets aoiu.
inline OracleResult exact_aoip_average_cost(const NetworkConfig& cfg,
                                            i64 z_max, i64 a_max,
                                            const OracleOptions& opts = {}) {
  cfg.validate();
  const int n = cfg.n();
  if (z_max < 2 || a_max < z_max)
    throw config_error("exact oracle needs z_max >= 2 and a_max >= z_max");
  for (const auto& nd : cfg.nodes) {
    if (a_max < nd.proc_time + 1)
      throw config_error("exact oracle needs a_max >= proc_time + 1");
  }

  std::vector<i64> dim(n), stride(n);
  i64 V = 1;
  for (int i = 0; i < n; ++i) {
    dim[i] = z_max * a_max * (cfg.nodes[i].proc_time + 1);
    V *= dim[i];
    if (V > opts.state_budget || V < 0)
      throw budget_error("exact-aoip oracle state space exceeds budget");
  }
  stride[n - 1] = 1;
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dim[i + 1];

  const auto digit_of = [&](i64 zi, i64 ai, i64 pi, int i) {
    return ((zi - 1) * a_max + (ai - 1)) * (cfg.nodes[i].proc_time + 1) + pi;
  };

  detail::DetMdp mdp;
  mdp.states = V;
  mdp.actions = n + 1;
  mdp.succ.assign(size_t(n) + 1, std::vector<int32_t>(size_t(V), -1));
  mdp.cost.assign(size_t(V), 0.0);

  std::vector<i64> z(n), a(n), p(n);
  for (i64 s = 0; s < V; ++s) {
    i64 rem = s;
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      const i64 digit = rem / stride[i];
      rem %= stride[i];
      const i64 pt = cfg.nodes[i].proc_time + 1;
      z[i] = digit / (a_max * pt) + 1;
      a[i] = (digit / pt) % a_max + 1;
      p[i] = digit % pt;
      c += cfg.nodes[i].weight * double(a[i]);
    }
    mdp.cost[size_t(s)] = c / double(n);

    for (int act = 0; act <= n; ++act) {
      i64 nxt = 0;
      for (int i = 0; i < n; ++i) {
        const bool tx = (act == i + 1);
        const i64 tau = cfg.nodes[i].proc_time;
        const i64 ai = (p[i] == 1) ? tau + 1 : std::min(a[i] + 1, a_max);
        i64 pi;
        if (tx && p[i] <= 1)
          pi = tau;  // accepted: refresh lands tau slots from now
        else
          pi = p[i] > 0 ? p[i] - 1 : 0;  // wasteful tx changes nothing here
        const i64 zi = tx ? 1 : std::min(z[i] + 1, z_max);
        nxt += digit_of(zi, ai, pi, i) * stride[i];
      }
      mdp.succ[size_t(act)][size_t(s)] = int32_t(nxt);
    }
  }

  const auto rvi =
      detail::relative_value_iteration(mdp, opts.tol, opts.max_iterations);

  OracleResult res;
  res.lo = rvi.lo;
  res.hi = rvi.hi;
  res.g_star = 0.5 * (rvi.lo + rvi.hi);
  res.iterations = rvi.iterations;
  res.states = V;
  res.z_max_used = z_max;

  i64 s0 = 0;
  for (int i = 0; i < n; ++i) s0 += digit_of(1, 1, 0, i) * stride[i];
  const auto cyc = detail::greedy_limit_cycle(mdp, rvi.h, int32_t(s0));
  res.greedy_cycle_cost = cyc.mean_cost;
  res.cycle_length = i64(cyc.states.size());
  for (size_t k = 0; k < cyc.states.size() && !res.cap_hit; ++k) {
    i64 rem = cyc.states[k];
    for (int i = 0; i < n; ++i) {
      const i64 digit = rem / stride[i];
      rem %= stride[i];
      const i64 pt = cfg.nodes[i].proc_time + 1;
      const i64 zi = digit / (a_max * pt) + 1;
      const i64 ai = (digit / pt) % a_max + 1;
      if (zi == z_max || ai == a_max) {
        res.cap_hit = true;
        break;
      }
    }
  }
  return res;
}

struct CyclicResult {
  std::vector<Decision> schedule;
  double awsaoip = 0.0;
};

// Exhaustively enumerates repeating schedules up to max_period slots long,
// keeping only drop-free ones that serve every node, and returns the best by
// exact steady-state cost. Work is counted in visited partial schedules.
inline CyclicResult best_cyclic_schedule(const NetworkConfig& cfg,
                                         int max_period,
                                         i64 enum_budget = 20'000'000) {
  cfg.validate();
  const int n = cfg.n();
  if (max_period < 1) throw config_error("max_period must be >= 1");

  double wtau = 0.0;
  for (const auto& nd : cfg.nodes) wtau += nd.weight * double(nd.proc_time);

  CyclicResult best;
  best.awsaoip = std::numeric_limits<double>::infinity();
  i64 budget = enum_budget;

  std::vector<int> seq;
  std::vector<i64> first_tx, last_tx;
  std::vector<std::vector<i64>> positions;

  const std::function<void(int, int, int)> dfs = [&](int P, int pos,
                                                     int missing) {
    if (--budget < 0)
      throw budget_error("cyclic schedule enumeration budget exceeded");
    if (pos > P) {
      if (missing > 0) return;  // some node never transmits in this cycle
      double cost = wtau;
      for (int i = 0; i < n; ++i) {
        const auto& txs = positions[i];
        const i64 wrap = P - last_tx[i] + first_tx[i];
        if (wrap < cfg.nodes[i].proc_time) return;
        double age_sum = double(wrap) * double(wrap + 1) / 2.0;
        for (size_t k = 1; k < txs.size(); ++k) {
          const i64 g = txs[k] - txs[k - 1];
          age_sum += double(g) * double(g + 1) / 2.0;
        }
        cost += cfg.nodes[i].weight * age_sum / double(P);
      }
      cost /= double(n);
      if (cost < best.awsaoip - 1e-15) {
        best.awsaoip = cost;
        best.schedule.clear();
        for (int c : seq)
          best.schedule.push_back(c < 0 ? Decision::idle_slot()
                                        : Decision::transmit(c));
      }
      return;
    }
    if (missing > P - pos + 1) return;  // unserved nodes can't all fit

    for (int c = -1; c < n; ++c) {
      if (c >= 0) {
        if (last_tx[c] > 0 && pos - last_tx[c] < cfg.nodes[c].proc_time)
          continue;  // would transmit into a busy processor
        const i64 prev_last = last_tx[c];
        const i64 prev_first = first_tx[c];
        seq.push_back(c);
        positions[c].push_back(pos);
        last_tx[c] = pos;
        if (first_tx[c] == 0) first_tx[c] = pos;
        dfs(P, pos + 1, prev_last == 0 ? missing - 1 : missing);
        seq.pop_back();
        positions[c].pop_back();
        last_tx[c] = prev_last;
        first_tx[c] = prev_first;
      } else {
        seq.push_back(-1);
        dfs(P, pos + 1, missing);
        seq.pop_back();
      }
    }
  };

  for (int P = 1; P <= max_period; ++P) {
    seq.clear();
    first_tx.assign(n, 0);
    last_tx.assign(n, 0);
    positions.assign(size_t(n), std::vector<i64>());
    dfs(P, 1, n);
  }

  if (!std::isfinite(best.awsaoip))
    throw config_error("no drop-free cyclic schedule within max_period");
  return best;
}

}  // namespace aoip
