#pragma once

// Deterministic slotted-time simulation driver. Runs a policy for T slots,
// accumulating the weighted age averages
//
//   awsaoiu = (1/(N T)) sum_t sum_i w_i aoiu_i(t)
//   awsaoip = (1/(N T)) sum_t sum_i w_i aoip_i(t)
//
// plus per-node delivery statistics. With checks enabled the run verifies,
// slot by slot, the structural identities a drop-free run must satisfy and
// aborts with slot/node detail on the first violation:
//
//   - the policy never transmits into a busy processor;
//   - once a node's first packet completes, aoip(t) = aoiu(t - tau) + tau
//     for every later slot;
//   - at the end, each node's time-averaged aoiu is at least
//     T / (2 (A + 1)) + 1/2 for A resets (the sawtooth minimum).

#include <algorithm>
#include <atomic>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "model.hpp"
#include "policies.hpp"
#include "rate_solver.hpp"

namespace aoip {

struct RunOptions {
  bool checks = true;
  bool histograms = false;  // per-node aoip frequency tables
};

struct RunReport {
  std::string policy;
  int n_nodes = 0;
  i64 horizon = 0;
  bool checks_enabled = false;

  double awsaoip = 0.0;
  double awsaoiu = 0.0;
  // Same averages over the first floor(T/2) slots; comparing against the
  // full-run values gives a cheap convergence probe.
  double awsaoip_first_half = 0.0;
  double awsaoiu_first_half = 0.0;

  std::vector<double> rate;        // deliveries / T
  std::vector<i64> deliveries;     // accepted transmissions
  std::vector<i64> attempts;       // all transmissions, wasteful included
  std::vector<i64> first_delivery_slot;  // 0 if the node never transmitted
  std::vector<i64> min_gap, max_gap;     // inter-delivery extremes, 0 if < 2
  std::vector<i64> max_aoip;       // peak aoip after the first completion
  std::vector<std::vector<i64>> aoip_hist;  // aoip_hist[i][age] = slot count

  i64 identity_checks = 0;  // slot-exact aoip/aoiu identity evaluations
};

inline RunReport run(const NetworkConfig& cfg, Policy& policy, i64 T,
                     const RunOptions& opts = {}) {
  cfg.validate();
  if (T < 1) throw config_error("horizon must be >= 1");
  const int n = cfg.n();

  SystemState s = initial_state(cfg);

  RunReport rep;
  rep.policy = policy.name();
  rep.n_nodes = n;
  rep.horizon = T;
  rep.checks_enabled = opts.checks;
  rep.rate.assign(n, 0.0);
  rep.deliveries.assign(n, 0);
  rep.attempts.assign(n, 0);
  rep.first_delivery_slot.assign(n, 0);
  rep.min_gap.assign(n, 0);
  rep.max_gap.assign(n, 0);
  rep.max_aoip.assign(n, 0);
  if (opts.histograms) rep.aoip_hist.assign(n, {});

  double wz_sum = 0.0, wa_sum = 0.0;
  double wz_half = 0.0, wa_half = 0.0;
  const i64 half = T / 2;

  std::vector<i64> aoiu_sum(n, 0);  // per-node, for the sawtooth bound
  std::vector<i64> warm_at(n, std::numeric_limits<i64>::max());
  std::vector<i64> last_delivery(n, 0);

  // Ring buffers holding the last tau_i aoiu values per node, so the
  // aoip(t) = aoiu(t - tau) + tau identity can be checked slot-exactly.
  std::vector<i64> ring;
  std::vector<size_t> ring_base(n, 0);
  std::vector<size_t> ring_pos(n, 0);
  if (opts.checks) {
    size_t total = 0;
    for (const auto& nd : cfg.nodes) total += size_t(nd.proc_time);
    ring.assign(total, 0);
    size_t off = 0;
    for (int i = 0; i < n; ++i) {
      ring_base[i] = off;
      off += size_t(cfg.nodes[i].proc_time);
    }
  }

  for (i64 t = 1; t <= T; ++t) {
    for (int i = 0; i < n; ++i) {
      const double w = cfg.nodes[i].weight;
      wz_sum += w * double(s.aoiu[i]);
      wa_sum += w * double(s.aoip[i]);
      aoiu_sum[i] += s.aoiu[i];
      if (t >= warm_at[i] && s.aoip[i] > rep.max_aoip[i])
        rep.max_aoip[i] = s.aoip[i];
      if (opts.histograms) {
        auto& h = rep.aoip_hist[i];
        const size_t age = size_t(s.aoip[i]);
        if (h.size() <= age) h.resize(age + 1, 0);
        h[age] += 1;
      }
      if (opts.checks) {
        const i64 tau = cfg.nodes[i].proc_time;
        const size_t slot_idx = ring_base[i] + ring_pos[i];
        if (t >= warm_at[i]) {
          // ring[slot_idx] still holds aoiu(t - tau)
          if (s.aoip[i] != ring[slot_idx] + tau)
            throw invariant_violation(
                "aoip != aoiu(t-tau)+tau at slot " + std::to_string(t) +
                ", node " + std::to_string(i));
          rep.identity_checks += 1;
        }
        ring[slot_idx] = s.aoiu[i];
        ring_pos[i] = (ring_pos[i] + 1 == size_t(tau)) ? 0 : ring_pos[i] + 1;
      }
    }
    if (t == half) {
      wz_half = wz_sum;
      wa_half = wa_sum;
    }

    const Decision d = policy.decide(s);
    if (!d.idle()) {
      const int j = d.transmitter;
      if (j >= n) throw config_error("policy named node beyond the network");
      rep.attempts[j] += 1;
      if (!is_wasteful(s, j)) {
        if (rep.first_delivery_slot[j] == 0) {
          rep.first_delivery_slot[j] = t;
          warm_at[j] = t + cfg.nodes[j].proc_time + 1;
        } else {
          const i64 gap = t - last_delivery[j];
          if (rep.min_gap[j] == 0 || gap < rep.min_gap[j]) rep.min_gap[j] = gap;
          if (gap > rep.max_gap[j]) rep.max_gap[j] = gap;
        }
        last_delivery[j] = t;
        rep.deliveries[j] += 1;
      } else if (opts.checks) {
        throw invariant_violation("wasteful transmission at slot " +
                                  std::to_string(t) + ", node " +
                                  std::to_string(j));
      }
    }
    advance_state(s, d, cfg);
  }

  rep.awsaoiu = wz_sum / (double(n) * double(T));
  rep.awsaoip = wa_sum / (double(n) * double(T));
  if (half >= 1) {
    rep.awsaoiu_first_half = wz_half / (double(n) * double(half));
    rep.awsaoip_first_half = wa_half / (double(n) * double(half));
  }
  for (int i = 0; i < n; ++i) rep.rate[i] = double(rep.deliveries[i]) / double(T);

  if (opts.checks) {
    for (int i = 0; i < n; ++i) {
      const double lhs = double(aoiu_sum[i]) / double(T);
      const double rhs = double(T) / (2.0 * double(rep.attempts[i] + 1)) + 0.5;
      if (lhs < rhs - 1e-9)
        throw invariant_violation("aoiu average beats the sawtooth minimum, node " +
                                  std::to_string(i));
    }
  }
  return rep;
}

// True when every node's post-warm-up peak aoip stayed within the back-off
// policy's guarantee 2*ceil(1/r_i) + tau_i - 1. Nodes that never completed a
// packet have no post-warm-up peak and pass vacuously.
inline bool check_maxaoip_bound(const RunReport& rep, const RateSolution& sol,
                                const NetworkConfig& cfg) {
  for (int i = 0; i < cfg.n(); ++i) {
    const i64 bound =
        2 * ceil_snapped(1.0 / sol.rates[i]) + cfg.nodes[i].proc_time - 1;
    if (rep.max_aoip[i] > bound) return false;
  }
  return true;
}

struct SweepRow {
  int multiple = 1;
  int n_nodes = 0;
  std::string policy;
  i64 horizon = 0;
  double awsaoip = 0.0;
  double awsaoiu = 0.0;
  double lower_bound = 0.0;
  double ratio_to_bound = 0.0;
};

inline NetworkConfig replicate(const NetworkConfig& group, int k) {
  if (k < 1) throw config_error("replication factor must be >= 1");
  NetworkConfig out;
  out.nodes.reserve(group.nodes.size() * size_t(k));
  for (int c = 0; c < k; ++c)
    out.nodes.insert(out.nodes.end(), group.nodes.begin(), group.nodes.end());
  return out;
}

// Runs every (multiple, policy) cell of the ladder. Cells are independent;
// with n_threads > 1 they are claimed from a shared counter and the rows are
// written into their slot by index, so the output is identical to a
// sequential pass.
inline std::vector<SweepRow> sweep(const NetworkConfig& group,
                                   const std::vector<int>& multiples,
                                   const std::vector<std::string>& policies,
                                   i64 T, const RunOptions& opts = {},
                                   unsigned n_threads = 0) {
  group.validate();
  if (multiples.empty() || policies.empty())
    throw config_error("sweep needs at least one multiple and one policy");

  struct Cell {
    int multiple;
    std::string policy;
  };
  std::vector<Cell> cells;
  for (int k : multiples)
    for (const auto& p : policies) cells.push_back({k, p});

  std::vector<SweepRow> rows(cells.size());
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  const auto work = [&]() {
    try {
      for (size_t c = next.fetch_add(1); c < cells.size() && !failed;
           c = next.fetch_add(1)) {
        const NetworkConfig cfg = replicate(group, cells[c].multiple);
        const RateSolution sol = solve_rates(cfg);
        auto policy = make_policy(cells[c].policy, cfg, sol);
        const RunReport rep = run(cfg, *policy, T, opts);
        SweepRow& row = rows[c];
        row.multiple = cells[c].multiple;
        row.n_nodes = cfg.n();
        row.policy = cells[c].policy;
        row.horizon = T;
        row.awsaoip = rep.awsaoip;
        row.awsaoiu = rep.awsaoiu;
        row.lower_bound = lower_bound(sol, cfg);
        row.ratio_to_bound = row.awsaoip / row.lower_bound;
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace aoip
