#pragma once

// Long-run per-node transmission rates minimizing the weighted-age bound
//
//   B(r) = (1/N) sum_i w_i (tau_i + 1/2 + 1/(2 r_i))
//
// over sum_i r_i <= 1, 0 < r_i <= 1/tau_i. B is convex and separable, so the
// KKT conditions give r_i = min(1/tau_i, sqrt(w_i / (2 mu))) with mu the
// multiplier on the channel constraint; mu is found by bisection. When
// sum_i 1/tau_i <= 1 the channel constraint is slack and every rate sits at
// its processing cap. B at the optimum is a lower bound on the achievable
// weighted average processed age of any policy.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "model.hpp"

namespace aoip {

struct RateSolution {
  std::vector<double> rates;
  double dual = 0.0;       // channel-constraint multiplier, 0 when slack
  bool caps_bind = false;  // true when sum 1/tau_i <= 1 (rates = 1/tau_i)
};

// B(r) for arbitrary positive rates; the optimum value of this is the bound.
inline double weighted_age_bound(const std::vector<double>& rates,
                                 const NetworkConfig& cfg) {
  const int n = cfg.n();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += cfg.nodes[i].weight *
           (cfg.nodes[i].proc_time + 0.5 + 0.5 / rates[i]);
  }
  return sum / n;
}

inline RateSolution solve_rates(const NetworkConfig& cfg, double tol = 1e-10) {
  cfg.validate();
  const int n = cfg.n();

  double sum_inv_tau = 0.0;
  for (const auto& nd : cfg.nodes) sum_inv_tau += 1.0 / nd.proc_time;

  RateSolution sol;
  sol.rates.resize(n);

  if (sum_inv_tau <= 1.0) {
    // Processing caps are the only binding constraints.
    for (int i = 0; i < n; ++i) sol.rates[i] = 1.0 / cfg.nodes[i].proc_time;
    sol.dual = 0.0;
    sol.caps_bind = true;
    return sol;
  }

  const auto rates_at = [&](double mu, std::vector<double>& out) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double uncapped = std::sqrt(cfg.nodes[i].weight / (2.0 * mu));
      out[i] = std::min(1.0 / cfg.nodes[i].proc_time, uncapped);
      sum += out[i];
    }
    return sum;
  };

  // sum_i r_i(mu) is non-increasing in mu. At mu_lo every cap binds, so the
  // sum equals sum 1/tau_i > 1; at mu_hi even the uncapped rates sum to
  // exactly 1, so the capped sum is <= 1.
  double mu_lo = std::numeric_limits<double>::max();
  double sqrt_w_half = 0.0;
  for (const auto& nd : cfg.nodes) {
    mu_lo = std::min(mu_lo, nd.weight * double(nd.proc_time) *
                                double(nd.proc_time) / 2.0);
    sqrt_w_half += std::sqrt(nd.weight / 2.0);
  }
  double mu_hi = sqrt_w_half * sqrt_w_half;

  std::vector<double> r(n);
  double mu = mu_hi, sum = rates_at(mu, r);
  for (int iter = 0; iter < 200 && std::abs(sum - 1.0) > tol; ++iter) {
    mu = 0.5 * (mu_lo + mu_hi);
    sum = rates_at(mu, r);
    (sum > 1.0 ? mu_lo : mu_hi) = mu;
  }
  if (std::abs(sum - 1.0) > tol)
    throw numerical_error("rate bisection stalled: |sum rates - 1| = " +
                          std::to_string(std::abs(sum - 1.0)));

  sol.rates = r;
  sol.dual = mu;
  sol.caps_bind = false;
  return sol;
}

inline double lower_bound(const RateSolution& sol, const NetworkConfig& cfg) {
  return weighted_age_bound(sol.rates, cfg);
}

// Exhaustive grid check that no feasible rate vector beats the candidate by
// more than `tol`. Exponential in N, so only tiny networks are allowed.
inline bool verify_rates(const NetworkConfig& cfg, const RateSolution& sol,
                         double grid_step, double tol = 1e-9) {
  cfg.validate();
  const int n = cfg.n();
  if (n > 4) throw budget_error("rate grid search limited to 4 nodes");

  std::vector<std::vector<double>> axis(n);
  for (int i = 0; i < n; ++i) {
    const double cap = 1.0 / cfg.nodes[i].proc_time;
    for (double v = grid_step; v < cap; v += grid_step) axis[i].push_back(v);
    axis[i].push_back(cap);
  }

  const double candidate = weighted_age_bound(sol.rates, cfg);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> pick(n);

  std::function<void(int, double)> enumerate = [&](int i, double used) {
    if (i == n) {
      best = std::min(best, weighted_age_bound(pick, cfg));
      return;
    }
    for (double v : axis[i]) {
      if (used + v > 1.0 + 1e-12) break;
      pick[i] = v;
      enumerate(i + 1, used + v);
    }
  };
  enumerate(0, 0.0);

  return best >= candidate - tol;
}

}  // namespace aoip
