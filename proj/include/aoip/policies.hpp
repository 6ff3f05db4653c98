#pragma once

// The three drop-free scheduling policies, all driven by the solved rates:
//
//   power2    fixed calendar; node i fires every P_i slots (P_i a power of
//             two >= 1/r_i) at an offset chosen so calendars never collide.
//   backoff   distributed countdowns; after transmitting, a node stays off
//             the air for ceil(1/r_i)-1 slots, then counts down again. The
//             node with the smallest live countdown transmits.
//   maxweight centralized index rule; among nodes whose processor is free,
//             transmit the one maximizing alpha_i * aoiu_i.
//
// All three only ever transmit into a free processor, so no packet is
// dropped and the realized per-node rates track the solved ones.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"
#include "rate_solver.hpp"

namespace aoip {

// 1/r computed in floating point can land a hair off an integer (e.g.
// 4.0000000001); snap before taking ceilings so the period doesn't double.
inline double snap_to_integer(double x) {
  const double r = std::round(x);
  if (r > 0.0 && std::abs(x - r) < 1e-9 * x) return r;
  return x;
}

inline i64 ceil_snapped(double x) {
  return static_cast<i64>(std::ceil(snap_to_integer(x)));
}

inline i64 pow2_at_least(double x) {
  const double s = snap_to_integer(x);
  i64 p = 1;
  while (static_cast<double>(p) < s) {
    if (p > (i64{1} << 61)) throw numerical_error("power-of-two period overflow");
    p <<= 1;
  }
  return p;
}

struct Power2Schedule {
  std::vector<i64> period;      // per node, a power of two
  std::vector<i64> basic_time;  // per node, first firing slot in 1..period
};

// Assigns offsets greedily in order of decreasing rate: each node takes the
// smallest slot in 1..P_i not claimed (mod their periods) by earlier nodes.
// With power-of-two periods and sum 1/P_i <= 1 a free slot always exists.
inline Power2Schedule build_power2(const std::vector<double>& rates) {
  const int n = static_cast<int>(rates.size());
  Power2Schedule sched;
  sched.period.resize(n);
  sched.basic_time.assign(n, 0);

  for (int i = 0; i < n; ++i) {
    if (!(rates[i] > 0.0)) throw config_error("power2 needs positive rates");
    sched.period[i] = pow2_at_least(1.0 / rates[i]);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rates[a] > rates[b]; });

  std::vector<int> placed;
  for (int i : order) {
    const i64 p = sched.period[i];
    i64 chosen = 0;
    for (i64 t = 1; t <= p && chosen == 0; ++t) {
      bool free = true;
      for (int j : placed) {
        if ((t - sched.basic_time[j]) % sched.period[j] == 0) {
          free = false;
          break;
        }
      }
      if (free) chosen = t;
    }
    if (chosen == 0)
      throw numerical_error("no collision-free offset for node " +
                            std::to_string(i));
    sched.basic_time[i] = chosen;
    placed.push_back(i);
  }
  return sched;
}

// Node firing in `slot`, or -1. Offsets are collision-free by construction,
// so at most one calendar matches.
inline int power2_transmitter(const Power2Schedule& sched, i64 slot) {
  const int n = static_cast<int>(sched.period.size());
  for (int i = 0; i < n; ++i) {
    if ((slot - sched.basic_time[i]) % sched.period[i] == 0) return i;
  }
  return -1;
}

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Decision decide(const SystemState& s) = 0;
  virtual std::string name() const = 0;
};

class Power2Policy : public Policy {
 public:
  explicit Power2Policy(Power2Schedule sched) : sched_(std::move(sched)) {
    // All periods are powers of two, so one table covering the longest
    // period replays the whole calendar with a mask lookup.
    i64 span = 1;
    for (i64 p : sched_.period) span = std::max(span, p);
    calendar_.assign(size_t(span), -1);
    for (i64 m = 0; m < span; ++m) {
      calendar_[size_t(m)] = power2_transmitter(sched_, m + span);
    }
    mask_ = span - 1;
  }
  Power2Policy(const NetworkConfig& cfg, const RateSolution& sol)
      : Power2Policy(build_power2(sol.rates)) {
    (void)cfg;
  }

  Decision decide(const SystemState& s) override {
    const int j = calendar_[size_t(s.slot & mask_)];
    return j < 0 ? Decision::idle_slot() : Decision::transmit(j);
  }
  std::string name() const override { return "power2"; }
  const Power2Schedule& schedule() const { return sched_; }

 private:
  Power2Schedule sched_;
  std::vector<int> calendar_;
  i64 mask_ = 0;
};

class BackOffPolicy : public Policy {
 public:
  BackOffPolicy(const NetworkConfig& cfg, const RateSolution& sol)
      : expected_slot_(1) {
    const int n = cfg.n();
    delay_.resize(n);
    for (int i = 0; i < n; ++i) {
      delay_[i] = ceil_snapped(1.0 / sol.rates[i]);
      if (delay_[i] < cfg.nodes[i].proc_time)
        throw config_error("back-off delay below processing time");
    }
    backoff_until_.assign(n, 1);  // everyone live from slot 1
    countdown_ = delay_;
  }

  // A node is backed off (countdown hidden) until its own next-eligible slot.
  bool backed_off(const SystemState& s, int i) const {
    return s.slot < backoff_until_[i];
  }
  std::optional<i64> countdown_of(const SystemState& s, int i) const {
    if (backed_off(s, i)) return std::nullopt;
    return countdown_[i];
  }
  const std::vector<i64>& delays() const { return delay_; }

  Decision decide(const SystemState& s) override {
    if (s.slot != expected_slot_)
      throw invariant_violation("backoff policy driven out of slot order");
    const int n = static_cast<int>(delay_.size());

    int j = -1;
    for (int i = 0; i < n; ++i) {
      if (s.slot < backoff_until_[i]) continue;
      if (j < 0 || countdown_[i] < countdown_[j]) j = i;
    }
    // The countdown of a live node never reaches zero: its back-off is
    // exactly long enough that it wins (or ties into) the argmin in time.
    if (j >= 0 && countdown_[j] < 1)
      throw invariant_violation("countdown expired unserved at slot " +
                                std::to_string(s.slot) + ", node " +
                                std::to_string(j));

    for (int i = 0; i < n; ++i) {
      if (i != j && s.slot >= backoff_until_[i]) countdown_[i] -= 1;
    }
    if (j >= 0) {
      // Off the air for delay-1 slots; the countdown re-emerges at full
      // value when the back-off expires.
      backoff_until_[j] = s.slot + delay_[j];
      countdown_[j] = delay_[j];
    }
    expected_slot_ += 1;
    return j < 0 ? Decision::idle_slot() : Decision::transmit(j);
  }
  std::string name() const override { return "backoff"; }

 private:
  std::vector<i64> delay_;
  std::vector<i64> backoff_until_;
  std::vector<i64> countdown_;
  i64 expected_slot_;
};

class MaxWeightPolicy : public Policy {
 public:
  MaxWeightPolicy(const NetworkConfig& cfg, const RateSolution& sol,
                  std::vector<double> alphas = {}) {
    const int n = cfg.n();
    if (alphas.empty()) {
      alphas.resize(n);
      for (int i = 0; i < n; ++i)
        alphas[i] = cfg.nodes[i].weight / sol.rates[i];
    } else if (static_cast<int>(alphas.size()) != n) {
      throw config_error("alpha override has wrong length");
    }
    alpha_ = std::move(alphas);
  }

  Decision decide(const SystemState& s) override {
    const int n = static_cast<int>(alpha_.size());
    int j = -1;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      if (s.slot < s.busy_until[i]) continue;  // would be wasteful
      const double score = alpha_[i] * static_cast<double>(s.aoiu[i]);
      if (score > best) {  // strict: ties go to the lowest index
        best = score;
        j = i;
      }
    }
    return j < 0 ? Decision::idle_slot() : Decision::transmit(j);
  }
  std::string name() const override { return "maxweight"; }
  const std::vector<double>& alphas() const { return alpha_; }

 private:
  std::vector<double> alpha_;
};

// Replays a fixed cycle of decisions; lets oracle-found schedules run
// through the same engine as the live policies.
class CyclicSchedulePolicy : public Policy {
 public:
  explicit CyclicSchedulePolicy(std::vector<Decision> cycle,
                                std::string label = "cyclic")
      : cycle_(std::move(cycle)), label_(std::move(label)) {
    if (cycle_.empty()) throw config_error("cyclic schedule needs >= 1 slot");
  }
  Decision decide(const SystemState& s) override {
    return cycle_[static_cast<size_t>((s.slot - 1) % i64(cycle_.size()))];
  }
  std::string name() const override { return label_; }

 private:
  std::vector<Decision> cycle_;
  std::string label_;
};

inline std::unique_ptr<Policy> make_policy(const std::string& name,
                                           const NetworkConfig& cfg,
                                           const RateSolution& sol,
                                           std::vector<double> alphas = {}) {
  if (name == "power2") return std::make_unique<Power2Policy>(cfg, sol);
  if (name == "backoff") return std::make_unique<BackOffPolicy>(cfg, sol);
  if (name == "maxweight")
    return std::make_unique<MaxWeightPolicy>(cfg, sol, std::move(alphas));
  throw config_error("unknown policy '" + name + "'");
}

}  // namespace aoip
