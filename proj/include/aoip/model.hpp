#pragma once

// Slotted-time model of N sources sharing one wireless channel, each feeding
// its own non-preemptive processor. At most one node transmits per slot. A
// node whose processor is still busy may transmit anyway, but the packet is
// dropped on arrival (a wasteful transmission).
//
// Two ages are tracked per node, both in slots:
//   aoiu  age of the newest information available at the source side: resets
//         to 1 the slot after any transmission, wasteful or not.
//   aoip  age of the information last processed at the monitor. A packet
//         transmitted in slot t into a free processor occupies it through
//         slot t+tau-1 and the refreshed value tau+1 becomes visible in slot
//         t+tau+1.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"

namespace aoip {

using i64 = std::int64_t;

struct NodeConfig {
  double weight = 1.0;  // importance w > 0
  i64 proc_time = 1;    // processor slots per packet, tau >= 1
};

struct NetworkConfig {
  std::vector<NodeConfig> nodes;

  int n() const { return static_cast<int>(nodes.size()); }

  void validate() const {
    if (nodes.empty()) throw config_error("network needs at least one node");
    for (size_t i = 0; i < nodes.size(); ++i) {
      const auto& nd = nodes[i];
      if (!(nd.weight > 0.0) || !std::isfinite(nd.weight))
        throw config_error("node " + std::to_string(i) +
                           ": weight must be finite and > 0");
      if (nd.proc_time < 1)
        throw config_error("node " + std::to_string(i) +
                           ": proc_time must be >= 1");
    }
  }
};

// One slot's scheduling decision: idle, or transmit from a single node.
// The single-transmitter interference constraint is enforced by the type.
struct Decision {
  int transmitter = -1;  // node index, -1 when the channel stays idle

  bool idle() const { return transmitter < 0; }
  static Decision idle_slot() { return {}; }
  static Decision transmit(int node) { return {node}; }

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Snapshot at the start of slot `slot` (slots are 1-based).
// busy_until[i] is the first slot in which node i's processor is free again;
// completion_at[i] is the slot in which aoip[i] next resets (0 = no packet in
// service).
struct SystemState {
  i64 slot = 1;
  std::vector<i64> aoiu;
  std::vector<i64> aoip;
  std::vector<i64> busy_until;
  std::vector<i64> completion_at;
};

inline SystemState initial_state(const NetworkConfig& cfg,
                                 const std::vector<i64>& aoiu0 = {},
                                 const std::vector<i64>& aoip0 = {}) {
  cfg.validate();
  const size_t n = cfg.nodes.size();
  if (!aoiu0.empty() && aoiu0.size() != n)
    throw config_error("initial aoiu override has wrong length");
  if (!aoip0.empty() && aoip0.size() != n)
    throw config_error("initial aoip override has wrong length");
  SystemState s;
  s.slot = 1;
  s.aoiu = aoiu0.empty() ? std::vector<i64>(n, 1) : aoiu0;
  s.aoip = aoip0.empty() ? std::vector<i64>(n, 1) : aoip0;
  s.busy_until.assign(n, 0);
  s.completion_at.assign(n, 0);
  return s;
}

// True when node's processor is busy in the current slot, i.e. a transmission
// from it right now would be dropped.
inline bool is_wasteful(const SystemState& s, int node) {
  return s.slot < s.busy_until[node];
}

// Advances the state by one slot in place, applying `d` during slot s.slot.
inline void advance_state(SystemState& s, const Decision& d,
                          const NetworkConfig& cfg) {
  const i64 t = s.slot;
  const int n = cfg.n();

  for (int i = 0; i < n; ++i) {
    // Completions scheduled for slot t+1 fire before anything else; a new
    // transmission this slot can only schedule one for t+tau+1 >= t+2.
    if (s.completion_at[i] == t + 1) {
      s.aoip[i] = cfg.nodes[i].proc_time + 1;
      s.completion_at[i] = 0;
    } else {
      s.aoip[i] += 1;
    }
    s.aoiu[i] += 1;
  }

  if (!d.idle()) {
    const int j = d.transmitter;
    if (j >= n) throw config_error("decision names node beyond the network");
    if (t >= s.busy_until[j]) {  // processor free: packet accepted
      s.busy_until[j] = t + cfg.nodes[j].proc_time;
      s.completion_at[j] = t + cfg.nodes[j].proc_time + 1;
    }
    // A busy processor drops the packet; only the source-side age resets.
    s.aoiu[j] = 1;
  }

  s.slot = t + 1;
}

// Value-level variant of advance_state.
inline SystemState step_state(const SystemState& s, const Decision& d,
                              const NetworkConfig& cfg) {
  SystemState next = s;
  advance_state(next, d, cfg);
  return next;
}

}  // namespace aoip
