#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include <aoip/model.hpp>

using namespace aoip;

namespace {

// Reference dynamics computed straight from the slot recurrences, keeping
// the whole transmission history instead of scheduled completions:
//   z(t+1) = 1 if u(t)=1 else z(t)+1
//   a(t+1) = tau+1 if u(t-tau)=1 and the processor was free then, else a(t)+1
//   busy(s) = 1 exactly on slots s0+1 .. s0+tau-1 after an accepted send s0.
struct RefTrace {
  // indexed [t][i], valid for t = 1..T+1 (ages) and 1..T+1 (busy)
  std::vector<std::vector<i64>> z, a;
  std::vector<std::vector<char>> busy;
};

RefTrace reference_trace(const NetworkConfig& cfg,
                         const std::vector<Decision>& decisions) {
  const int n = cfg.n();
  const i64 T = i64(decisions.size());
  RefTrace r;
  r.z.assign(size_t(T) + 2, std::vector<i64>(n, 0));
  r.a.assign(size_t(T) + 2, std::vector<i64>(n, 0));
  r.busy.assign(size_t(T) + 2, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) r.z[1][i] = r.a[1][i] = 1;

  for (i64 t = 1; t <= T; ++t) {
    const Decision& d = decisions[size_t(t - 1)];
    // busy windows from accepted transmissions, marked forward
    if (!d.idle()) {
      const int i = d.transmitter;
      if (!r.busy[size_t(t)][i]) {
        for (i64 s = t + 1; s <= std::min(t + cfg.nodes[i].proc_time - 1, T + 1); ++s)
          r.busy[size_t(s)][i] = 1;
      }
    }
    for (int i = 0; i < n; ++i) {
      const bool u = !d.idle() && d.transmitter == i;
      r.z[size_t(t + 1)][i] = u ? 1 : r.z[size_t(t)][i] + 1;

      const i64 s = t + 1 - cfg.nodes[i].proc_time - 1;  // send slot feeding t+1
      bool fresh = false;
      if (s >= 1) {
        const Decision& ds = decisions[size_t(s - 1)];
        fresh = !ds.idle() && ds.transmitter == i && !r.busy[size_t(s)][i];
      }
      r.a[size_t(t + 1)][i] =
          fresh ? cfg.nodes[i].proc_time + 1 : r.a[size_t(t)][i] + 1;
    }
  }
  return r;
}

}  // namespace

TEST_CASE("initial state has unit ages and free processors") {
  NetworkConfig cfg{{{1.0, 2}, {2.0, 5}}};
  const SystemState s = initial_state(cfg);
  REQUIRE(s.slot == 1);
  REQUIRE(s.aoiu == std::vector<i64>{1, 1});
  REQUIRE(s.aoip == std::vector<i64>{1, 1});
  REQUIRE_FALSE(is_wasteful(s, 0));
  REQUIRE_FALSE(is_wasteful(s, 1));
}

TEST_CASE("initial age overrides") {
  NetworkConfig cfg{{{1.0, 2}}};
  const SystemState s = initial_state(cfg, {5}, {9});
  REQUIRE(s.aoiu == std::vector<i64>{5});
  REQUIRE(s.aoip == std::vector<i64>{9});
  REQUIRE_THROWS_AS(initial_state(cfg, {1, 2}), config_error);
}

TEST_CASE("config validation") {
  REQUIRE_THROWS_AS(NetworkConfig{}.validate(), config_error);
  REQUIRE_THROWS_AS((NetworkConfig{{{0.0, 2}}}).validate(), config_error);
  REQUIRE_THROWS_AS((NetworkConfig{{{-1.0, 2}}}).validate(), config_error);
  REQUIRE_THROWS_AS((NetworkConfig{{{1.0, 0}}}).validate(), config_error);
  REQUIRE_NOTHROW((NetworkConfig{{{1.0, 1}}}).validate());
}

TEST_CASE("processed age resets tau+1 slots after an accepted send") {
  // tau = 2, send in slot 1: busy exactly in slot 2, refreshed value visible
  // from slot 4 on (ages 1,2,3 were plain increments until then).
  NetworkConfig cfg{{{1.0, 2}}};
  SystemState s = initial_state(cfg);
  advance_state(s, Decision::transmit(0), cfg);  // slot 1
  REQUIRE(s.aoiu == std::vector<i64>{1});
  REQUIRE(s.aoip == std::vector<i64>{2});
  REQUIRE(is_wasteful(s, 0));  // slot 2: processor busy
  advance_state(s, Decision::idle_slot(), cfg);
  REQUIRE_FALSE(is_wasteful(s, 0));  // slot 3: free again
  REQUIRE(s.aoip == std::vector<i64>{3});
  advance_state(s, Decision::idle_slot(), cfg);
  REQUIRE(s.slot == 4);
  REQUIRE(s.aoip == std::vector<i64>{3});  // reset lands here: 2+1
  advance_state(s, Decision::idle_slot(), cfg);
  REQUIRE(s.aoip == std::vector<i64>{4});
}

TEST_CASE("wasteful send resets the source age but not the processor") {
  // tau = 4, accepted send at t=4, wasteful one at t=7 while still busy.
  NetworkConfig cfg{{{1.0, 4}}};
  SystemState s = initial_state(cfg);
  for (i64 t = 1; t <= 3; ++t) advance_state(s, Decision::idle_slot(), cfg);
  advance_state(s, Decision::transmit(0), cfg);  // t = 4, accepted
  REQUIRE(s.slot == 5);
  REQUIRE(is_wasteful(s, 0));  // busy slots 5..7
  advance_state(s, Decision::idle_slot(), cfg);
  advance_state(s, Decision::idle_slot(), cfg);
  REQUIRE(s.slot == 7);
  REQUIRE(is_wasteful(s, 0));
  advance_state(s, Decision::transmit(0), cfg);  // t = 7, dropped on arrival
  REQUIRE(s.aoiu == std::vector<i64>{1});        // source age still resets
  REQUIRE(s.aoip == std::vector<i64>{8});        // monitor age unaffected
  REQUIRE_FALSE(is_wasteful(s, 0));              // slot 8: free
  advance_state(s, Decision::idle_slot(), cfg);  // t = 8
  REQUIRE(s.slot == 9);
  REQUIRE(s.aoip == std::vector<i64>{5});  // refresh from the t=4 send: 4+1
}

TEST_CASE("tau=1 node can deliver every slot") {
  NetworkConfig cfg{{{1.0, 1}}};
  SystemState s = initial_state(cfg);
  std::vector<i64> seen_aoip;
  for (i64 t = 1; t <= 6; ++t) {
    REQUIRE_FALSE(is_wasteful(s, 0));
    advance_state(s, Decision::transmit(0), cfg);
    seen_aoip.push_back(s.aoip[0]);
  }
  // a = 2 from slot 3 on: each send refreshes two slots later
  REQUIRE(seen_aoip == std::vector<i64>{2, 2, 2, 2, 2, 2});
}

TEST_CASE("back-to-back sends on the completion slot") {
  // tau = 2: send at t=1, processor frees at t=3; sending again right there
  // must both fire the first refresh (at t=4) and accept the new packet.
  NetworkConfig cfg{{{1.0, 2}}};
  SystemState s = initial_state(cfg);
  advance_state(s, Decision::transmit(0), cfg);
  advance_state(s, Decision::idle_slot(), cfg);
  REQUIRE(s.slot == 3);
  advance_state(s, Decision::transmit(0), cfg);  // t = 3
  REQUIRE(s.aoip == std::vector<i64>{3});        // refresh from t=1
  advance_state(s, Decision::idle_slot(), cfg);  // t = 4
  advance_state(s, Decision::idle_slot(), cfg);  // t = 5
  REQUIRE(s.slot == 6);
  REQUIRE(s.aoip == std::vector<i64>{3});  // refresh from t=3 landed at t=6
}

TEST_CASE("step_state is the value-level twin of advance_state") {
  NetworkConfig cfg{{{1.0, 3}, {2.0, 1}}};
  SystemState s = initial_state(cfg);
  const SystemState next = step_state(s, Decision::transmit(1), cfg);
  REQUIRE(s.slot == 1);  // untouched
  REQUIRE(next.slot == 2);
  REQUIRE(next.aoiu[1] == 1);
}

TEST_CASE("decision beyond the network is rejected") {
  NetworkConfig cfg{{{1.0, 2}}};
  SystemState s = initial_state(cfg);
  REQUIRE_THROWS_AS(advance_state(s, Decision::transmit(3), cfg), config_error);
}

TEST_CASE("state transitions match the literal recurrences on random runs") {
  std::mt19937 rng(12345);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 1 + int(rng() % 4);
    NetworkConfig cfg;
    for (int i = 0; i < n; ++i)
      cfg.nodes.push_back({1.0 + double(rng() % 8), 1 + i64(rng() % 6)});

    const i64 T = 200;
    std::vector<Decision> decisions;
    for (i64 t = 0; t < T; ++t) {
      // idle sometimes, otherwise any node, busy or not (wasteful included)
      const int pick = int(rng() % unsigned(n + 1));
      decisions.push_back(pick == n ? Decision::idle_slot()
                                    : Decision::transmit(pick));
    }

    const RefTrace ref = reference_trace(cfg, decisions);
    SystemState s = initial_state(cfg);
    for (i64 t = 1; t <= T; ++t) {
      for (int i = 0; i < n; ++i) {
        INFO("rep " << rep << " slot " << t << " node " << i);
        REQUIRE(s.aoiu[i] == ref.z[size_t(t)][i]);
        REQUIRE(s.aoip[i] == ref.a[size_t(t)][i]);
        REQUIRE(is_wasteful(s, i) == bool(ref.busy[size_t(t)][i]));
      }
      advance_state(s, decisions[size_t(t - 1)], cfg);
    }
  }
}
