#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <aoip/engine.hpp>
#include <aoip/oracle.hpp>

using namespace aoip;
using Catch::Approx;

TEST_CASE("single node optima are the closed-form sawtooth values") {
  SECTION("tau 1: serve every slot") {
    NetworkConfig cfg{{{1.0, 1}}};
    const OracleResult r = optimal_average_cost(cfg);
    REQUIRE(r.g_star == Approx(2.0).margin(1e-6));
    REQUIRE(r.greedy_cycle_cost == Approx(2.0).margin(1e-12));
    REQUIRE(r.cycle_length == 1);
    REQUIRE_FALSE(r.cap_hit);
    REQUIRE(r.g_star == Approx(lower_bound(solve_rates(cfg), cfg)).margin(1e-6));
  }
  SECTION("tau 2: serve every other slot") {
    NetworkConfig cfg{{{1.0, 2}}};
    const OracleResult r = optimal_average_cost(cfg);
    REQUIRE(r.g_star == Approx(3.5).margin(1e-6));
    REQUIRE(r.cycle_length == 2);
    REQUIRE(r.z_max_used == 8);  // 4 * ceil(1/r) at r = 1/2
    REQUIRE(r.g_star == Approx(lower_bound(solve_rates(cfg), cfg)).margin(1e-6));
  }
}

TEST_CASE("two equal tau-2 nodes: alternation is optimal and meets the bound") {
  NetworkConfig cfg{{{1.0, 2}, {1.0, 2}}};
  const OracleResult r = optimal_average_cost(cfg);
  REQUIRE(r.g_star == Approx(3.5).margin(1e-6));
  REQUIRE(r.greedy_cycle_cost == Approx(r.g_star).margin(1e-6));
  REQUIRE_FALSE(r.cap_hit);
  REQUIRE(r.g_star == Approx(lower_bound(solve_rates(cfg), cfg)).margin(1e-6));
}

TEST_CASE("unequal service times open a gap above the convex bound") {
  NetworkConfig cfg{{{1.0, 2}, {1.0, 3}}};
  const double lb = lower_bound(solve_rates(cfg), cfg);
  REQUIRE(lb == Approx(4.25));
  const OracleResult r = optimal_average_cost(cfg);
  REQUIRE(r.g_star == Approx(4.5).margin(1e-6));
  REQUIRE(r.g_star > lb + 0.2);
  // and the best short cyclic schedule attains the optimum exactly
  const CyclicResult cyc = best_cyclic_schedule(cfg, 6);
  REQUIRE(cyc.awsaoip == Approx(4.5).margin(1e-12));
  REQUIRE(cyc.schedule.size() == 3);
}

TEST_CASE("mixed tau (1,2): bound, optimum and best cycle all coincide") {
  NetworkConfig cfg{{{1.0, 1}, {1.0, 2}}};
  const double lb = lower_bound(solve_rates(cfg), cfg);
  REQUIRE(lb == Approx(3.0));
  const OracleResult r = optimal_average_cost(cfg);
  REQUIRE(r.g_star == Approx(3.0).margin(1e-6));
  REQUIRE(best_cyclic_schedule(cfg, 6).awsaoip == Approx(3.0).margin(1e-12));
}

TEST_CASE("greedy limit cycle reproduces the value-iteration average") {
  for (const NetworkConfig& cfg :
       {NetworkConfig{{{1.0, 1}, {2.0, 2}}}, NetworkConfig{{{3.0, 2}, {1.0, 4}}},
        NetworkConfig{{{1.0, 2}, {1.0, 2}, {1.0, 2}}}}) {
    const OracleResult r = optimal_average_cost(cfg);
    REQUIRE(std::abs(r.greedy_cycle_cost - r.g_star) <= 1e-6);
    REQUIRE(r.hi - r.lo <= 1e-9);
    REQUIRE_FALSE(r.cap_hit);
  }
}

TEST_CASE("aoiu cap truncation is flagged") {
  // near-zero weight starves node 1; its aoiu should grow far past 4
  NetworkConfig cfg{{{1.0, 1}, {1e-4, 1}}};
  OracleOptions opts;
  opts.z_max = 4;
  const OracleResult r = optimal_average_cost(cfg, opts);
  REQUIRE(r.cap_hit);
}

TEST_CASE("auto cap shrinks to the state budget") {
  NetworkConfig cfg{{{1.0, 1}, {1.0, 1}}};
  OracleOptions opts;
  opts.state_budget = 100;
  const OracleResult r = optimal_average_cost(cfg, opts);
  REQUIRE(r.z_max_used == 10);  // largest cap with z^2 <= 100
  REQUIRE(r.states == 100);
  REQUIRE_FALSE(r.cap_hit);  // alternation never ages past 2
  REQUIRE(r.g_star == Approx(2.5).margin(1e-6));
}

TEST_CASE("oracle guardrails") {
  SECTION("explicit state space over budget") {
    NetworkConfig cfg{{{1.0, 4}, {1.0, 4}, {1.0, 4}}};
    OracleOptions opts;
    opts.z_max = 100;
    REQUIRE_THROWS_AS(optimal_average_cost(cfg, opts), budget_error);
  }
  SECTION("cap below the safe floor") {
    NetworkConfig cfg{{{1.0, 2}}};
    OracleOptions opts;
    opts.z_max = 4;  // floor is 4 * tau = 8
    REQUIRE_THROWS_AS(optimal_average_cost(cfg, opts), config_error);
  }
  SECTION("iteration ceiling") {
    NetworkConfig cfg{{{1.0, 2}, {1.0, 3}}};
    OracleOptions opts;
    opts.max_iterations = 2;
    REQUIRE_THROWS_AS(optimal_average_cost(cfg, opts), numerical_error);
  }
}

TEST_CASE("explicit-aoip twin lands on the same optimum") {
  SECTION("single node, tau 2") {
    NetworkConfig cfg{{{1.0, 2}}};
    const OracleResult r = exact_aoip_average_cost(cfg, 12, 14);
    REQUIRE(r.g_star == Approx(3.5).margin(1e-6));
    REQUIRE_FALSE(r.cap_hit);
  }
  SECTION("two nodes, tau (1,2)") {
    NetworkConfig cfg{{{1.0, 1}, {1.0, 2}}};
    const OracleResult r = exact_aoip_average_cost(cfg, 8, 10);
    REQUIRE(r.g_star == Approx(3.0).margin(1e-6));
    REQUIRE(r.greedy_cycle_cost == Approx(3.0).margin(1e-6));
  }
  SECTION("argument guardrails") {
    NetworkConfig cfg{{{1.0, 2}}};
    REQUIRE_THROWS_AS(exact_aoip_average_cost(cfg, 1, 10), config_error);
    REQUIRE_THROWS_AS(exact_aoip_average_cost(cfg, 8, 4), config_error);
    NetworkConfig slow{{{1.0, 9}}};
    REQUIRE_THROWS_AS(exact_aoip_average_cost(slow, 9, 9), config_error);
    NetworkConfig two{{{1.0, 2}, {1.0, 2}}};
    REQUIRE_THROWS_AS(exact_aoip_average_cost(two, 20, 20), budget_error);
  }
}

TEST_CASE("cyclic search") {
  SECTION("weights scale the cost linearly") {
    const CyclicResult r = best_cyclic_schedule({{{2.0, 2}}}, 4);
    REQUIRE(r.awsaoip == Approx(7.0).margin(1e-12));
    REQUIRE(r.schedule.size() == 2);
  }
  SECTION("the found schedule simulates to its promised cost") {
    NetworkConfig cfg{{{1.0, 2}, {1.0, 3}}};
    const CyclicResult r = best_cyclic_schedule(cfg, 6);
    CyclicSchedulePolicy pol(r.schedule);
    const RunReport rep = run(cfg, pol, 600000);
    REQUIRE(rep.awsaoip == Approx(r.awsaoip).margin(1e-3));
  }
  SECTION("enumeration budget") {
    NetworkConfig cfg{{{20.0, 2}, {5.0, 2}, {1.0, 4}}};
    REQUIRE_THROWS_AS(best_cyclic_schedule(cfg, 8, 100), budget_error);
  }
  SECTION("no feasible pattern within the period limit") {
    NetworkConfig cfg{{{1.0, 5}}};
    REQUIRE_THROWS_AS(best_cyclic_schedule(cfg, 3), config_error);
  }
  SECTION("bad period limit") {
    NetworkConfig cfg{{{1.0, 1}}};
    REQUIRE_THROWS_AS(best_cyclic_schedule(cfg, 0), config_error);
  }
}

TEST_CASE("oracle cost sits between the bound and every policy") {
  NetworkConfig cfg{{{20.0, 2}, {5.0, 2}, {1.0, 4}}};
  const RateSolution sol = solve_rates(cfg);
  const double lb = lower_bound(sol, cfg);
  const OracleResult r = optimal_average_cost(cfg);
  REQUIRE(lb <= r.g_star + 1e-6);
  for (const std::string name : {"power2", "backoff", "maxweight"}) {
    auto pol = make_policy(name, cfg, sol);
    const RunReport rep = run(cfg, *pol, 200000);
    INFO("policy " << name);
    REQUIRE(r.g_star <= rep.awsaoip + 0.01);
    REQUIRE(rep.awsaoip <= 2.0 * r.g_star + 0.01);
  }
}
