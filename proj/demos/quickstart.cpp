// Minimal library walkthrough: three nodes, solve the rate program, run each
// policy for a while, and compare against the bound and the exact optimum.

#include <cstdio>

#include <aoip/engine.hpp>
#include <aoip/oracle.hpp>

int main() {
  using namespace aoip;

  NetworkConfig net;
  net.nodes = {{20.0, 2}, {5.0, 2}, {1.0, 4}};

  const RateSolution sol = solve_rates(net);
  const double lb = lower_bound(sol, net);
  std::printf("rates:");
  for (double r : sol.rates) std::printf(" %.6f", r);
  std::printf("\nlower bound: %.6f\n", lb);

  for (const char* name : {"power2", "backoff", "maxweight"}) {
    auto policy = make_policy(name, net, sol);
    const RunReport rep = run(net, *policy, 200'000);
    std::printf("%-9s awsaoip %.4f  (%.3fx bound)\n", name, rep.awsaoip,
                rep.awsaoip / lb);
  }

  const OracleResult orc = optimal_average_cost(net);
  std::printf("exact optimum %.6f (%lld states)\n", orc.g_star,
              static_cast<long long>(orc.states));
  return 0;
}
