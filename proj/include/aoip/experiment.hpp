#pragma once

// Experiment orchestration shared by the CLI and the tests: config schema,
// presets, deterministic CSV/JSON emission, and the four subcommands.
//
// Config files are strict JSON: unknown keys are rejected with their path so
// a typo like "wieght" fails loudly instead of silently running defaults.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "engine.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "policies.hpp"
#include "rate_solver.hpp"

namespace aoip {

struct ExperimentConfig {
  NetworkConfig net;
  std::vector<std::string> policies = {"power2", "backoff", "maxweight"};
  i64 horizon = 1'000'000;
  std::vector<int> multiples = {1};
  bool checks = true;
  bool histograms = false;
  std::vector<double> alphas;  // maxweight priority override, empty = w/r
  i64 z_max = 0;               // oracle aoiu cap, 0 = auto
  int max_period = 0;          // cyclic oracle, 0 = skip
  std::string out_dir;         // empty = stdout only
  std::string format = "csv";  // csv | json

  void validate() const {
    net.validate();
    if (policies.empty()) throw config_error("$.policies: needs >= 1 entry");
    for (const auto& p : policies) {
      if (p != "power2" && p != "backoff" && p != "maxweight")
        throw config_error("$.policies: unknown policy '" + p + "'");
    }
    if (horizon < 1) throw config_error("$.horizon: must be >= 1");
    for (int m : multiples)
      if (m < 1) throw config_error("$.multiples: entries must be >= 1");
    if (multiples.empty()) throw config_error("$.multiples: needs >= 1 entry");
    if (format != "csv" && format != "json")
      throw config_error("$.format: must be 'csv' or 'json'");
    if (!alphas.empty() && alphas.size() != net.nodes.size())
      throw config_error("$.alphas: length must match $.nodes");
  }
};

// The two reference setups. fig3: five heterogeneous nodes, processing-bound
// (sum 1/tau ~ 0.108), swept by replication. fig4: one fast node next to
// eight slow ones, the histogram study.
inline ExperimentConfig preset_fig3() {
  ExperimentConfig cfg;
  cfg.net.nodes = {{4.1, 24}, {7.2, 152}, {1.1, 70}, {3.0, 37}, {1.4, 54}};
  cfg.policies = {"power2", "backoff", "maxweight"};
  cfg.horizon = 1'000'000;
  cfg.multiples.clear();
  for (int k = 1; k <= 40; ++k) cfg.multiples.push_back(k);
  return cfg;
}

inline ExperimentConfig preset_fig4() {
  ExperimentConfig cfg;
  cfg.net.nodes.assign(9, NodeConfig{1.0, 16});
  cfg.net.nodes[0] = {1.0, 2};
  cfg.policies = {"backoff", "maxweight"};
  cfg.horizon = 1'000'000;
  cfg.histograms = true;
  return cfg;
}

inline ExperimentConfig preset_by_name(const std::string& name) {
  if (name == "fig3") return preset_fig3();
  if (name == "fig4") return preset_fig4();
  throw config_error("unknown preset '" + name + "' (have: fig3, fig4)");
}

namespace detail {

using json = nlohmann::json;

inline void expect_keys(const json& obj, const std::string& path,
                        std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw config_error(path + "." + it.key() + ": unknown key");
  }
}

template <typename T>
T get_as(const json& v, const std::string& path);

template <>
inline double get_as<double>(const json& v, const std::string& path) {
  if (!v.is_number()) throw config_error(path + ": expected a number");
  return v.get<double>();
}
template <>
inline i64 get_as<i64>(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw config_error(path + ": expected an integer");
  return v.get<i64>();
}
template <>
inline bool get_as<bool>(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw config_error(path + ": expected true/false");
  return v.get<bool>();
}
template <>
inline std::string get_as<std::string>(const json& v, const std::string& path) {
  if (!v.is_string()) throw config_error(path + ": expected a string");
  return v.get<std::string>();
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::get_as;
  if (!j.is_object()) throw config_error("$: config must be a JSON object");
  detail::expect_keys(j, "$",
                      {"nodes", "policies", "horizon", "multiples", "checks",
                       "histograms", "alphas", "z_max", "max_period", "out",
                       "format"});

  ExperimentConfig cfg;
  if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].empty())
    throw config_error("$.nodes: required, non-empty array");
  cfg.net.nodes.clear();
  for (size_t i = 0; i < j["nodes"].size(); ++i) {
    const auto& nd = j["nodes"][i];
    const std::string path = "$.nodes[" + std::to_string(i) + "]";
    if (!nd.is_object()) throw config_error(path + ": expected an object");
    detail::expect_keys(nd, path, {"weight", "proc_time"});
    if (!nd.contains("weight") || !nd.contains("proc_time"))
      throw config_error(path + ": needs weight and proc_time");
    cfg.net.nodes.push_back({get_as<double>(nd["weight"], path + ".weight"),
                             get_as<i64>(nd["proc_time"], path + ".proc_time")});
  }
  if (j.contains("policies")) {
    if (!j["policies"].is_array())
      throw config_error("$.policies: expected an array");
    cfg.policies.clear();
    for (size_t i = 0; i < j["policies"].size(); ++i)
      cfg.policies.push_back(get_as<std::string>(
          j["policies"][i], "$.policies[" + std::to_string(i) + "]"));
  }
  if (j.contains("horizon")) cfg.horizon = get_as<i64>(j["horizon"], "$.horizon");
  if (j.contains("multiples")) {
    if (!j["multiples"].is_array())
      throw config_error("$.multiples: expected an array");
    cfg.multiples.clear();
    for (size_t i = 0; i < j["multiples"].size(); ++i)
      cfg.multiples.push_back(int(get_as<i64>(
          j["multiples"][i], "$.multiples[" + std::to_string(i) + "]")));
  }
  if (j.contains("checks")) cfg.checks = get_as<bool>(j["checks"], "$.checks");
  if (j.contains("histograms"))
    cfg.histograms = get_as<bool>(j["histograms"], "$.histograms");
  if (j.contains("alphas")) {
    if (!j["alphas"].is_array()) throw config_error("$.alphas: expected an array");
    for (size_t i = 0; i < j["alphas"].size(); ++i)
      cfg.alphas.push_back(get_as<double>(
          j["alphas"][i], "$.alphas[" + std::to_string(i) + "]"));
  }
  if (j.contains("z_max")) cfg.z_max = get_as<i64>(j["z_max"], "$.z_max");
  if (j.contains("max_period"))
    cfg.max_period = int(get_as<i64>(j["max_period"], "$.max_period"));
  if (j.contains("out")) cfg.out_dir = get_as<std::string>(j["out"], "$.out");
  if (j.contains("format")) cfg.format = get_as<std::string>(j["format"], "$.format");

  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

// Deterministic double formatting shared by every emitter.
inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& p,
                            const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw config_error("cannot write '" + p.string() + "'");
  out << content;
}

inline std::string rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string s = "n_nodes,policy,T,awsaoip,awsaoiu,lower_bound,ratio_to_bound\n";
  for (const auto& r : rows) {
    s += std::to_string(r.n_nodes) + "," + r.policy + "," +
         std::to_string(r.horizon) + "," + fmt_g(r.awsaoip) + "," +
         fmt_g(r.awsaoiu) + "," + fmt_g(r.lower_bound) + "," +
         fmt_g(r.ratio_to_bound) + "\n";
  }
  return s;
}

inline nlohmann::ordered_json rows_to_json(const std::vector<SweepRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["n_nodes"] = r.n_nodes;
    o["policy"] = r.policy;
    o["T"] = r.horizon;
    o["awsaoip"] = r.awsaoip;
    o["awsaoiu"] = r.awsaoiu;
    o["lower_bound"] = r.lower_bound;
    o["ratio_to_bound"] = r.ratio_to_bound;
    arr.push_back(std::move(o));
  }
  return arr;
}

inline std::string histograms_to_csv(const RunReport& rep) {
  std::string s = "node,age,frequency\n";
  for (size_t i = 0; i < rep.aoip_hist.size(); ++i) {
    for (size_t age = 0; age < rep.aoip_hist[i].size(); ++age) {
      if (rep.aoip_hist[i][age] == 0) continue;
      s += std::to_string(i) + "," + std::to_string(age) + "," +
           std::to_string(rep.aoip_hist[i][age]) + "\n";
    }
  }
  return s;
}

inline nlohmann::ordered_json report_to_json(const RunReport& rep) {
  nlohmann::ordered_json o;
  o["policy"] = rep.policy;
  o["n_nodes"] = rep.n_nodes;
  o["T"] = rep.horizon;
  o["awsaoip"] = rep.awsaoip;
  o["awsaoiu"] = rep.awsaoiu;
  o["awsaoip_first_half"] = rep.awsaoip_first_half;
  o["awsaoiu_first_half"] = rep.awsaoiu_first_half;
  o["checks_enabled"] = rep.checks_enabled;
  o["identity_checks"] = rep.identity_checks;
  o["rate"] = rep.rate;
  o["deliveries"] = rep.deliveries;
  o["attempts"] = rep.attempts;
  o["first_delivery_slot"] = rep.first_delivery_slot;
  o["min_gap"] = rep.min_gap;
  o["max_gap"] = rep.max_gap;
  o["max_aoip"] = rep.max_aoip;
  return o;
}

inline void ensure_out_dir(const ExperimentConfig& cfg) {
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);
}

// --- subcommands -----------------------------------------------------------

inline int cmd_solve(const ExperimentConfig& cfg, std::ostream& os = std::cout) {
  cfg.validate();
  const RateSolution sol = solve_rates(cfg.net);
  const double lb = lower_bound(sol, cfg.net);

  os << "nodes: " << cfg.net.n() << "\n";
  os << "caps_bind: " << (sol.caps_bind ? "true" : "false") << "\n";
  for (int i = 0; i < cfg.net.n(); ++i)
    os << "rate[" << i << "] = " << fmt_g(sol.rates[i]) << "\n";
  os << "lower_bound = " << fmt_g(lb) << "\n";

  if (!cfg.out_dir.empty()) {
    ensure_out_dir(cfg);
    nlohmann::ordered_json o;
    o["rates"] = sol.rates;
    o["dual"] = sol.dual;
    o["caps_bind"] = sol.caps_bind;
    o["lower_bound"] = lb;
    write_text_file(std::filesystem::path(cfg.out_dir) / "rates.json",
                    o.dump(2) + "\n");
  }
  return 0;
}

inline int cmd_simulate(const ExperimentConfig& cfg,
                        std::ostream& os = std::cout) {
  cfg.validate();
  const RateSolution sol = solve_rates(cfg.net);
  const double lb = lower_bound(sol, cfg.net);
  RunOptions opts{cfg.checks, cfg.histograms};

  std::vector<SweepRow> rows;
  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  std::vector<std::pair<std::string, std::string>> hist_files;
  for (const auto& pname : cfg.policies) {
    auto policy = make_policy(pname, cfg.net, sol, cfg.alphas);
    const RunReport rep = run(cfg.net, *policy, cfg.horizon, opts);
    SweepRow row;
    row.multiple = 1;
    row.n_nodes = rep.n_nodes;
    row.policy = pname;
    row.horizon = rep.horizon;
    row.awsaoip = rep.awsaoip;
    row.awsaoiu = rep.awsaoiu;
    row.lower_bound = lb;
    row.ratio_to_bound = rep.awsaoip / lb;
    rows.push_back(row);
    reports.push_back(report_to_json(rep));
    if (cfg.histograms)
      hist_files.emplace_back("histogram_" + pname + ".csv",
                              histograms_to_csv(rep));
    os << pname << ": awsaoip = " << fmt_g(rep.awsaoip)
       << ", awsaoiu = " << fmt_g(rep.awsaoiu)
       << ", ratio_to_bound = " << fmt_g(rep.awsaoip / lb) << "\n";
  }
  os << "lower_bound = " << fmt_g(lb) << "\n";

  if (!cfg.out_dir.empty()) {
    ensure_out_dir(cfg);
    const auto dir = std::filesystem::path(cfg.out_dir);
    if (cfg.format == "csv")
      write_text_file(dir / "report.csv", rows_to_csv(rows));
    else
      write_text_file(dir / "report.json", rows_to_json(rows).dump(2) + "\n");
    write_text_file(dir / "runs.json", reports.dump(2) + "\n");
    for (const auto& [name, content] : hist_files)
      write_text_file(dir / name, content);
  }
  return 0;
}

inline int cmd_sweep(const ExperimentConfig& cfg, std::ostream& os = std::cout) {
  cfg.validate();
  RunOptions opts{cfg.checks, false};
  const auto rows = sweep(cfg.net, cfg.multiples, cfg.policies, cfg.horizon, opts);
  os << rows_to_csv(rows);
  if (!cfg.out_dir.empty()) {
    ensure_out_dir(cfg);
    const auto dir = std::filesystem::path(cfg.out_dir);
    if (cfg.format == "csv")
      write_text_file(dir / "sweep.csv", rows_to_csv(rows));
    else
      write_text_file(dir / "sweep.json", rows_to_json(rows).dump(2) + "\n");
  }
  return 0;
}

inline int cmd_oracle(const ExperimentConfig& cfg, std::ostream& os = std::cout) {
  cfg.validate();
  OracleOptions oopts;
  oopts.z_max = cfg.z_max;
  const OracleResult orc = optimal_average_cost(cfg.net, oopts);
  const RateSolution sol = solve_rates(cfg.net);
  const double lb = lower_bound(sol, cfg.net);

  nlohmann::ordered_json o;
  o["g_star"] = orc.g_star;
  o["bracket_lo"] = orc.lo;
  o["bracket_hi"] = orc.hi;
  o["iterations"] = orc.iterations;
  o["states"] = orc.states;
  o["z_max"] = orc.z_max_used;
  o["cap_hit"] = orc.cap_hit;
  o["greedy_cycle_cost"] = orc.greedy_cycle_cost;
  o["cycle_length"] = orc.cycle_length;
  o["lower_bound"] = lb;

  nlohmann::ordered_json pol = nlohmann::ordered_json::object();
  bool sandwich = lb <= orc.g_star + 1e-6;
  for (const auto& pname : cfg.policies) {
    auto policy = make_policy(pname, cfg.net, sol, cfg.alphas);
    const RunReport rep = run(cfg.net, *policy, cfg.horizon,
                              RunOptions{cfg.checks, false});
    pol[pname] = rep.awsaoip;
    // Finite-horizon averages sit a transient below their limit, hence the
    // slack on both comparisons.
    sandwich = sandwich && orc.g_star <= rep.awsaoip + 0.01 &&
               rep.awsaoip <= 2.0 * orc.g_star + 0.01;
  }
  o["policy_awsaoip"] = pol;

  if (cfg.max_period > 0) {
    const CyclicResult cyc = best_cyclic_schedule(cfg.net, cfg.max_period);
    o["best_cyclic_cost"] = cyc.awsaoip;
    o["best_cyclic_period"] = i64(cyc.schedule.size());
  }
  o["sandwich_holds"] = sandwich;

  os << o.dump(2) << "\n";
  if (!cfg.out_dir.empty()) {
    ensure_out_dir(cfg);
    write_text_file(std::filesystem::path(cfg.out_dir) / "oracle.json",
                    o.dump(2) + "\n");
  }
  return 0;
}

// Exit-code mapping shared by the CLI and the process-level tests.
inline int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const invariant_violation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const budget_error& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace aoip
