// specshare: run experiments, check the stability properties, sweep K x L.
//
// Exit status: 0 success, 1 configuration or usage error, 2 runtime error
// (including a failed property under `verify`).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specshare/specshare.hpp"
#include "specshare/verify.hpp"

namespace {

using namespace specshare;

struct CommonFlags {
  std::string config;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> solver;
  std::optional<std::string> power;
  std::optional<int> workers;
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "config file (key = value lines)");
  cmd->add_option("--samples", f.samples, "number of Monte Carlo samples");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--solver", f.solver, "greedy | mcmc");
  cmd->add_option("--power", f.power, "uniform | full | qlearning");
  cmd->add_option("--workers", f.workers, "worker threads (SPECTRUM_SIM_WORKERS overrides)");
  cmd->add_option("--out", f.out, "output directory");
}

SimConfig build_config(const CommonFlags& f) {
  SimConfig c = f.config.empty() ? SimConfig{} : load_config(f.config);
  if (f.samples) c.samples = *f.samples;
  if (f.seed) c.seed = *f.seed;
  if (f.solver) c.solver = parse_solver(*f.solver);
  if (f.power) c.power_mode = parse_power_mode(*f.power);
  if (f.workers) c.workers = *f.workers;
  return c;
}

int cmd_run(const CommonFlags& f) {
  const SimConfig cfg = build_config(f);
  const Scenario sc = resolve(cfg);
  const ExperimentResult res = run_experiment(sc);
  emit_results(res, cfg, f.out);
  std::printf("samples %zu  mean welfare %.6g  per-OP %.6g  -> %s\n", res.samples.size(), res.mean_welfare,
              res.per_op_welfare, f.out.c_str());
  return 0;
}

int cmd_verify(int instances, long swaps, std::uint64_t seed, const std::string& model) {
  const DesirabilityKind kind = parse_desirability(model);
  const std::vector<PropertyReport> reports{
      check_theorem1(instances, seed, kind),
      check_corollary1(instances, seed + 1, kind),
      check_lemma2(swaps, seed + 2, kind),
      check_lemma1(instances, seed + 3),
  };
  bool ok = true;
  for (const auto& r : reports) {
    std::printf("%s: %s (%ld checked, %ld counterexamples)\n", r.name.c_str(), r.pass() ? "PASS" : "FAIL", r.checked,
                r.counterexamples);
    if (!r.pass() && !r.first_failure.empty()) std::printf("  first: %s\n", r.first_failure.c_str());
    ok &= r.pass();
  }
  return ok ? 0 : 2;
}

// Per-operator quotas for each K of the sweep.
std::vector<int> sweep_quota(int k) {
  switch (k) {
    case 3: return {2, 3, 4};
    case 4: return {2, 5, 4, 2};
    case 5: return {2, 3, 4, 2, 2};
    case 6: return {2, 3, 4, 4, 5, 2};
    default: throw ConfigError("sweep supports K in 3..6, got " + std::to_string(k));
  }
}

int cmd_sweep(const CommonFlags& f, const std::vector<int>& ks, const std::vector<int>& ls) {
  const SimConfig base = build_config(f);
  std::filesystem::create_directories(f.out);
  const auto path = std::filesystem::path(f.out) / "sweep.csv";
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + path.string());
  csv << "K,L,mean_welfare,per_op_welfare\n";
  for (int k : ks)
    for (int l : ls) {
      SimConfig c = base;
      c.quota = sweep_quota(k);
      c.num_rbs = l;
      c.rb_capacity = {base.rb_capacity.front()};  // broadcast to every L
      const ExperimentResult res = run_experiment(resolve(c));
      char line[128];
      std::snprintf(line, sizeof line, "%d,%d,%.9g,%.9g\n", k, l, res.mean_welfare, res.per_op_welfare);
      csv << line;
      std::printf("K=%d L=%d per-OP welfare %.6g\n", k, l, res.per_op_welfare);
    }
  csv.flush();
  if (!csv) throw std::runtime_error("write failed: " + path.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-operator spectrum sharing simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "run a Monte Carlo experiment and write result tables");
  add_common(run, run_flags);

  int instances = 50;
  long swaps = 10000;
  std::uint64_t verify_seed = 1;
  std::string model = "count_only";
  auto* verify = app.add_subcommand("verify", "check the stability properties on random small instances");
  verify->add_option("--instances", instances, "instances per ledger check");
  verify->add_option("--swaps", swaps, "greedy swaps to audit");
  verify->add_option("--seed", verify_seed, "seed");
  verify->add_option("--desirability", model, "count_only | simulated");

  CommonFlags sweep_flags;
  std::vector<int> ks{3, 4, 5, 6};
  std::vector<int> ls{5, 8, 10, 14};
  auto* sweep = app.add_subcommand("sweep", "per-operator welfare over a grid of K and L");
  add_common(sweep, sweep_flags);
  sweep->add_option("--ops", ks, "values of K (3..6)")->delimiter(',');
  sweep->add_option("--rbs", ls, "values of L")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*verify) return cmd_verify(instances, swaps, verify_seed, model);
    return cmd_sweep(sweep_flags, ks, ls);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
