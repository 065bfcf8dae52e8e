#pragma once

// Monte Carlo experiment driver: per-sample matching/learning loop, parallel
// sample execution and result files.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "specshare/channel.hpp"
#include "specshare/config.hpp"
#include "specshare/desirability.hpp"
#include "specshare/learning.hpp"
#include "specshare/matching.hpp"
#include "specshare/random.hpp"
#include "specshare/solvers.hpp"

namespace specshare {

struct WelfareTrace {
  std::uint64_t sample_id = 0;
  std::uint64_t seed = 0;
  std::vector<TracePoint> trace;  // (cumulative proposals, S) change points
  double final_welfare = 0;
  long swaps = 0;
  long proposals = 0;
  int rounds = 0;           // matching passes performed
  bool converged = false;   // stopped on the tolerance rather than the cap
  bool phi_monotone = true; // every applied greedy swap raised the potential
  double mean_power_w = 0;  // mean transmit power under the final PMFs
};

struct CdfPoint {
  double welfare;
  double probability;
};

struct ExperimentResult {
  std::vector<WelfareTrace> samples;
  std::vector<CdfPoint> cdf;
  double mean_welfare = 0;
  double per_op_welfare = 0;  // mean S / K
};

namespace detail {

using AnyModel = std::variant<SimulatedDesirability, CountOnlyDesirability>;

inline AnyModel make_model(const Deployment& dep, const Scenario& sc, std::span<const PowerPmf> pmfs,
                           std::uint64_t crn_seed) {
  if (sc.desirability == DesirabilityKind::count_only) return CountOnlyDesirability(dep, sc, pmfs);
  return SimulatedDesirability(dep, sc, pmfs, crn_seed);
}

struct RoundOutcome {
  double welfare;
  SolverStats stats;
  bool phi_monotone;
};

template <DesirabilityModel M>
RoundOutcome solve_round(M& model, Matching& m, const Scenario& sc, long offset, Rng& rng) {
  GameState<M> state(m, model, sc.op_weights);
  SolverStats st = sc.solver == SolverKind::greedy
                       ? greedy_swap(state, GreedyOptions{sc.greedy_max_iterations, offset}, rng)
                       : mcmc(state, McmcOptions{sc.mcmc_max_iterations, sc.temp_tb, offset}, rng);
  bool monotone = true;
  for (const auto& r : st.applied) monotone &= r.phi_after > r.phi_before;
  m = state.matching();
  return {state.welfare(), std::move(st), monotone};
}

inline double mean_power(std::span<const PowerPmf> pmfs, const Scenario& sc) {
  double acc = 0.0;
  for (const auto& pmf : pmfs)
    for (int n = 0; n < static_cast<int>(pmf.size()); ++n) acc += pmf[n] * sc.level_power(n + 1);
  return pmfs.empty() ? 0.0 : acc / static_cast<double>(pmfs.size());
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace detail

/// One Monte Carlo sample: deployment, random initial matching, then
/// alternating matching passes and per-operator learning until the welfare
/// settles (relative change below sc.tolerance) or sc.max_rounds passes ran.
/// Fixed power modes stop after the first pass.
inline WelfareTrace run_sample(const Scenario& sc, std::uint64_t sample_id, std::uint64_t sample_seed) {
  WelfareTrace out;
  out.sample_id = sample_id;
  out.seed = sample_seed;

  Rng dep_rng = make_rng(sample_seed, Stream::deployment);
  const Deployment dep = sample_deployment(sc, dep_rng);
  const Matrix<double> gains = mean_gains(dep, sc);
  Rng init_rng = make_rng(sample_seed, Stream::initial_matching);
  Matching m = Matching::random(sc.rb_capacity, child_parents(sc.quota), init_rng);
  std::vector<PowerPmf> pmfs = initial_pmfs(sc.power_mode, sc.num_sbs(), sc.num_power_levels);
  std::vector<OperatorLearning> learners(sc.num_ops, fresh_learning(sc));
  Rng solver_rng = make_rng(sample_seed, Stream::solver);
  Rng learn_rng = make_rng(sample_seed, Stream::learning);
  const std::uint64_t crn_seed = derive_seed(sample_seed, static_cast<std::uint64_t>(Stream::fades));

  double prev = 0.0;
  for (int round = 0; round < sc.max_rounds; ++round) {
    detail::AnyModel model = detail::make_model(dep, sc, pmfs, crn_seed);
    detail::RoundOutcome r =
        std::visit([&](auto& md) { return detail::solve_round(md, m, sc, out.proposals, solver_rng); }, model);
    out.rounds = round + 1;
    out.proposals += r.stats.proposals;
    out.swaps += r.stats.swaps;
    out.phi_monotone &= r.phi_monotone;
    for (const auto& p : r.stats.trace)
      if (out.trace.empty() || !(out.trace.back() == p)) out.trace.push_back(p);
    out.final_welfare = r.welfare;
    if (sc.power_mode != PowerMode::qlearning) {
      out.converged = true;
      break;
    }
    if (round > 0 && std::abs(r.welfare - prev) < sc.tolerance * std::abs(prev)) {
      out.converged = true;
      break;
    }
    prev = r.welfare;
    // Training after the last permitted pass would leave the reported
    // welfare out of step with the PMFs, so it is skipped.
    if (round + 1 == sc.max_rounds) break;
    const std::vector<PowerPmf> frozen = pmfs;
    for (int k = 0; k < sc.num_ops; ++k) {
      if (m.rbs_of_parent(k).empty()) continue;
      const LearnResult lr = train_operator(gains, sc, m, k, frozen, learners[k], learn_rng);
      const std::vector<int> cells = cells_of(sc, k);
      for (size_t i = 0; i < cells.size(); ++i) pmfs[cells[i]] = lr.pmf[i];
    }
  }
  out.mean_power_w = detail::mean_power(pmfs, sc);
  return out;
}

/// Worker count: SPECTRUM_SIM_WORKERS when set to a positive integer,
/// otherwise the configured value.
inline int effective_workers(const Scenario& sc) {
  if (const char* env = std::getenv("SPECTRUM_SIM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1, sc.workers);
}

inline std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<CdfPoint> cdf;
  const double n = static_cast<double>(values.size());
  for (size_t i = 0; i < values.size(); ++i) cdf.push_back({values[i], double(i + 1) / n});
  return cdf;
}

/// Runs sc.samples samples; sample i uses seed derive_seed(sc.seed, i).
/// Results do not depend on the worker count.
inline ExperimentResult run_experiment(const Scenario& sc, int workers) {
  ExperimentResult res;
  const int n = sc.samples;
  res.samples.resize(n);
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::string error;
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        res.samples[i] = run_sample(sc, std::uint64_t(i), derive_seed(sc.seed, std::uint64_t(i)));
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (error.empty()) error = "sample " + std::to_string(i) + ": " + e.what();
        next = n;
      }
    }
  };
  const int threads = std::clamp(workers, 1, std::max(1, n));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (!error.empty()) throw std::runtime_error(error);

  std::vector<double> finals;
  double total = 0.0;
  for (const auto& s : res.samples) {
    finals.push_back(s.final_welfare);
    total += s.final_welfare;
  }
  res.cdf = empirical_cdf(finals);
  res.mean_welfare = n ? total / n : 0.0;
  res.per_op_welfare = res.mean_welfare / sc.num_ops;
  return res;
}

inline ExperimentResult run_experiment(const Scenario& sc) { return run_experiment(sc, effective_workers(sc)); }

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

inline void finish(std::ofstream& f, const std::filesystem::path& p) {
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace detail

/// Writes samples.csv, cdf.csv, trace.csv and summary.json into `dir`.
inline void emit_results(const ExperimentResult& res, const SimConfig& cfg, const std::filesystem::path& dir) {
  using detail::fmt;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  const auto samples_path = dir / "samples.csv";
  auto samples = detail::open_out(samples_path);
  samples << "sample_id,seed,final_S,swaps,iterations\n";
  for (const auto& s : res.samples)
    samples << s.sample_id << ',' << s.seed << ',' << fmt(s.final_welfare) << ',' << s.swaps << ',' << s.proposals
            << '\n';
  detail::finish(samples, samples_path);

  const auto cdf_path = dir / "cdf.csv";
  auto cdf = detail::open_out(cdf_path);
  cdf << "welfare,cumulative_probability\n";
  for (const auto& c : res.cdf) cdf << fmt(c.welfare) << ',' << fmt(c.probability) << '\n';
  detail::finish(cdf, cdf_path);

  const auto trace_path = dir / "trace.csv";
  auto trace = detail::open_out(trace_path);
  trace << "sample_id,iteration,S\n";
  for (const auto& s : res.samples)
    for (const auto& p : s.trace) trace << s.sample_id << ',' << p.iteration << ',' << fmt(p.welfare) << '\n';
  detail::finish(trace, trace_path);

  nlohmann::ordered_json j;
  j["samples"] = res.samples.size();
  j["mean_welfare"] = fmt(res.mean_welfare);
  j["per_op_welfare"] = fmt(res.per_op_welfare);
  auto& c = j["config"];
  for (const auto& [k, v] : config_entries(cfg)) c[k] = v;
  const auto summary_path = dir / "summary.json";
  auto summary = detail::open_out(summary_path);
  summary << j.dump(2) << '\n';
  detail::finish(summary, summary_path);
}

}  // namespace specshare
