// Acceptance run: one PASS/FAIL line per criterion, INFO lines for context.
// Exit status is 0 only when every criterion passes.
//
// Usage: acceptance [samples]   (default 2500 per arm for criterion 7)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "specshare/specshare.hpp"
#include "specshare/verify.hpp"
#include "support/ppp_oracle.hpp"

using namespace specshare;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

void info(const std::string& s) {
  std::printf("INFO %s\n", s.c_str());
  std::fflush(stdout);
}

// Tolerances and sizes.
constexpr int kTheoremInstances = 200;
constexpr long kLemma2Swaps = 10000;
constexpr double kPppTolerance = 0.05;
constexpr long kPppRealizations = 100000;
constexpr double kPppRadius = 150.0;  // m, disk of interferers around the receiver
constexpr double kMcmcGap = 0.01;
constexpr double kMcmcShare = 0.95;
constexpr double kBanditTolerance = 0.02;
constexpr double kSoftmaxTolerance = 1e-6;
constexpr double kMcmcWinShare = 0.60;
constexpr double kTheoremMinutes = 5, kPppMinutes = 10, kDirectionalMinutes = 120;

// ---------------------------------------------------------------- 1-3

void stability_criteria() {
  auto t0 = Clock::now();
  const PropertyReport t1 = check_theorem1(kTheoremInstances, 101, DesirabilityKind::count_only);
  const double t1_s = seconds_since(t0);
  verdict(1, t1.pass() && t1_s < kTheoremMinutes * 60,
          fmt("local maxima of the potential: %ld checked, %ld not pairwise stable, %d instances, %.1f s",
              t1.checked, t1.counterexamples, kTheoremInstances, t1_s));

  const PropertyReport l2 = check_lemma2(kLemma2Swaps, 202, DesirabilityKind::count_only);
  verdict(2, l2.pass() && l2.checked >= kLemma2Swaps,
          fmt("greedy swaps: %ld checked, %ld without a strict potential rise", l2.checked, l2.counterexamples));

  const PropertyReport c1 = check_corollary1(kTheoremInstances, 303, DesirabilityKind::count_only);
  verdict(3, c1.pass(), fmt("collision-free local maxima of welfare: %ld checked, %ld not pairwise stable",
                            c1.checked, c1.counterexamples));

  // Context: the same checks under the geometry-aware model, and the
  // potential audit at full experiment scale.
  const auto s1 = check_theorem1(kTheoremInstances, 101, DesirabilityKind::simulated);
  const auto s2 = check_lemma2(kLemma2Swaps, 202, DesirabilityKind::simulated);
  const auto s3 = check_corollary1(kTheoremInstances, 303, DesirabilityKind::simulated);
  info(fmt("simulated desirabilities: theorem1 %ld/%ld, lemma2 %ld/%ld, corollary1 %ld/%ld counterexamples",
           s1.counterexamples, s1.checked, s2.counterexamples, s2.checked, s3.counterexamples, s3.checked));
  if (!s1.first_failure.empty()) info("  first theorem1 counterexample: " + s1.first_failure);

  SimConfig big;
  big.desirability = DesirabilityKind::count_only;
  big.power_mode = PowerMode::uniform;
  const Scenario sc = resolve(big);
  long swaps = 0, flat = 0;
  for (int i = 0; i < 100; ++i) {
    Rng rng(derive_seed(404, i));
    const Deployment dep = sample_deployment(sc, rng);
    const auto pmfs = uniform_pmfs(sc.num_sbs(), sc.num_power_levels);
    CountOnlyDesirability model(dep, sc, pmfs);
    GameState state(Matching::random(sc.rb_capacity, child_parents(sc.quota), rng), model, sc.op_weights);
    for (const auto& r : greedy_swap(state, GreedyOptions{}, rng).applied) {
      ++swaps;
      flat += !(r.phi_after > r.phi_before);
    }
  }
  info(fmt("count-only model at experiment scale (K=3, L=5, b=4): %ld of %ld greedy swaps without a strict "
           "potential rise",
           flat, swaps));
}

// ---------------------------------------------------------------- 4

void ppp_criterion() {
  const Scenario sc = resolve(SimConfig{});
  std::vector<double> levels;
  for (int n = 1; n <= sc.num_power_levels; ++n) levels.push_back(sc.level_power(n));
  const auto pmf = uniform_pmfs(1, sc.num_power_levels);
  const double mean_sqrt = mean_sqrt_power(pmf, sc);

  struct Point {
    double lambda, r;
  };
  const std::vector<Point> points{{0.05, 5.0}, {0.01, 3.0}, {0.02, 2.0}};
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (size_t i = 0; i < points.size(); ++i) {
    const auto [lambda, r] = points[i];
    double formula = 0;
    for (double p : levels) formula += expected_rate_ppp(lambda, p, mean_sqrt, r) / levels.size();
    Rng rng(derive_seed(505, i));
    const oracle::Estimate mc = oracle::ppp_rate_disk(lambda, r, levels, kPppRadius, kPppRealizations, rng);
    const double rel = std::abs(formula - mc.mean) / mc.mean;
    ok &= rel <= kPppTolerance;
    detail += fmt("(lambda=%g, r=%g): closed form %.4f, simulation %.4f +- %.4f, rel %.3f; ", lambda, r, formula,
                  mc.mean, mc.stderr_, rel);
  }
  const double secs = seconds_since(t0);
  verdict(4, ok && secs < kPppMinutes * 60, detail + fmt("%.1f s", secs));
}

// ---------------------------------------------------------------- 5

void mcmc_criterion() {
  SimConfig c;
  c.quota = {2, 3};
  c.num_rbs = 3;
  c.rb_capacity = {2};
  const Scenario sc = resolve(c);
  const auto parents = child_parents(sc.quota);
  int close = 0, runs = 100;
  double worst = 0;
  for (int i = 0; i < runs; ++i) {
    const std::uint64_t seed = derive_seed(606, i);
    Rng dep_rng = make_rng(seed, Stream::deployment);
    const Deployment dep = sample_deployment(sc, dep_rng);
    const auto pmfs = uniform_pmfs(sc.num_sbs(), sc.num_power_levels);
    SimulatedDesirability model(dep, sc, pmfs, derive_seed(seed, 3));
    const Enumeration e = enumerate_optimal(model, sc.rb_capacity, parents, sc.op_weights, sc.quota);
    const double opt = e.ledger[e.best_welfare].welfare;
    Rng rng = make_rng(seed, Stream::solver);
    GameState state(Matching::random(sc.rb_capacity, parents, rng), model, sc.op_weights);
    mcmc(state, McmcOptions{sc.mcmc_max_iterations, sc.temp_tb, 0}, rng);
    const double gap = opt > 0 ? (opt - state.welfare()) / opt : 0.0;
    worst = std::max(worst, gap);
    close += gap <= kMcmcGap;
  }
  verdict(5, close >= kMcmcShare * runs,
          fmt("best welfare within 1%% of the enumerated optimum in %d of %d runs (worst gap %.4f)", close, runs,
              worst));
}

// ---------------------------------------------------------------- 6

void learning_criterion() {
  Rng rng(707);
  std::normal_distribution<double> reward_draw(2.0, 0.2);
  QTable qt(1);
  double sum = 0;
  const int steps = 10000;
  for (int t = 0; t < steps; ++t) {
    const double r = reward_draw(rng);
    sum += r;
    q_update(qt, AgentStep{0, 0, r, 0, 0}, 0.01, 0.0);
  }
  const double empirical = sum / steps;
  const double rel = std::abs(qt(0, 0) - empirical) / empirical;

  QTable flat(4);
  double uniform_err = 0;
  for (double p : action_probabilities(flat, 0, 0.5)) uniform_err = std::max(uniform_err, std::abs(p - 0.25));
  QTable peaked(4);
  peaked.at(0, 2) = 1.0;
  peaked.at(0, 1) = 0.5;
  const double argmax_err = 1.0 - action_probabilities(peaked, 0, 1e-3)[2];
  verdict(6, rel <= kBanditTolerance && uniform_err <= kSoftmaxTolerance && argmax_err <= kSoftmaxTolerance,
          fmt("bandit Q %.4f vs mean reward %.4f (rel %.4f); softmax |p-1/N| %.2e, 1-p(argmax) at T=1e-3 %.2e",
              qt(0, 0), empirical, rel, uniform_err, argmax_err));
}

// ---------------------------------------------------------------- 7

struct ArmResult {
  std::vector<double> welfare;  // by sample index
  std::vector<long> proposals;
  double mean = 0, per_op = 0;
  double seconds = 0;
};

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Lower empirical quantile, matching the step CDF the harness writes.
double quantile(const std::vector<double>& s, double q) {
  const size_t i = static_cast<size_t>(std::ceil(q * s.size()));
  return s[std::clamp<size_t>(i, 1, s.size()) - 1];
}

double median(const std::vector<double>& v) { return quantile(sorted(v), 0.5); }

// Every decile of `a` is at least the matching decile of `b`.
bool decile_dominates(const std::vector<double>& a, const std::vector<double>& b, std::string* note) {
  const auto sa = sorted(a), sb = sorted(b);
  bool ok = true;
  for (int d = 1; d <= 9; ++d) {
    const double qa = quantile(sa, d / 10.0), qb = quantile(sb, d / 10.0);
    if (qa < qb) {
      ok = false;
      if (note) *note += fmt(" q%d0 %.2f<%.2f", d, qa, qb);
    }
  }
  return ok;
}

class Arms {
 public:
  explicit Arms(int samples) : samples_(samples) {}

  const ArmResult& get(const std::string& name, SimConfig c) {
    c.samples = samples_;
    c.seed = 1;  // every arm shares sample seeds, so deployments pair up
    const std::string key = key_of(c);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const auto t0 = Clock::now();
    const ExperimentResult r = run_experiment(resolve(c));
    ArmResult a;
    for (const auto& s : r.samples) {
      a.welfare.push_back(s.final_welfare);
      a.proposals.push_back(s.proposals);
    }
    a.mean = r.mean_welfare;
    a.per_op = r.per_op_welfare;
    a.seconds = seconds_since(t0);
    const auto s = sorted(a.welfare);
    info(fmt("arm %-28s mean %8.3f  q10 %8.3f  median %8.3f  q90 %8.3f  per-OP %7.3f  (%.0f s)", name.c_str(),
             a.mean, quantile(s, 0.1), quantile(s, 0.5), quantile(s, 0.9), a.per_op, a.seconds));
    csv_ << name << ',' << key << ',' << fmt("%.9g,%.9g,%.9g", a.mean, quantile(s, 0.5), a.per_op) << '\n';
    csv_.flush();
    return cache_.emplace(key, std::move(a)).first->second;
  }

  double total_seconds() const {
    double t = 0;
    for (const auto& [k, a] : cache_) t += a.seconds;
    return t;
  }

 private:
  static std::string key_of(const SimConfig& c) {
    std::string k;
    for (const auto& [name, v] : config_entries(c)) k += v + ";";
    return std::to_string(std::hash<std::string>{}(k));
  }

  int samples_;
  std::map<std::string, ArmResult> cache_;
  std::ofstream csv_{"acceptance_arms.csv"};
};

SimConfig base_config() {
  SimConfig c;  // 20 m square, 10 dBm, -120 dBm, 3 dB, L=5, b=4, c=[2,3,4]
  return c;
}

SimConfig with(SimConfig c, std::vector<int> quota, int rbs, PowerMode mode, SolverKind solver = SolverKind::mcmc) {
  c.quota = std::move(quota);
  c.num_rbs = rbs;
  c.power_mode = mode;
  c.solver = solver;
  return c;
}

const char* mode_name(PowerMode m) { return to_string(m); }

void directional_criterion(int samples) {
  Arms arms(samples);
  const SimConfig base = base_config();
  const auto t0 = Clock::now();
  std::vector<std::string> failed;
  std::string detail;

  // (i) full >= qlearning >= uniform in median, K=3
  const std::vector<int> c3{2, 3, 4};
  const auto& full = arms.get("K3 L5 full", with(base, c3, 5, PowerMode::full));
  const auto& ql = arms.get("K3 L5 qlearning", with(base, c3, 5, PowerMode::qlearning));
  const auto& uni = arms.get("K3 L5 uniform", with(base, c3, 5, PowerMode::uniform));
  const double mf = median(full.welfare), mq = median(ql.welfare), mu = median(uni.welfare);
  const bool i_ok = mf >= mq && mq >= mu;
  std::printf("  (i)   medians full %.4f, qlearning %.4f, uniform %.4f -> %s\n", mf, mq, mu, i_ok ? "holds" : "fails");
  if (!i_ok) failed.push_back("i");

  // (ii) CDF improves with K, per power mode
  const std::vector<std::vector<int>> cdf_quotas{{2, 3, 4}, {2, 3, 4, 2}, {2, 3, 4, 2, 2}, {2, 3, 4, 4, 5, 2}};
  bool ii_ok = true;
  for (PowerMode mode : {PowerMode::full, PowerMode::qlearning, PowerMode::uniform}) {
    std::vector<const ArmResult*> byk;
    for (const auto& q : cdf_quotas)
      byk.push_back(&arms.get(fmt("K%zu L5 %s", q.size(), mode_name(mode)), with(base, q, 5, mode)));
    for (size_t k = 0; k + 1 < byk.size(); ++k) {
      std::string note;
      const bool ok = decile_dominates(byk[k + 1]->welfare, byk[k]->welfare, &note);
      std::printf("  (ii)  %-9s K=%zu -> K=%zu: %s%s\n", mode_name(mode), k + 3, k + 4, ok ? "improves" : "does not improve",
                  note.c_str());
      ii_ok &= ok;
    }
  }
  if (!ii_ok) failed.push_back("ii");

  // (iii) per-OP welfare falls with K and rises with L
  const std::vector<std::vector<int>> grid_quotas{{2, 3, 4}, {2, 5, 4, 2}, {2, 3, 4, 2, 2}, {2, 3, 4, 4, 5, 2}};
  const std::vector<int> ls{5, 8, 10, 14};
  std::vector<std::vector<double>> per_op(4, std::vector<double>(4));
  for (size_t k = 0; k < 4; ++k)
    for (size_t l = 0; l < 4; ++l)
      per_op[k][l] = arms.get(fmt("K%zu L%d qlearning", k + 3, ls[l]),
                              with(base, grid_quotas[k], ls[l], PowerMode::qlearning))
                         .per_op;
  bool iii_ok = true;
  for (size_t l = 0; l < 4; ++l)
    for (size_t k = 0; k + 1 < 4; ++k)
      if (!(per_op[k + 1][l] < per_op[k][l])) {
        iii_ok = false;
        std::printf("  (iii) L=%d: per-OP welfare K=%zu %.3f not below K=%zu %.3f\n", ls[l], k + 4, per_op[k + 1][l],
                    k + 3, per_op[k][l]);
      }
  for (size_t k = 0; k < 4; ++k) {
    for (size_t l = 0; l + 1 < 4; ++l)
      if (per_op[k][l + 1] < per_op[k][l]) {
        iii_ok = false;
        std::printf("  (iii) K=%zu: per-OP welfare L=%d %.3f below L=%d %.3f\n", k + 3, ls[l + 1], per_op[k][l + 1],
                    ls[l], per_op[k][l]);
      }
    if (!(per_op[k][3] > per_op[k][0])) {
      iii_ok = false;
      std::printf("  (iii) K=%zu: per-OP welfare at L=14 %.3f not above L=5 %.3f\n", k + 3, per_op[k][3],
                  per_op[k][0]);
    }
  }
  std::printf("  (iii) per-OP grid (rows K=3..6, cols L=5,8,10,14):\n");
  for (size_t k = 0; k < 4; ++k)
    std::printf("        %8.3f %8.3f %8.3f %8.3f\n", per_op[k][0], per_op[k][1], per_op[k][2], per_op[k][3]);
  if (!iii_ok) failed.push_back("iii");

  // (iv) MCMC beats greedy on most seeds; greedy needs fewer proposals
  bool iv_ok = true;
  for (PowerMode mode : {PowerMode::full, PowerMode::qlearning}) {
    const auto& m = arms.get(fmt("K3 L5 %s", mode_name(mode)), with(base, c3, 5, mode));
    const auto& g = arms.get(fmt("K3 L5 %s greedy", mode_name(mode)), with(base, c3, 5, mode, SolverKind::greedy));
    int wins = 0, faster = 0;
    const int n = static_cast<int>(m.welfare.size());
    for (int i = 0; i < n; ++i) {
      wins += m.welfare[i] >= g.welfare[i];
      faster += g.proposals[i] < m.proposals[i];
    }
    std::vector<double> gp(g.proposals.begin(), g.proposals.end()), mp(m.proposals.begin(), m.proposals.end());
    const bool ok = wins >= kMcmcWinShare * n && 2 * faster > n;
    std::printf("  (iv)  %-9s MCMC >= greedy on %d/%d seeds; greedy used fewer proposals on %d/%d (median %.0f vs %.0f)\n",
                mode_name(mode), wins, n, faster, n, median(gp), median(mp));
    iv_ok &= ok;
  }
  if (!iv_ok) failed.push_back("iv");

  // (v) smaller quotas dominate at K=5, L=10
  const auto& small = arms.get("K5 L10 c=[2,2,1,1,2]", with(base, {2, 2, 1, 1, 2}, 10, PowerMode::qlearning));
  const auto& large = arms.get("K5 L10 c=[2,4,4,5,5]", with(base, {2, 4, 4, 5, 5}, 10, PowerMode::qlearning));
  std::string note;
  const bool v_ok = decile_dominates(small.welfare, large.welfare, &note);
  std::printf("  (v)   c=[2,2,1,1,2] median %.3f vs c=[2,4,4,5,5] median %.3f: %s%s\n", median(small.welfare),
              median(large.welfare), v_ok ? "dominates" : "does not dominate", note.c_str());
  if (!v_ok) failed.push_back("v");

  const double minutes = seconds_since(t0) / 60;
  detail = fmt("%d samples per arm, %.1f min;", samples, minutes);
  if (failed.empty()) {
    detail += " all directions hold";
  } else {
    detail += " failing:";
    for (const auto& f : failed) detail += " (" + f + ")";
  }
  if (samples < 2500) detail += " (reduced run, not a full evaluation)";
  verdict(7, failed.empty() && minutes < kDirectionalMinutes && samples >= 2500, detail);
}

// ---------------------------------------------------------------- 8

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism_criterion() {
  SimConfig c = base_config();
  c.samples = 12;
  c.seed = 808;
  const Scenario sc = resolve(c);
  const auto root = std::filesystem::temp_directory_path() / "specshare_acceptance";
  std::filesystem::remove_all(root);
  emit_results(run_experiment(sc, 1), c, root / "a");
  emit_results(run_experiment(sc, 4), c, root / "b");
  emit_results(run_experiment(sc, 1), c, root / "c");
  bool same = true;
  for (const char* f : {"samples.csv", "cdf.csv", "trace.csv", "summary.json"}) {
    const std::string a = slurp(root / "a" / f);
    same &= !a.empty() && a == slurp(root / "b" / f) && a == slurp(root / "c" / f);
  }
  std::filesystem::remove_all(root);
  verdict(8, same, "12-sample Q-learning run repeated with 1, 4 and 1 workers: output files byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
  int samples = 2500;
  if (argc > 1) samples = std::atoi(argv[1]);
  if (samples < 10) {
    std::fprintf(stderr, "usage: acceptance [samples >= 10]\n");
    return 2;
  }
  if (samples != 2500) info(fmt("criterion 7 runs %d samples per arm instead of 2500", samples));
  const auto t0 = Clock::now();
  stability_criteria();
  ppp_criterion();
  mcmc_criterion();
  learning_criterion();
  directional_criterion(samples);
  determinism_criterion();
  std::printf("%d of 8 criteria failed; %.1f min total\n", failures, seconds_since(t0) / 60);
  return failures ? 1 : 0;
}
