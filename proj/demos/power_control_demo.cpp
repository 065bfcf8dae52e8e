// One deployment end to end: match operators to RBs, let every operator's
// cells learn their power levels, and print what each cell settled on.

#include <cstdio>

#include "specshare/specshare.hpp"

using namespace specshare;

int main() {
  SimConfig cfg;
  cfg.quota = {2, 3, 4};
  cfg.num_rbs = 5;
  const Scenario sc = resolve(cfg);
  const std::uint64_t seed = derive_seed(cfg.seed, 0);

  Rng dep_rng = make_rng(seed, Stream::deployment);
  const Deployment dep = sample_deployment(sc, dep_rng);
  const Matrix<double> gains = mean_gains(dep, sc);

  Rng init_rng = make_rng(seed, Stream::initial_matching);
  Matching m = Matching::random(sc.rb_capacity, child_parents(sc.quota), init_rng);
  std::vector<PowerPmf> pmfs = uniform_pmfs(sc.num_sbs(), sc.num_power_levels);

  SimulatedDesirability model(dep, sc, pmfs, seed);
  GameState state(m, model, sc.op_weights);
  Rng solver_rng = make_rng(seed, Stream::solver);
  const double before = state.welfare();
  const SolverStats st = mcmc(state, McmcOptions{sc.mcmc_max_iterations, sc.temp_tb}, solver_rng);
  std::printf("welfare %.3f -> %.3f after %ld proposals\n", before, state.welfare(), st.proposals);
  for (int k = 0; k < sc.num_ops; ++k) {
    std::printf("operator %d holds RBs:", k);
    for (int l : state.matching().rbs_of_parent(k)) std::printf(" %d", l);
    std::printf("\n");
  }

  Rng learn_rng = make_rng(seed, Stream::learning);
  for (int k = 0; k < sc.num_ops; ++k) {
    OperatorLearning agents = fresh_learning(sc);
    const LearnResult lr = train_operator(gains, sc, state.matching(), k, pmfs, agents, learn_rng);
    const std::vector<int> cells = cells_of(sc, k);
    for (size_t i = 0; i < cells.size(); ++i) {
      std::printf("  cell %2d  link %.1f m  level frequencies:", cells[i], dep.link_distance(cells[i]));
      for (double p : lr.pmf[i]) std::printf(" %.2f", p);
      std::printf("  greedy level (QoS ok) %d\n", agents.tables[i].greedy_action(0) + 1);
    }
  }
  return 0;
}
