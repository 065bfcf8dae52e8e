#pragma once

// Per-cell Q-learning of transmit power levels.
//
// State: 1 if the cell's QoS was violated in the previous slot, else 0.
// Action: power level index a in [0, N), transmitting (a+1) * delta watts.
// Reward: the link rate when SINR >= threshold, otherwise 0.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include "specshare/channel.hpp"
#include "specshare/config.hpp"
#include "specshare/desirability.hpp"
#include "specshare/errors.hpp"
#include "specshare/matching.hpp"
#include "specshare/random.hpp"
#include "specshare/rates.hpp"

namespace specshare {

class QTable {
 public:
  static constexpr int kStates = 2;

  explicit QTable(int levels) : levels_(levels), q_(size_t(kStates) * levels, 0.0), visits_(q_.size(), 0) {
    if (levels < 1) throw UsageError("QTable: need at least one action");
  }

  int levels() const { return levels_; }
  double operator()(int s, int a) const { return q_[idx(s, a)]; }
  double& at(int s, int a) { return q_[idx(s, a)]; }
  long visits(int s, int a) const { return visits_[idx(s, a)]; }
  void count_visit(int s, int a) { ++visits_[idx(s, a)]; }

  double max_value(int s) const {
    return *std::max_element(q_.begin() + idx(s, 0), q_.begin() + idx(s, 0) + levels_);
  }
  /// Highest-valued action; ties go to the lowest index.
  int greedy_action(int s) const {
    const auto first = q_.begin() + idx(s, 0);
    return static_cast<int>(std::max_element(first, first + levels_) - first);
  }
  std::span<const double> row(int s) const { return {q_.data() + idx(s, 0), size_t(levels_)}; }

 private:
  size_t idx(int s, int a) const { return size_t(s) * levels_ + a; }
  int levels_;
  std::vector<double> q_;
  std::vector<long> visits_;
};

struct AgentStep {
  int state;
  int action;
  double reward;
  int next_state;
  double sinr;  // the SINR the reward was computed from
};

inline int observe_state(double sinr_value, double sinr_th) { return sinr_value < sinr_th ? 1 : 0; }

/// QoS state of cell f on the RB it shares with `active`.
inline int observe_state(int f, std::span<const int> active, std::span<const double> power_w,
                         const ChannelDraw& ch, const Scenario& sc) {
  return observe_state(sinr(f, active, power_w, ch, sc), sc.sinr_th);
}

inline double reward(double sinr_value, double sinr_th) {
  return sinr_value >= sinr_th ? inst_rate(sinr_value) : 0.0;
}
inline double reward(double sinr_value, const Scenario& sc) { return reward(sinr_value, sc.sinr_th); }

/// Boltzmann probabilities exp(Q(s,a)/T) normalised over all actions.
inline std::vector<double> action_probabilities(const QTable& qt, int s, double temp) {
  if (!(temp > 0)) throw UsageError("action_probabilities: temperature must be > 0");
  const double top = qt.max_value(s);
  std::vector<double> p(qt.levels());
  double z = 0.0;
  for (int a = 0; a < qt.levels(); ++a) z += p[a] = std::exp((qt(s, a) - top) / temp);
  for (double& x : p) x /= z;
  return p;
}

inline int select_action(const QTable& qt, int s, double temp, Rng& rng) {
  const auto p = action_probabilities(qt, s, temp);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return sample_level(p, u) - 1;
}

/// Q(s,a) <- (1-lr) Q(s,a) + lr (u + gamma max_a' Q(s',a')). Only (s,a) changes.
inline void q_update(QTable& qt, const AgentStep& step, double lr, double gamma) {
  const double target = step.reward + gamma * qt.max_value(step.next_state);
  double& q = qt.at(step.state, step.action);
  q = (1.0 - lr) * q + lr * target;
}

struct LearningParams {
  double gamma = 0.9;
  double lr = 0.1;
  bool lr_decay = true;  // per-cell rate 1 / (1/lr + visits)
  double temp = 0.5;
  int episodes = 500;
  double sinr_th = 2.0;
  bool record_steps = false;
};

inline LearningParams learning_params(const Scenario& sc) {
  return {sc.gamma, sc.lr, sc.lr_decay, sc.temp_tp, sc.episodes, sc.sinr_th, false};
}

/// A set of agents acting in lock-step; step() reports each agent's SINR.
template <class E>
concept LearningEnvironment = requires(E& e, std::span<const int> actions, std::span<double> sinr_out, Rng& rng) {
  { e.num_agents() } -> std::convertible_to<int>;
  e.step(actions, sinr_out, rng);
};

struct LearnResult {
  std::vector<PowerPmf> pmf;         // empirical action frequencies per agent
  std::vector<double> mean_reward;   // per episode, averaged over agents
  std::vector<AgentStep> steps;      // per agent per episode, if recorded
};

/// Synchronous multi-agent Q-learning. `tables` and `states` carry over
/// between calls; states hold each agent's QoS outcome of its last slot.
template <LearningEnvironment E>
LearnResult train_agents(E& env, std::vector<QTable>& tables, std::vector<int>& states,
                         const LearningParams& lp, Rng& rng) {
  const int n = env.num_agents();
  if (static_cast<int>(tables.size()) != n || static_cast<int>(states.size()) != n)
    throw UsageError("train_agents: one table and one state per agent required");
  const int levels = n ? tables[0].levels() : 0;
  std::vector<std::vector<long>> counts(n, std::vector<long>(levels, 0));
  std::vector<int> actions(n);
  std::vector<double> sinr_out(n);
  LearnResult res;
  for (int t = 0; t < lp.episodes; ++t) {
    for (int i = 0; i < n; ++i) {
      actions[i] = select_action(tables[i], states[i], lp.temp, rng);
      ++counts[i][actions[i]];
    }
    env.step(actions, sinr_out, rng);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const AgentStep step{states[i], actions[i], reward(sinr_out[i], lp.sinr_th),
                           observe_state(sinr_out[i], lp.sinr_th), sinr_out[i]};
      const double lr =
          lp.lr_decay ? 1.0 / (1.0 / lp.lr + double(tables[i].visits(step.state, step.action))) : lp.lr;
      q_update(tables[i], step, lr, lp.gamma);
      tables[i].count_visit(step.state, step.action);
      states[i] = step.next_state;
      total += step.reward;
      if (lp.record_steps) res.steps.push_back(step);
    }
    res.mean_reward.push_back(n ? total / n : 0.0);
  }
  res.pmf.resize(n);
  for (int i = 0; i < n; ++i) {
    res.pmf[i].assign(levels, 1.0 / levels);
    if (lp.episodes > 0)
      for (int a = 0; a < levels; ++a) res.pmf[i][a] = double(counts[i][a]) / lp.episodes;
  }
  return res;
}

/// The cells of one operator transmitting on the RBs its children hold.
/// Every slot each cell picks one of those RBs uniformly; the cells of any
/// other operator present on that RB interfere at powers drawn from their
/// current PMFs. Fades are redrawn every slot.
class OperatorEnvironment {
 public:
  OperatorEnvironment(const Matrix<double>& mean_gain, const Scenario& sc, const Matching& m, int parent,
                      std::span<const PowerPmf> pmfs)
      : mean_(&mean_gain), sc_(&sc), cells_(cells_of(sc, parent)), rbs_(m.rbs_of_parent(parent)),
        pmfs_(pmfs.begin(), pmfs.end()) {
    if (rbs_.empty()) throw UsageError("train_operator: operator holds no RB");
    for (int l : rbs_) {
      std::vector<int> foreign;
      const std::uint32_t mask = m.parents_on(l);
      for (int k = 0; k < sc.num_ops; ++k)
        if (k != parent && (mask & (1u << k)))
          for (int f : cells_of(sc, k)) foreign.push_back(f);
      foreign_.push_back(std::move(foreign));
    }
  }

  int num_agents() const { return static_cast<int>(cells_.size()); }
  std::span<const int> cells() const { return cells_; }

  void step(std::span<const int> actions, std::span<double> sinr_out, Rng& rng) {
    std::uniform_int_distribution<int> pick_rb(0, static_cast<int>(rbs_.size()) - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> fade(1.0);
    const int n = num_agents();
    choice_.resize(n);
    for (int i = 0; i < n; ++i) choice_[i] = pick_rb(rng);
    foreign_power_.assign(foreign_.size(), {});
    for (size_t r = 0; r < foreign_.size(); ++r)
      for (int g : foreign_[r]) foreign_power_[r].push_back(sc_->level_power(sample_level(pmfs_[g], unit(rng))));
    const Matrix<double>& G = *mean_;
    for (int i = 0; i < n; ++i) {
      const int f = cells_[i];
      const int r = choice_[i];
      double interference = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i && choice_[j] == r) interference += G(cells_[j], f) * fade(rng) * sc_->level_power(actions[j] + 1);
      for (size_t q = 0; q < foreign_[r].size(); ++q)
        interference += G(foreign_[r][q], f) * fade(rng) * foreign_power_[r][q];
      const double signal = G(f, f) * fade(rng) * sc_->level_power(actions[i] + 1);
      sinr_out[i] = signal / (interference + sc_->noise_w);
    }
  }

 private:
  const Matrix<double>* mean_;
  const Scenario* sc_;
  std::vector<int> cells_;
  std::vector<int> rbs_;
  std::vector<PowerPmf> pmfs_;
  std::vector<std::vector<int>> foreign_;  // per held RB
  std::vector<int> choice_;
  std::vector<std::vector<double>> foreign_power_;
};

struct OperatorLearning {
  std::vector<QTable> tables;  // one per cell of the operator
  std::vector<int> states;
};

inline OperatorLearning fresh_learning(const Scenario& sc) {
  return {std::vector<QTable>(sc.sbs_per_op, QTable(sc.num_power_levels)), std::vector<int>(sc.sbs_per_op, 0)};
}

/// Trains the cells of `parent` for sc.episodes slots against the current
/// matching and the other operators' PMFs. Updates `agents` in place.
inline LearnResult train_operator(const Matrix<double>& mean_gain, const Scenario& sc, const Matching& m, int parent,
                                  std::span<const PowerPmf> pmfs, OperatorLearning& agents, Rng& rng,
                                  bool record_steps = false) {
  OperatorEnvironment env(mean_gain, sc, m, parent, pmfs);
  LearningParams lp = learning_params(sc);
  lp.record_steps = record_steps;
  return train_agents(env, agents.tables, agents.states, lp, rng);
}

}  // namespace specshare
