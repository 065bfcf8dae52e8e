#pragma once

// Machine checks of the stability results on random small instances.
//
// Each check draws instances with at most 6 children, 4 RBs and RB capacity
// 2, builds desirabilities of the requested kind on a sampled deployment and
// compares solver behaviour against the exhaustive ledger.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "specshare/channel.hpp"
#include "specshare/config.hpp"
#include "specshare/desirability.hpp"
#include "specshare/enumerate.hpp"
#include "specshare/matching.hpp"
#include "specshare/random.hpp"
#include "specshare/solvers.hpp"

namespace specshare {

struct SmallInstance {
  Scenario sc;
  Deployment dep;
  std::vector<PowerPmf> pmfs;
  std::vector<int> child_parent;
};

/// K in 1..3, quotas in 1..3 with sum <= 6, L in 1..4, capacities in 1..2,
/// redrawn until the capacity covers the quotas. Operator weights are drawn
/// from [0.5, 2] when `random_weights` is set.
inline SmallInstance random_small_instance(Rng& rng, DesirabilityKind kind, bool random_weights = false,
                                           SimConfig base = {}) {
  std::uniform_int_distribution<int> pick_k(1, 3), pick_c(1, 3), pick_l(1, 4), pick_b(1, 2);
  std::uniform_real_distribution<double> pick_w(0.5, 2.0);
  SimConfig c = base;
  c.desirability = kind;
  for (;;) {
    const int k = pick_k(rng);
    c.quota.assign(k, 0);
    int total = 0;
    for (int& q : c.quota) total += q = pick_c(rng);
    if (total > kMaxEnumChildren) continue;
    c.num_rbs = pick_l(rng);
    c.rb_capacity.assign(c.num_rbs, 0);
    int cap = 0;
    for (int& b : c.rb_capacity) cap += b = pick_b(rng);
    if (cap >= total) break;
  }
  c.op_weights.clear();
  if (random_weights)
    for (size_t k = 0; k < c.quota.size(); ++k) c.op_weights.push_back(pick_w(rng));
  SmallInstance inst{resolve(c), {}, {}, {}};
  inst.dep = sample_deployment(inst.sc, rng);
  inst.pmfs = initial_pmfs(inst.sc.power_mode, inst.sc.num_sbs(), inst.sc.num_power_levels);
  inst.child_parent = child_parents(inst.sc.quota);
  return inst;
}

/// Calls fn(model) with a desirability model of the instance's kind.
template <class Fn>
decltype(auto) with_model(const SmallInstance& inst, std::uint64_t crn_seed, Fn&& fn) {
  if (inst.sc.desirability == DesirabilityKind::count_only) {
    CountOnlyDesirability m(inst.dep, inst.sc, inst.pmfs);
    return fn(m);
  }
  SimulatedDesirability m(inst.dep, inst.sc, inst.pmfs, crn_seed);
  return fn(m);
}

inline std::string describe(const SmallInstance& inst) {
  std::ostringstream os;
  os << "K=" << inst.sc.num_ops << " c=[";
  for (size_t i = 0; i < inst.sc.quota.size(); ++i) os << (i ? "," : "") << inst.sc.quota[i];
  os << "] b=[";
  for (size_t i = 0; i < inst.sc.rb_capacity.size(); ++i) os << (i ? "," : "") << inst.sc.rb_capacity[i];
  os << "]";
  return os.str();
}

struct PropertyReport {
  std::string name;
  long checked = 0;          // ledger entries or swaps examined
  long counterexamples = 0;
  std::string first_failure;  // empty when none
  bool pass() const { return counterexamples == 0 && checked > 0; }
};

namespace detail {

inline void note_failure(PropertyReport& r, const std::string& what) {
  if (++r.counterexamples == 1) r.first_failure = what;
}

template <class M>
Enumeration enumerate(M& model, const SmallInstance& inst) {
  return enumerate_optimal(model, inst.sc.rb_capacity, inst.child_parent, inst.sc.op_weights, inst.sc.quota);
}

inline std::string assignment_str(const std::vector<int>& a) {
  std::string s = "(";
  for (size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s + ")";
}

}  // namespace detail

/// Every local maximum of the potential is pairwise stable.
inline PropertyReport check_theorem1(int instances, std::uint64_t seed, DesirabilityKind kind) {
  PropertyReport r;
  r.name = "theorem1";
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, std::uint64_t(i)));
    const SmallInstance inst = random_small_instance(rng, kind);
    with_model(inst, rng(), [&](auto& m) {
      for (const auto& e : detail::enumerate(m, inst).ledger) {
        if (!e.local_max_potential) continue;
        ++r.checked;
        if (!e.pairwise_stable)
          detail::note_failure(r, "instance " + std::to_string(i) + " " + describe(inst) + " assignment " +
                                      detail::assignment_str(e.assignment));
      }
    });
  }
  return r;
}

/// On collision-free ledger entries, every local maximum of the welfare is
/// pairwise stable. Operator weights are random.
inline PropertyReport check_corollary1(int instances, std::uint64_t seed, DesirabilityKind kind) {
  PropertyReport r;
  r.name = "corollary1";
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, std::uint64_t(i)));
    const SmallInstance inst = random_small_instance(rng, kind, true);
    with_model(inst, rng(), [&](auto& m) {
      for (const auto& e : detail::enumerate(m, inst).ledger) {
        if (!e.collision_free || !e.local_max_welfare) continue;
        ++r.checked;
        if (!e.pairwise_stable)
          detail::note_failure(r, "instance " + std::to_string(i) + " " + describe(inst) + " assignment " +
                                      detail::assignment_str(e.assignment));
      }
    });
  }
  return r;
}

/// Every swap applied by greedy_swap strictly raises the potential. Runs
/// greedy from random matchings on random small instances until at least
/// `min_swaps` swaps were applied (or 100000 runs were made).
inline PropertyReport check_lemma2(long min_swaps, std::uint64_t seed, DesirabilityKind kind,
                                   SimConfig base = {}) {
  PropertyReport r;
  r.name = "lemma2";
  for (int i = 0; r.checked < min_swaps && i < 100000; ++i) {
    Rng rng(derive_seed(seed, std::uint64_t(i)));
    const SmallInstance inst = random_small_instance(rng, kind, false, base);
    with_model(inst, rng(), [&](auto& m) {
      GameState state(Matching::random(inst.sc.rb_capacity, inst.child_parent, rng), m, inst.sc.op_weights);
      const SolverStats st = greedy_swap(state, GreedyOptions{}, rng);
      for (const auto& s : st.applied) {
        ++r.checked;
        if (!(s.phi_after > s.phi_before))
          detail::note_failure(r, "instance " + std::to_string(i) + " " + describe(inst) + " swap (" +
                                      std::to_string(s.a) + "," + std::to_string(s.b) + ")");
      }
    });
  }
  return r;
}

/// Under the count-only model, exchanging two children on different RBs
/// leaves every other child's desirability unchanged, and no swap changes
/// the number of players per RB.
inline PropertyReport check_lemma1(int instances, std::uint64_t seed) {
  PropertyReport r;
  r.name = "lemma1";
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, std::uint64_t(i)));
    const SmallInstance inst = random_small_instance(rng, DesirabilityKind::count_only);
    CountOnlyDesirability model(inst.dep, inst.sc, inst.pmfs);
    GameState state(Matching::random(inst.sc.rb_capacity, inst.child_parent, rng), model, inst.sc.op_weights);
    const Matching& m = state.matching();
    for (int a = 0; a < m.num_players(); ++a)
      for (int b = a + 1; b < m.num_players(); ++b) {
        if (m.rb_of(a) == m.rb_of(b) || (m.is_token(a) && m.is_token(b))) continue;
        GameState after = state;
        after.apply_swap(a, b);
        ++r.checked;
        bool ok = true;
        std::vector<int> players_before(m.num_rbs(), 0), players_after(m.num_rbs(), 0);
        for (int p = 0; p < m.num_players(); ++p) {
          ++players_before[m.rb_of(p)];
          ++players_after[after.matching().rb_of(p)];
        }
        ok &= players_before == players_after;
        if (!m.is_token(a) && !m.is_token(b))
          for (int c = 0; c < m.num_children(); ++c)
            if (c != a && c != b) ok &= after.desirability(c) == state.desirability(c);
        if (!ok) detail::note_failure(r, "instance " + std::to_string(i) + " swap (" + std::to_string(a) + "," +
                                             std::to_string(b) + ")");
      }
  }
  return r;
}

}  // namespace specshare
