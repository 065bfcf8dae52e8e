#pragma once

// Searches over swap matchings.
//
// Both solvers mutate the GameState they are given. Trace x-coordinates are
// cumulative proposals, i.e. candidate swaps evaluated, so traces of the two
// solvers share an axis.

#include <cmath>
#include <utility>
#include <vector>

#include "specshare/matching.hpp"
#include "specshare/random.hpp"

namespace specshare {

struct TracePoint {
  long iteration;
  double welfare;
  bool operator==(const TracePoint&) const = default;
};

/// One applied approved swap, for potential-monotonicity audits.
struct SwapRecord {
  int a, b;
  double phi_before, phi_after;
};

struct SolverStats {
  long proposals = 0;
  int swaps = 0;           // swaps actually applied
  bool exhausted = false;  // greedy only: stopped because no approved swap remained
  std::vector<TracePoint> trace;
  std::vector<SwapRecord> applied;  // greedy only
};

/// Every unordered player pair with at least one real child.
inline std::vector<std::pair<int, int>> candidate_pairs(const Matching& m) {
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < m.num_children(); ++a)
    for (int b = a + 1; b < m.num_players(); ++b) pairs.emplace_back(a, b);
  return pairs;
}

/// True iff no approved swap exists, vacancy tokens included.
template <DesirabilityModel M>
bool is_pairwise_stable(const GameState<M>& s) {
  const Matching& m = s.matching();
  for (const auto& [a, b] : candidate_pairs(m))
    if (m.rb_of(a) != m.rb_of(b) && s.is_approved_swap(a, b)) return false;
  return true;
}

struct GreedyOptions {
  int max_iterations = 2000;  // cap on applied swaps
  long proposal_offset = 0;   // added to trace x-coordinates
};

/// Applies uniformly random approved swaps until none is left or the cap is
/// reached. Each round scans all pairs in a fresh random order and takes the
/// first approved one, which is uniform over the approved set; a full scan
/// without a hit proves stability.
template <DesirabilityModel M>
SolverStats greedy_swap(GameState<M>& state, const GreedyOptions& opt, Rng& rng) {
  SolverStats st;
  auto pairs = candidate_pairs(state.matching());
  st.trace.push_back({opt.proposal_offset, state.welfare()});
  while (st.swaps < opt.max_iterations) {
    std::shuffle(pairs.begin(), pairs.end(), rng);
    bool found = false;
    for (const auto& [a, b] : pairs) {
      if (state.matching().rb_of(a) == state.matching().rb_of(b)) continue;
      ++st.proposals;
      const SwapPreview p = state.preview_swap(a, b);
      if (!approved(p)) continue;
      state.apply_swap(a, b);
      ++st.swaps;
      st.applied.push_back({a, b, p.phi_before, p.phi_after});
      st.trace.push_back({opt.proposal_offset + st.proposals, state.welfare()});
      found = true;
      break;
    }
    if (!found) {
      st.exhausted = true;
      break;
    }
  }
  if (st.trace.back().iteration != opt.proposal_offset + st.proposals)
    st.trace.push_back({opt.proposal_offset + st.proposals, state.welfare()});
  return st;
}

/// Acceptance probability 1 / (1 + exp(-temp * delta)).
inline double mcmc_acceptance(double delta_welfare, double temp) {
  const double x = temp * delta_welfare;
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct McmcOptions {
  int max_iterations = 5000;
  double temp = 1.0;
  long proposal_offset = 0;
};

/// Proposes random pair swaps and accepts with the sigmoid of the welfare
/// change. Tracks the best welfare over all proposals and leaves `state` at
/// the best matching seen. Trace entries mark every improvement of the best.
template <DesirabilityModel M>
SolverStats mcmc(GameState<M>& state, const McmcOptions& opt, Rng& rng) {
  SolverStats st;
  const Matching& m = state.matching();
  const int players = m.num_players();
  const int children = m.num_children();
  double best = state.welfare();
  Matching best_matching = m;
  st.trace.push_back({opt.proposal_offset, best});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (players >= 2 && children >= 1) {
    std::uniform_int_distribution<int> pick(0, players - 1);
    std::uniform_int_distribution<int> pick_other(0, players - 2);
    for (int i = 0; i < opt.max_iterations; ++i) {
      int a, b;
      do {
        a = pick(rng);
        b = pick_other(rng);
        if (b >= a) ++b;
      } while (m.is_token(a) && m.is_token(b));
      ++st.proposals;
      const SwapPreview p = state.preview_swap(a, b);
      const double accept = mcmc_acceptance(p.welfare_after - p.welfare_before, opt.temp);
      const bool take = unit(rng) < accept;
      if (p.welfare_after > best) {
        best = p.welfare_after;
        best_matching = state.matching();
        best_matching.swap_players(a, b);
        st.trace.push_back({opt.proposal_offset + st.proposals, best});
      }
      if (take && m.rb_of(a) != m.rb_of(b)) {
        state.apply_swap(a, b);
        ++st.swaps;
      }
    }
  }
  if (st.trace.back().iteration != opt.proposal_offset + st.proposals)
    st.trace.push_back({opt.proposal_offset + st.proposals, best});
  state.reset(best_matching);
  return st;
}

}  // namespace specshare
