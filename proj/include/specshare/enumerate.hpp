#pragma once

// Exhaustive oracle for small games.
//
// Lists every assignment of children to RBs that respects RB capacity and
// scores it from scratch (no incremental state), then marks which entries
// are local maxima of the potential / welfare over the swap neighbourhood
// and which are pairwise stable. Neighbours are exchanges of two children on
// different RBs and moves of one child into free capacity.

#include <cstdint>
#include <span>
#include <vector>

#include "specshare/errors.hpp"
#include "specshare/matching.hpp"
#include "specshare/rates.hpp"

namespace specshare {

struct LedgerEntry {
  std::vector<int> assignment;  // child -> RB
  std::vector<double> utility;  // per child
  double potential = 0;
  double welfare = 0;
  bool collision_free = false;
  bool local_max_potential = false;
  bool local_max_welfare = false;
  bool pairwise_stable = false;
};

struct Enumeration {
  std::vector<LedgerEntry> ledger;  // lexicographic order of assignment
  size_t best_welfare = 0;
  size_t best_potential = 0;
};

inline constexpr int kMaxEnumChildren = 6;
inline constexpr int kMaxEnumRbs = 4;

namespace detail {

template <DesirabilityModel M>
LedgerEntry score_assignment(M& model, const std::vector<int>& assign, std::span<const int> capacity,
                             std::span<const int> parent, std::span<const double> weights,
                             std::span<const int> quota) {
  const int nrb = static_cast<int>(capacity.size());
  LedgerEntry e;
  e.assignment = assign;
  e.utility.assign(assign.size(), 0.0);
  e.collision_free = true;
  for (int l = 0; l < nrb; ++l) {
    std::uint32_t mask = 0;
    int count = 0;
    for (size_t c = 0; c < assign.size(); ++c)
      if (assign[c] == l) {
        mask |= 1u << parent[c];
        ++count;
      }
    for (size_t c = 0; c < assign.size(); ++c) {
      if (assign[c] != l) continue;
      int siblings = 0;
      for (size_t o = 0; o < assign.size(); ++o) siblings += assign[o] == l && parent[o] == parent[c];
      const double d = model.desirability(parent[c], RbContext{l, mask, count});
      if (siblings > 1) e.collision_free = false;
      e.utility[c] = siblings > 1 ? 0.0 : d;
      e.potential += e.utility[c];
    }
  }
  std::vector<ChildRate> rates;
  for (size_t c = 0; c < assign.size(); ++c) rates.push_back({parent[c], assign[c], e.utility[c]});
  e.welfare = social_welfare(rates, weights, capacity, quota);
  return e;
}

inline long encode(const std::vector<int>& assign, int nrb) {
  long code = 0;
  for (int l : assign) code = code * nrb + l;
  return code;
}

}  // namespace detail

/// Enumerates all capacity-feasible assignments in which every child holds
/// an RB. Refuses instances with more than 6 children or 4 RBs. Ties for the
/// optimum go to the lexicographically smallest assignment.
template <DesirabilityModel M>
Enumeration enumerate_optimal(M& model, std::span<const int> capacity, std::span<const int> child_parent,
                              std::span<const double> op_weights, std::span<const int> quota) {
  const int nrb = static_cast<int>(capacity.size());
  const int nc = static_cast<int>(child_parent.size());
  if (nc > kMaxEnumChildren || nrb > kMaxEnumRbs)
    throw UsageError("enumerate_optimal: instance too large for exhaustive search");
  if (nrb < 1) throw UsageError("enumerate_optimal: no RBs");

  long total = 1;
  for (int i = 0; i < nc; ++i) total *= nrb;
  std::vector<long> index_of(total, -1);
  Enumeration out;

  std::vector<int> assign(nc, 0);
  for (long code = 0; code < total; ++code) {
    long x = code;
    for (int c = nc - 1; c >= 0; --c) {
      assign[c] = static_cast<int>(x % nrb);
      x /= nrb;
    }
    std::vector<int> load(nrb, 0);
    bool ok = true;
    for (int l : assign) ok &= ++load[l] <= capacity[l];
    if (!ok) continue;
    index_of[code] = static_cast<long>(out.ledger.size());
    out.ledger.push_back(detail::score_assignment(model, assign, capacity, child_parent, op_weights, quota));
  }

  for (auto& e : out.ledger) {
    e.local_max_potential = e.local_max_welfare = e.pairwise_stable = true;
    std::vector<int> load(nrb, 0);
    for (int l : e.assignment) ++load[l];
    auto visit = [&](const std::vector<int>& nb, int a, int b) {
      const LedgerEntry& n = out.ledger[index_of[detail::encode(nb, nrb)]];
      if (n.potential > e.potential) e.local_max_potential = false;
      if (n.welfare > e.welfare) e.local_max_welfare = false;
      const double ua0 = e.utility[a], ua1 = n.utility[a];
      const double ub0 = b < 0 ? 0.0 : e.utility[b], ub1 = b < 0 ? 0.0 : n.utility[b];
      if (ua1 >= ua0 && ub1 >= ub0 && (ua1 > ua0 || ub1 > ub0)) e.pairwise_stable = false;
    };
    std::vector<int> nb = e.assignment;
    for (int a = 0; a < nc; ++a) {
      for (int b = a + 1; b < nc; ++b) {
        if (e.assignment[a] == e.assignment[b]) continue;
        std::swap(nb[a], nb[b]);
        visit(nb, a, b);
        std::swap(nb[a], nb[b]);
      }
      for (int l = 0; l < nrb; ++l) {
        if (l == e.assignment[a] || load[l] >= capacity[l]) continue;
        nb[a] = l;
        visit(nb, a, -1);
        nb[a] = e.assignment[a];
      }
    }
  }

  for (size_t i = 1; i < out.ledger.size(); ++i) {
    if (out.ledger[i].welfare > out.ledger[out.best_welfare].welfare) out.best_welfare = i;
    if (out.ledger[i].potential > out.ledger[out.best_potential].potential) out.best_potential = i;
  }
  return out;
}

}  // namespace specshare
