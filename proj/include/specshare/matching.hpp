#pragma once

// Many-to-one matching of augmented operators to resource blocks.
//
// An operator that may hold c_k RBs is split into c_k identical children,
// each matched to at most one RB. RB capacity that no child uses is filled by
// virtual vacancy tokens, so every capacity slot always holds exactly one
// player. Moving a child into free capacity is then a swap with a token, and
// every search move is an exchange of two players.
//
// Player ids: children are [0, num_children), tokens follow.

#include <algorithm>
#include <bit>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specshare/errors.hpp"
#include "specshare/random.hpp"
#include "specshare/rates.hpp"

namespace specshare {

struct AugmentedOp {
  int child;
  int parent;   // 0-based operator index
  int sibling;  // 0-based index among the parent's children
  bool operator==(const AugmentedOp&) const = default;
};

/// Splits every operator k into quota[k] children, numbered parent by parent.
inline std::vector<AugmentedOp> augment(std::span<const int> quota) {
  std::vector<AugmentedOp> out;
  for (int k = 0; k < static_cast<int>(quota.size()); ++k) {
    if (quota[k] < 1) throw UsageError("augment: every quota must be >= 1");
    for (int s = 0; s < quota[k]; ++s) out.push_back({static_cast<int>(out.size()), k, s});
  }
  return out;
}

inline std::vector<int> child_parents(std::span<const int> quota) {
  std::vector<int> p;
  for (const auto& a : augment(quota)) p.push_back(a.parent);
  return p;
}

inline constexpr int kVacant = -1;

class Matching {
 public:
  Matching() = default;

  /// Builds a matching from an explicit child -> RB assignment (kVacant
  /// allowed). Throws UsageError when an RB is overfilled or an id is bad.
  Matching(std::vector<int> capacity, std::vector<int> child_parent, const std::vector<int>& child_rb)
      : capacity_(std::move(capacity)), parent_(std::move(child_parent)) {
    if (child_rb.size() != parent_.size()) throw UsageError("Matching: assignment size mismatch");
    const int nrb = num_rbs();
    occupants_.assign(nrb, {});
    std::vector<int> free = capacity_;
    player_rb_.assign(parent_.size(), kVacant);
    for (size_t c = 0; c < child_rb.size(); ++c) {
      const int l = child_rb[c];
      if (l == kVacant) continue;
      if (l < 0 || l >= nrb) throw UsageError("Matching: RB id out of range");
      if (--free[l] < 0) throw UsageError("Matching: RB " + std::to_string(l) + " over capacity");
      player_rb_[c] = l;
      occupants_[l].push_back(static_cast<int>(c));
    }
    for (int l = 0; l < nrb; ++l)
      for (int s = 0; s < free[l]; ++s) player_rb_.push_back(l);
  }

  /// Uniformly random placement of all children into capacity slots.
  static Matching random(std::vector<int> capacity, std::vector<int> child_parent, Rng& rng) {
    std::vector<int> slots;
    for (int l = 0; l < static_cast<int>(capacity.size()); ++l)
      for (int s = 0; s < capacity[l]; ++s) slots.push_back(l);
    if (slots.size() < child_parent.size()) throw UsageError("Matching::random: not enough capacity");
    std::shuffle(slots.begin(), slots.end(), rng);
    std::vector<int> assign(slots.begin(), slots.begin() + static_cast<long>(child_parent.size()));
    return Matching(std::move(capacity), std::move(child_parent), assign);
  }

  int num_rbs() const { return static_cast<int>(capacity_.size()); }
  int num_children() const { return static_cast<int>(parent_.size()); }
  int num_players() const { return static_cast<int>(player_rb_.size()); }
  int num_parents() const { return parent_.empty() ? 0 : *std::max_element(parent_.begin(), parent_.end()) + 1; }
  bool is_token(int player) const { return player >= num_children(); }
  int parent_of(int child) const { return parent_[child]; }
  std::span<const int> child_parents() const { return parent_; }
  std::span<const int> capacity() const { return capacity_; }

  /// RB of a player, or kVacant.
  int rb_of(int player) const { return player_rb_[player]; }
  /// Real children on an RB, ascending.
  std::span<const int> occupants(int rb) const { return occupants_[rb]; }

  std::vector<int> assignment() const {
    return {player_rb_.begin(), player_rb_.begin() + num_children()};
  }

  /// Distinct RBs held by the children of `parent`.
  std::vector<int> rbs_of_parent(int parent) const {
    std::vector<int> out;
    for (int c = 0; c < num_children(); ++c)
      if (parent_[c] == parent && player_rb_[c] != kVacant) out.push_back(player_rb_[c]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Bitmask of the parents present on an RB.
  std::uint32_t parents_on(int rb) const {
    std::uint32_t mask = 0;
    for (int c : occupants_[rb]) mask |= 1u << parent_[c];
    return mask;
  }

  /// Exchanges the positions of two players. No-op if they share an RB.
  void swap_players(int a, int b) {
    const int ra = player_rb_[a];
    const int rb = player_rb_[b];
    if (a == b || ra == rb) return;
    std::swap(player_rb_[a], player_rb_[b]);
    if (!is_token(a)) {
      move_child(a, ra, rb);
    }
    if (!is_token(b)) {
      move_child(b, rb, ra);
    }
  }

  /// Checks the capacity and quota constraints and internal consistency.
  /// Throws UsageError describing the first violation.
  void validate(std::span<const int> quota) const {
    std::vector<int> fill(num_rbs(), 0);
    for (int p = 0; p < num_players(); ++p) {
      const int l = player_rb_[p];
      if (l == kVacant) continue;
      if (l < 0 || l >= num_rbs()) throw UsageError("validate: RB id out of range");
      ++fill[l];
    }
    for (int l = 0; l < num_rbs(); ++l) {
      if (static_cast<int>(occupants_[l].size()) > capacity_[l])
        throw UsageError("validate: RB " + std::to_string(l) + " exceeds capacity");
      if (fill[l] > capacity_[l]) throw UsageError("validate: slot overflow on RB " + std::to_string(l));
      for (int c : occupants_[l])
        if (player_rb_[c] != l) throw UsageError("validate: occupancy and assignment disagree");
    }
    int listed = 0;
    for (const auto& o : occupants_) listed += static_cast<int>(o.size());
    int assigned = 0;
    for (int c = 0; c < num_children(); ++c) assigned += player_rb_[c] != kVacant;
    if (listed != assigned) throw UsageError("validate: occupancy and assignment disagree");
    for (int k = 0; k < static_cast<int>(quota.size()); ++k)
      if (static_cast<int>(rbs_of_parent(k).size()) > quota[k])
        throw UsageError("validate: operator " + std::to_string(k) + " exceeds its quota");
  }

  bool operator==(const Matching& o) const { return assignment() == o.assignment() && capacity_ == o.capacity_; }

 private:
  void move_child(int c, int from, int to) {
    if (from != kVacant) {
      auto& v = occupants_[from];
      v.erase(std::find(v.begin(), v.end(), c));
    }
    if (to != kVacant) {
      auto& v = occupants_[to];
      v.insert(std::upper_bound(v.begin(), v.end(), c), c);
    }
  }

  std::vector<int> capacity_;
  std::vector<int> parent_;     // per child
  std::vector<int> player_rb_;  // per player
  std::vector<std::vector<int>> occupants_;
};

/// What a desirability model may look at: who shares the RB.
struct RbContext {
  int rb;
  std::uint32_t parents;  // bitmask of parents present, including the asker
  int occupants;          // number of real children on the RB, including the asker
};

/// Maps (parent, RB context) to a non-negative desirability.
template <class M>
concept DesirabilityModel = requires(M& m, int parent, const RbContext& ctx) {
  { m.desirability(parent, ctx) } -> std::convertible_to<double>;
};

/// Adapts any callable double(int parent, const RbContext&) into a model.
template <class F>
struct FunctionDesirability {
  F fn;
  double desirability(int parent, const RbContext& ctx) { return fn(parent, ctx); }
};
template <class F>
FunctionDesirability(F) -> FunctionDesirability<F>;

struct SwapPreview {
  double u_a_before = 0, u_a_after = 0;
  double u_b_before = 0, u_b_after = 0;
  double phi_before = 0, phi_after = 0;
  double welfare_before = 0, welfare_after = 0;
};

/// Both players weakly gain and at least one strictly gains.
inline bool approved(const SwapPreview& p) {
  return p.u_a_after >= p.u_a_before && p.u_b_after >= p.u_b_before &&
         (p.u_a_after > p.u_a_before || p.u_b_after > p.u_b_before);
}

/// A matching together with its desirabilities, utilities, potential and
/// welfare. Holds a non-owning pointer to the desirability model.
template <DesirabilityModel M>
class GameState {
 public:
  GameState(Matching m, M& model, std::vector<double> op_weights)
      : model_(&model), m_(std::move(m)), weights_(std::move(op_weights)) {
    rebuild();
  }

  const Matching& matching() const { return m_; }
  M& model() const { return *model_; }
  std::span<const double> op_weights() const { return weights_; }

  /// D of the child's current RB; 0 when vacant or for a token.
  double desirability(int player) const { return m_.is_token(player) ? 0.0 : d_[player]; }
  /// D times the sibling-collision indicator; 0 for tokens.
  double utility(int player) const { return m_.is_token(player) ? 0.0 : u_[player]; }
  double potential() const { return sum(phi_rb_); }
  double welfare() const { return sum(s_rb_); }

  /// Desirability `child` would see on `rb` with everyone else in place.
  double desirability_on(int child, int rb) const {
    std::uint32_t mask = 1u << m_.parent_of(child);
    int count = 1;
    for (int c : m_.occupants(rb))
      if (c != child) {
        mask |= 1u << m_.parent_of(c);
        ++count;
      }
    return model_->desirability(m_.parent_of(child), RbContext{rb, mask, count});
  }

  /// Utilities, potential and welfare after exchanging players a and b,
  /// without changing the state.
  SwapPreview preview_swap(int a, int b) const {
    SwapPreview p;
    p.u_a_before = p.u_a_after = utility(a);
    p.u_b_before = p.u_b_after = utility(b);
    p.phi_before = p.phi_after = potential();
    p.welfare_before = p.welfare_after = welfare();
    const int ra = m_.rb_of(a);
    const int rb = m_.rb_of(b);
    if (a == b || ra == rb) return p;

    phi_tmp_ = phi_rb_;
    s_tmp_ = s_rb_;
    p.u_a_after = p.u_b_after = 0.0;
    for (int l : {ra, rb}) {
      if (l == kVacant) continue;
      const int leaving = l == ra ? a : b;
      const int arriving = l == ra ? b : a;
      scratch_.clear();
      for (int c : m_.occupants(l))
        if (c != leaving) scratch_.push_back(c);
      if (!m_.is_token(arriving)) scratch_.push_back(arriving);
      const RbTotals t = evaluate_rb(l, scratch_, arriving, &(arriving == a ? p.u_a_after : p.u_b_after));
      phi_tmp_[l] = t.phi;
      s_tmp_[l] = t.welfare;
    }
    // summed in RB order so the result equals potential() after apply_swap
    p.phi_after = sum(phi_tmp_);
    p.welfare_after = sum(s_tmp_);
    return p;
  }

  bool is_approved_swap(int a, int b) const { return approved(preview_swap(a, b)); }

  void apply_swap(int a, int b) {
    const int ra = m_.rb_of(a);
    const int rb = m_.rb_of(b);
    if (a == b || ra == rb) return;
    m_.swap_players(a, b);
    for (int p : {a, b})
      if (!m_.is_token(p) && m_.rb_of(p) == kVacant) d_[p] = u_[p] = 0.0;
    if (ra != kVacant) refresh_rb(ra);
    if (rb != kVacant) refresh_rb(rb);
  }

  /// Replaces the matching and recomputes everything.
  void reset(Matching m) {
    m_ = std::move(m);
    rebuild();
  }

  /// Recomputes from scratch, e.g. after the model changed.
  void rebuild() {
    d_.assign(m_.num_children(), 0.0);
    u_.assign(m_.num_children(), 0.0);
    phi_rb_.assign(m_.num_rbs(), 0.0);
    s_rb_.assign(m_.num_rbs(), 0.0);
    for (int l = 0; l < m_.num_rbs(); ++l) refresh_rb(l);
  }

  /// Per-child rates (masked utilities) in the form the rates module takes.
  std::vector<ChildRate> child_rates() const {
    std::vector<ChildRate> out;
    for (int c = 0; c < m_.num_children(); ++c) out.push_back({m_.parent_of(c), m_.rb_of(c), u_[c]});
    return out;
  }

 private:
  struct RbTotals {
    double phi = 0;
    double welfare = 0;
  };

  // Evaluates an RB holding `members`. Writes the utility of `watch` to *out.
  RbTotals evaluate_rb(int rb, std::span<const int> members, int watch, double* out,
                       std::vector<double>* d_out = nullptr, std::vector<double>* u_out = nullptr) const {
    std::uint32_t mask = 0;
    for (int c : members) mask |= 1u << m_.parent_of(c);
    const RbContext ctx{rb, mask, static_cast<int>(members.size())};
    RbTotals t;
    for (int c : members) {
      const int parent = m_.parent_of(c);
      int same = 0;
      for (int o : members) same += m_.parent_of(o) == parent;
      const double d = model_->desirability(parent, ctx);
      const double u = same == 1 ? d : 0.0;
      t.phi += u;
      t.welfare += weights_[parent] * u;
      if (c == watch && out) *out = u;
      if (d_out) (*d_out)[c] = d;
      if (u_out) (*u_out)[c] = u;
    }
    return t;
  }

  void refresh_rb(int l) {
    const auto occ = m_.occupants(l);
    const RbTotals t = evaluate_rb(l, occ, -1, nullptr, &d_, &u_);
    phi_rb_[l] = t.phi;
    s_rb_[l] = t.welfare;
  }

  static double sum(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
  }

  M* model_;
  Matching m_;
  std::vector<double> weights_;
  std::vector<double> d_, u_;
  std::vector<double> phi_rb_, s_rb_;
  mutable std::vector<int> scratch_;
  mutable std::vector<double> phi_tmp_, s_tmp_;
};

template <DesirabilityModel M>
double utility(int player, const GameState<M>& state) {
  return state.utility(player);
}

template <DesirabilityModel M>
bool is_approved_swap(const GameState<M>& state, int a, int b) {
  return state.is_approved_swap(a, b);
}

/// Copy of `state` with players a and b exchanged.
template <DesirabilityModel M>
GameState<M> apply_swap(GameState<M> state, int a, int b) {
  state.apply_swap(a, b);
  return state;
}

}  // namespace specshare
