#pragma once

// Desirability models: the weighted sum rate an operator's cells obtain on an
// RB, given which other operators share it.
//
// A child carries all cells of its parent onto its RB, so the cells active on
// an RB are those of every parent present there. Two models:
//
//  * SimulatedDesirability: Monte Carlo over Rayleigh fades and power draws on
//    the realized geometry. The same fade/power samples are reused for every
//    query (common random numbers), which makes the estimate deterministic
//    and exactly monotone: adding an operator to an RB never raises anyone's
//    desirability on it.
//  * CountOnlyDesirability: the closed-form Poisson-field expected rate with an
//    intensity proportional to the RB's occupant count. Geometry enters only
//    through each cell's own link length.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "specshare/channel.hpp"
#include "specshare/config.hpp"
#include "specshare/matching.hpp"
#include "specshare/random.hpp"
#include "specshare/rates.hpp"

namespace specshare {

/// Probability of each power level 1..N (index 0 is level 1).
using PowerPmf = std::vector<double>;

inline std::vector<PowerPmf> uniform_pmfs(int cells, int levels) {
  return std::vector<PowerPmf>(cells, PowerPmf(levels, 1.0 / levels));
}

inline std::vector<PowerPmf> full_power_pmfs(int cells, int levels) {
  PowerPmf p(levels, 0.0);
  p.back() = 1.0;
  return std::vector<PowerPmf>(cells, p);
}

inline std::vector<PowerPmf> initial_pmfs(PowerMode mode, int cells, int levels) {
  return mode == PowerMode::full ? full_power_pmfs(cells, levels) : uniform_pmfs(cells, levels);
}

/// E[sqrt(p')] over all cells, each weighted equally.
inline double mean_sqrt_power(std::span<const PowerPmf> pmfs, const Scenario& sc) {
  double acc = 0.0;
  for (const auto& pmf : pmfs)
    for (int n = 0; n < static_cast<int>(pmf.size()); ++n) acc += pmf[n] * std::sqrt(sc.level_power(n + 1));
  return acc / static_cast<double>(pmfs.size());
}

/// Draws a 1-based level from a PMF by inversion.
inline int sample_level(const PowerPmf& pmf, double u) {
  double cum = 0.0;
  for (int n = 0; n < static_cast<int>(pmf.size()); ++n) {
    cum += pmf[n];
    if (u < cum) return n + 1;
  }
  return static_cast<int>(pmf.size());
}

/// Rate credited for a link: log2(1+sinr), zeroed below the QoS threshold
/// when gating is enabled.
inline double credited_rate(double sinr_value, const Scenario& sc) {
  if (sc.qos_gated && sinr_value < sc.sinr_th) return 0.0;
  return inst_rate(sinr_value);
}

class SimulatedDesirability {
 public:
  SimulatedDesirability(const Deployment& dep, const Scenario& sc, std::span<const PowerPmf> pmfs,
                        std::uint64_t seed)
      : sc_(&sc), cells_(dep.size()), draws_(sc.fade_draws) {
    const Matrix<double> mean = mean_gains(dep, sc);
    Rng rng(seed);
    std::exponential_distribution<double> fade(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    gains_.resize(size_t(draws_) * cells_ * cells_);
    power_.resize(size_t(draws_) * cells_);
    for (int t = 0; t < draws_; ++t) {
      for (int i = 0; i < cells_; ++i)
        for (int j = 0; j < cells_; ++j) gains_[index(t, i, j)] = mean(i, j) * fade(rng);
      for (int f = 0; f < cells_; ++f) power_[size_t(t) * cells_ + f] = sc.level_power(sample_level(pmfs[f], unit(rng)));
    }
  }

  double desirability(int parent, const RbContext& ctx) {
    const std::uint64_t key = (std::uint64_t(parent) << 32) | ctx.parents;
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    double d = 0.0;
    for (double r : cell_rates(parent, ctx.parents)) d += sc_->sbs_weight * r;
    cache_.emplace(key, d);
    return d;
  }

  /// Expected credited rate of each cell of `parent` on an RB shared with
  /// the parents in `mask`.
  std::vector<double> cell_rates(int parent, std::uint32_t mask) const {
    std::vector<int> active;
    for (int k = 0; k < sc_->num_ops; ++k)
      if (mask & (1u << k))
        for (int f : cells_of(*sc_, k)) active.push_back(f);
    std::vector<double> out;
    for (int f : cells_of(*sc_, parent)) {
      double acc = 0.0;
      for (int t = 0; t < draws_; ++t) {
        const double* p = &power_[size_t(t) * cells_];
        double interference = 0.0;
        for (int g : active)
          if (g != f) interference += gains_[index(t, g, f)] * p[g];
        acc += credited_rate(gains_[index(t, f, f)] * p[f] / (interference + sc_->noise_w), *sc_);
      }
      out.push_back(acc / draws_);
    }
    return out;
  }

 private:
  size_t index(int t, int i, int j) const { return (size_t(t) * cells_ + i) * cells_ + j; }

  const Scenario* sc_;
  int cells_;
  int draws_;
  std::vector<double> gains_;  // [draw][tx][rx]
  std::vector<double> power_;  // [draw][cell]
  std::unordered_map<std::uint64_t, double> cache_;
};

class CountOnlyDesirability {
 public:
  CountOnlyDesirability(const Deployment& dep, const Scenario& sc, std::span<const PowerPmf> pmfs)
      : sc_(&sc), pmfs_(pmfs.begin(), pmfs.end()), mean_sqrt_p_(mean_sqrt_power(pmfs, sc)) {
    for (int f = 0; f < dep.size(); ++f) link_.push_back(std::max(dep.link_distance(f), kMinDistance));
  }

  double desirability(int parent, const RbContext& ctx) {
    const std::uint64_t key = (std::uint64_t(parent) << 32) | std::uint32_t(ctx.occupants);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double area = sc_->area_side * sc_->area_side;
    const double lambda = ctx.occupants * sc_->sbs_per_op / area;
    double d = 0.0;
    for (int f : cells_of(*sc_, parent)) {
      double r = 0.0;
      for (int n = 0; n < static_cast<int>(pmfs_[f].size()); ++n)
        if (pmfs_[f][n] > 0)
          r += pmfs_[f][n] * expected_rate_ppp(lambda, sc_->level_power(n + 1), mean_sqrt_p_, link_[f]);
      d += sc_->sbs_weight * r;
    }
    cache_.emplace(key, d);
    return d;
  }

 private:
  const Scenario* sc_;
  std::vector<PowerPmf> pmfs_;
  double mean_sqrt_p_;
  std::vector<double> link_;
  std::unordered_map<std::uint64_t, double> cache_;
};

}  // namespace specshare
