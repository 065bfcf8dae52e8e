#pragma once

// Link, operator and network rates. All rates are in bits/s/Hz.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "specshare/errors.hpp"

namespace specshare {

/// Shannon rate log2(1 + sinr).
inline double inst_rate(double sinr_value) {
  if (!(sinr_value >= 0)) throw UsageError("inst_rate: negative SINR");
  return std::log2(1.0 + sinr_value);
}

struct AverageRate {
  double rate = 0.0;
  bool matched = false;  // false when the operator holds no RB
};

/// Per-cell rate averaged over the RBs of its operator; each RB is picked
/// with equal probability.
inline AverageRate sbs_avg_rate(std::span<const double> per_rb_expected_rate) {
  if (per_rb_expected_rate.empty()) return {0.0, false};
  double sum = 0.0;
  for (double r : per_rb_expected_rate) sum += r;
  return {sum / static_cast<double>(per_rb_expected_rate.size()), true};
}

/// Weighted sum of member cell rates.
inline double op_rate(std::span<const int> members, std::span<const double> cell_rate,
                      std::span<const double> cell_weight) {
  double sum = 0.0;
  for (int f : members) sum += cell_weight[f] * cell_rate[f];
  return sum;
}

/// Rate of a parent operator: summed child rates over the number of
/// distinct RBs its children hold. Zero when it holds none.
inline double parent_op_rate(std::span<const double> children_rates, int distinct_rbs) {
  if (distinct_rbs <= 0) return 0.0;
  double sum = 0.0;
  for (double r : children_rates) sum += r;
  return sum / distinct_rbs;
}

/// One augmented operator's contribution to the welfare.
struct ChildRate {
  int parent;
  int rb;       // -1 when vacant
  double rate;  // already masked by the sibling-collision indicator
};

struct RateReport {
  std::vector<double> per_child_op_rate;
  std::vector<double> per_parent_op_rate;
  std::vector<int> parent_rb_count;
  double social_welfare = 0.0;
};

/// Weighted sum of parent rates over every held (RB, parent) pair.
/// Throws UsageError if the assignment overfills an RB or gives a parent
/// more RBs than its quota.
inline RateReport rate_report(std::span<const ChildRate> children, std::span<const double> op_weight,
                              std::span<const int> rb_capacity, std::span<const int> quota) {
  const int num_ops = static_cast<int>(op_weight.size());
  const int num_rbs = static_cast<int>(rb_capacity.size());
  std::vector<int> load(num_rbs, 0);
  std::vector<std::set<int>> held(num_ops);
  std::vector<std::vector<double>> rates(num_ops);
  RateReport rep;
  for (const auto& c : children) {
    if (c.parent < 0 || c.parent >= num_ops) throw UsageError("rate_report: bad parent id");
    rep.per_child_op_rate.push_back(c.rate);
    if (c.rb < 0) continue;
    if (c.rb >= num_rbs) throw UsageError("rate_report: bad RB id");
    ++load[c.rb];
    held[c.parent].insert(c.rb);
    rates[c.parent].push_back(c.rate);
  }
  for (int l = 0; l < num_rbs; ++l)
    if (load[l] > rb_capacity[l])
      throw UsageError("rate_report: RB " + std::to_string(l) + " exceeds its capacity");
  rep.per_parent_op_rate.resize(num_ops);
  rep.parent_rb_count.resize(num_ops);
  for (int k = 0; k < num_ops; ++k) {
    const int nrb = static_cast<int>(held[k].size());
    if (nrb > quota[k]) throw UsageError("rate_report: operator exceeds its RB quota");
    rep.parent_rb_count[k] = nrb;
    rep.per_parent_op_rate[k] = parent_op_rate(rates[k], nrb);
    // x_lk = 1 for each held RB, so the parent rate is counted nrb times
    rep.social_welfare += nrb * op_weight[k] * rep.per_parent_op_rate[k];
  }
  return rep;
}

inline double social_welfare(std::span<const ChildRate> children, std::span<const double> op_weight,
                             std::span<const int> rb_capacity, std::span<const int> quota) {
  return rate_report(children, op_weight, rb_capacity, quota).social_welfare;
}

/// Expected rate of a link of length r_ff in an interference-limited Poisson
/// field of intensity `lambda` (per m^2) with pathloss exponent 4 and
/// Rayleigh fading:
///
///   E[R] = int_0^inf exp(-c sqrt(e^t - 1)) dt,  c = lambda pi^2 r^2 E[sqrt(p')] / (2 sqrt(p)),
///
/// evaluated with u = sqrt(e^t - 1) as int_0^inf e^{-cu} 2u/(1+u^2) du.
/// The integral is in nats; the result is returned in bits.
inline double expected_rate_ppp(double lambda, double p_w, double mean_sqrt_interferer_power,
                                double r_ff) {
  if (!(lambda > 0)) throw DomainError("expected_rate_ppp: intensity must be > 0");
  if (!(p_w > 0)) throw DomainError("expected_rate_ppp: transmit power must be > 0");
  if (!(mean_sqrt_interferer_power > 0)) throw DomainError("expected_rate_ppp: E[sqrt(p')] must be > 0");
  const double area = std::numbers::pi * std::numbers::pi * r_ff * r_ff;
  const double c = lambda * area * mean_sqrt_interferer_power / (2.0 * std::sqrt(p_w));
  // e^{-cu} * 2u/(1+u^2) <= e^{-cu}, below 1e-12 beyond u = ln(1e12)/c
  const double u_max = std::log(1e12) / c;
  auto integrand = [c](double u) { return std::exp(-c * u) * 2.0 * u / (1.0 + u * u); };
  using boost::math::quadrature::gauss_kronrod;
  const double nats = gauss_kronrod<double, 31>::integrate(integrand, 0.0, u_max, 20, 1e-12);
  return nats / std::numbers::ln2;
}

}  // namespace specshare
