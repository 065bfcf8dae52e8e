#pragma once

// Small-cell deployments and their radio channel.
//
// Shadowing is drawn once per deployment and stays fixed; Rayleigh fading is
// redrawn for every channel realization. Gains are stored as
// gain(transmitter sbs, receiving ue) and already include pathloss, so the
// distance attenuation of the SINR lives entirely inside the gain.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "specshare/config.hpp"
#include "specshare/errors.hpp"
#include "specshare/random.hpp"

namespace specshare {

struct Point {
  double x = 0;
  double y = 0;
  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Dense row-major matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols), data_(size_t(rows) * cols, fill) {}

  T& operator()(int r, int c) { return data_[size_t(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[size_t(r) * cols_ + c]; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const T> data() const { return data_; }
  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

struct SmallCell {
  int id;
  int op;
  Point pos;
  bool operator==(const SmallCell&) const = default;
};

struct UserEquipment {
  int sbs;  // serving small cell; one UE per small cell
  Point pos;
  bool operator==(const UserEquipment&) const = default;
};

struct Deployment {
  std::vector<SmallCell> sbs;  // grouped by operator: op k owns ids [k*F, (k+1)*F)
  std::vector<UserEquipment> ue;  // ue[f] is served by sbs[f]
  Matrix<double> shadow_db;  // (transmitting sbs, receiving ue)
  bool operator==(const Deployment&) const = default;

  int size() const { return static_cast<int>(sbs.size()); }
  /// Serving-link distance r_ff.
  double link_distance(int f) const { return distance(sbs[f].pos, ue[f].pos); }
};

/// Small cells owned by operator `op` (contiguous by construction).
inline std::vector<int> cells_of(const Scenario& sc, int op) {
  std::vector<int> out(sc.sbs_per_op);
  for (int i = 0; i < sc.sbs_per_op; ++i) out[i] = op * sc.sbs_per_op + i;
  return out;
}

inline constexpr double kMinDistance = 0.1;  // m, pathloss clamp

/// Distance-dependent pathloss in dB. Distances below 0.1 m are clamped.
inline double pathloss_db(double d, const Scenario& sc) {
  return sc.pl_const_db + sc.pl_slope_db * std::log10(std::max(d, kMinDistance));
}

/// Samples a deployment: a fixed number of cells per operator placed
/// uniformly in the square (a Poisson process conditioned on its count),
/// each UE uniform in the disk of radius ue_max_dist around its cell and
/// clamped to the square.
inline Deployment sample_deployment(const Scenario& sc, Rng& rng) {
  if (sc.num_ops < 1 || sc.sbs_per_op < 1) throw ConfigError("deployment needs operators and cells");
  std::uniform_real_distribution<double> coord(0.0, sc.area_side);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Deployment dep;
  const int n = sc.num_sbs();
  dep.sbs.reserve(n);
  dep.ue.reserve(n);
  for (int k = 0; k < sc.num_ops; ++k) {
    for (int i = 0; i < sc.sbs_per_op; ++i) {
      const int id = static_cast<int>(dep.sbs.size());
      const Point p{coord(rng), coord(rng)};
      dep.sbs.push_back({id, k, p});
      // uniform in the disk: radius ~ R*sqrt(U)
      const double r = sc.ue_max_dist * std::sqrt(unit(rng));
      const double theta = 2.0 * std::numbers::pi * unit(rng);
      Point u{p.x + r * std::cos(theta), p.y + r * std::sin(theta)};
      u.x = std::clamp(u.x, 0.0, sc.area_side);
      u.y = std::clamp(u.y, 0.0, sc.area_side);
      dep.ue.push_back({id, u});
    }
  }
  dep.shadow_db = Matrix<double>(n, n);
  std::normal_distribution<double> shadow(0.0, sc.shadow_sigma_db);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dep.shadow_db(i, j) = sc.shadow_sigma_db > 0 ? shadow(rng) : 0.0;
  return dep;
}

/// Total link loss in dB from cell `tx` to the UE of cell `rx`. With the wall
/// model enabled, links between different operators cross one wall.
inline double link_loss_db(const Deployment& dep, const Scenario& sc, int tx, int rx) {
  double loss = pathloss_db(distance(dep.sbs[tx].pos, dep.ue[rx].pos), sc) + dep.shadow_db(tx, rx);
  if (sc.wall_loss_enabled && dep.sbs[tx].op != dep.sbs[rx].op) loss += sc.wall_loss_db;
  return loss;
}

/// Mean (fade-averaged) power gains of every link.
inline Matrix<double> mean_gains(const Deployment& dep, const Scenario& sc) {
  const int n = dep.size();
  Matrix<double> g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = std::pow(10.0, -link_loss_db(dep, sc, i, j) / 10.0);
  return g;
}

/// One channel realization: gain(tx, rx) in linear power units.
struct ChannelDraw {
  Matrix<double> gain;
};

/// Multiplies the mean gains by fresh unit-mean exponential (Rayleigh power) fades.
inline ChannelDraw draw_channel(const Matrix<double>& mean, Rng& rng) {
  std::exponential_distribution<double> fade(1.0);
  ChannelDraw ch{Matrix<double>(mean.rows(), mean.cols())};
  for (int i = 0; i < mean.rows(); ++i)
    for (int j = 0; j < mean.cols(); ++j) ch.gain(i, j) = mean(i, j) * fade(rng);
  return ch;
}

inline ChannelDraw draw_channel(const Deployment& dep, const Scenario& sc, Rng& rng) {
  return draw_channel(mean_gains(dep, sc), rng);
}

/// SINR at the UE of cell `f` when the cells in `active` share its RB.
/// `power_w` is indexed by cell id. Throws if `f` is not active.
inline double sinr(int f, std::span<const int> active, std::span<const double> power_w,
                   const ChannelDraw& ch, double noise_w) {
  bool found = false;
  double interference = 0.0;
  for (int g : active) {
    if (g == f) {
      found = true;
      continue;
    }
    interference += ch.gain(g, f) * power_w[g];
  }
  if (!found) throw UsageError("sinr: cell " + std::to_string(f) + " is not active on this RB");
  return ch.gain(f, f) * power_w[f] / (interference + noise_w);
}

inline double sinr(int f, std::span<const int> active, std::span<const double> power_w,
                   const ChannelDraw& ch, const Scenario& sc) {
  return sinr(f, active, power_w, ch, sc.noise_w);
}

}  // namespace specshare
