#include "gainscout/channel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "gainscout/rng.hpp"

namespace gainscout {
namespace {

std::vector<Vec3> joint_points(const GridSpec& grid, bool include_uav) {
  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(grid.cell_count()) * (include_uav ? 2 : 1));
  for (int i = 0; i < grid.cell_count(); ++i) points.push_back(grid.pred_point(grid.cell(i)));
  if (include_uav) {
    for (int i = 0; i < grid.cell_count(); ++i) points.push_back(grid.uav_point(grid.cell(i)));
  }
  return points;
}

std::vector<double> sample_exact(std::span<const Vec3> points, Rng& rng, double phi, double delta) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = phi * std::exp(-distance(points[i], points[j]) / delta);
    }
  }
  // The exponential kernel is strictly positive definite; the tiny ridge only guards rounding.
  k.diagonal().array() += 1e-10 * phi;
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(k);
  if (llt.info() != Eigen::Success) throw NumericalError("shadowing covariance is not positive definite");
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  const Eigen::VectorXd f = llt.matrixL() * z;
  return {f.data(), f.data() + n};
}

// Random Fourier features. The exponential kernel's spectral measure in 3D is a
// multivariate Cauchy law of scale 1/delta.
std::vector<double> sample_spectral(std::span<const Vec3> points, Rng& rng, double phi, double delta, int features) {
  std::vector<double> f(points.size(), 0.0);
  const double amplitude = std::sqrt(2.0 * phi / features);
  for (int k = 0; k < features; ++k) {
    double g = std::abs(rng.normal());
    while (g == 0.0) g = std::abs(rng.normal());
    const double scale = 1.0 / (delta * g);
    const double wx = rng.normal() * scale;
    const double wy = rng.normal() * scale;
    const double wz = rng.normal() * scale;
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < points.size(); ++i) {
      f[i] += amplitude * std::cos(wx * points[i].x + wy * points[i].y + wz * points[i].z + phase);
    }
  }
  return f;
}

}  // namespace

ShadowingSample sample_shadowing(const UrbanWorld& world, std::uint64_t seed, double phi0, double delta0,
                                 const ShadowingOptions& options) {
  if (!(phi0 > 0.0) || !(delta0 > 0.0)) throw std::invalid_argument("shadowing phi0 and delta0 must be positive");
  const GridSpec& grid = world.grid();
  const bool separate_uav_plane = !grid.planes_coincide();
  const std::vector<Vec3> points = joint_points(grid, separate_uav_plane);
  Rng rng(derive_seed(seed, "shadowing"));

  ShadowingSample sample;
  std::vector<double> joint;
  if (static_cast<int>(points.size()) <= options.exact_limit) {
    joint = sample_exact(points, rng, phi0, delta0);
  } else {
    joint = sample_spectral(points, rng, phi0, delta0, options.spectral_features);
    sample.spectral_features = options.spectral_features;
  }
  const auto n = static_cast<std::size_t>(grid.cell_count());
  sample.pred_plane.assign(joint.begin(), joint.begin() + static_cast<std::ptrdiff_t>(n));
  if (separate_uav_plane) {
    sample.uav_plane.assign(joint.begin() + static_cast<std::ptrdiff_t>(n), joint.end());
  } else {
    sample.uav_plane = sample.pred_plane;
  }
  return sample;
}

int count_blockages(const UrbanWorld& world, const Vec3& a, const Vec3& b) {
  // Walk from the lexicographically smaller endpoint so the result cannot depend on direction.
  const auto key = [](const Vec3& v) { return std::tuple(v.x, v.y, v.z); };
  const Vec3& from = key(a) <= key(b) ? a : b;
  const Vec3& to = key(a) <= key(b) ? b : a;

  const GridSpec& grid = world.grid();
  const double d = grid.spacing_m;
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  const double dz = to.z - from.z;
  int cx = static_cast<int>(std::floor(from.x / d));
  int cy = static_cast<int>(std::floor(from.y / d));
  const int ex = static_cast<int>(std::floor(to.x / d));
  const int ey = static_cast<int>(std::floor(to.y / d));
  const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double step_tx = sx != 0 ? d / std::abs(dx) : inf;
  const double step_ty = sy != 0 ? d / std::abs(dy) : inf;
  double next_tx = sx > 0 ? ((cx + 1) * d - from.x) / dx : (sx < 0 ? (cx * d - from.x) / dx : inf);
  double next_ty = sy > 0 ? ((cy + 1) * d - from.y) / dy : (sy < 0 ? (cy * d - from.y) / dy : inf);

  std::set<int> hit;
  double t_enter = 0.0;
  for (;;) {
    const double t_exit = std::min({next_tx, next_ty, 1.0});
    const Cell c{cx, cy};
    if (grid.contains(c)) {
      const int label = world.building_label(c);
      if (label >= 0) {
        const double z_low = std::min(from.z + t_enter * dz, from.z + t_exit * dz);
        if (z_low < world.height(c)) hit.insert(label);
      }
    }
    if ((cx == ex && cy == ey) || t_exit >= 1.0) break;
    if (next_tx < next_ty) {
      cx += sx;
      t_enter = next_tx;
      next_tx += step_tx;
    } else {
      cy += sy;
      t_enter = next_ty;
      next_ty += step_ty;
    }
  }
  return static_cast<int>(hit.size());
}

GainField synthesize_field(const UrbanWorld& world, const Vec3& tx, std::uint64_t seed, const TruthParams& truth,
                           const ShadowingOptions& options) {
  const GridSpec& grid = world.grid();
  const Cell tx_cell{static_cast<int>(std::floor(tx.x / grid.spacing_m)),
                     static_cast<int>(std::floor(tx.y / grid.spacing_m))};
  if (grid.contains(tx_cell) && world.height(tx_cell) >= tx.z) {
    throw std::invalid_argument("transmitter is inside a building");
  }
  if (truth.phi0 < 0.0 || truth.delta0 <= 0.0) throw std::invalid_argument("invalid shadowing parameters");

  GainField field;
  field.tx = tx;
  field.params = truth;
  field.seed = seed;
  const auto n = static_cast<std::size_t>(grid.cell_count());
  std::vector<double> shadow_pred(n, 0.0);
  std::vector<double> shadow_uav(n, 0.0);
  if (truth.phi0 > 0.0) {
    ShadowingSample s = sample_shadowing(world, seed, truth.phi0, truth.delta0, options);
    shadow_pred = std::move(s.pred_plane);
    shadow_uav = std::move(s.uav_plane);
    field.spectral_features = s.spectral_features;
  }

  const double floor_m = 0.5 * grid.spacing_m;
  const auto gain_at = [&](const Vec3& q, double shadow) {
    const double r = std::max(distance(q, tx), floor_m);
    double g = truth.alpha0 - truth.beta0 * std::log(r) + shadow;
    if (truth.penalty_db != 0.0) g -= truth.penalty_db * count_blockages(world, tx, q);
    return g;
  };
  field.pred_plane.resize(n);
  field.uav_plane.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Cell c = grid.cell(static_cast<int>(i));
    field.pred_plane[i] = gain_at(grid.pred_point(c), shadow_pred[i]);
    field.uav_plane[i] = grid.planes_coincide() ? field.pred_plane[i] : gain_at(grid.uav_point(c), shadow_uav[i]);
  }
  return field;
}

GainField crop_field(const GainField& field, const GridSpec& source, const CropWindow& window) {
  GainField out = field;
  out.tx.x -= window.x0 * source.spacing_m;
  out.tx.y -= window.y0 * source.spacing_m;
  out.pred_plane = crop_plane(field.pred_plane, source, window);
  out.uav_plane = crop_plane(field.uav_plane, source, window);
  return out;
}

bool MeasurementLog::append(Cell c, int step, double value) {
  if (index_.contains(c)) return false;
  index_.emplace(c, cells_.size());
  cells_.push_back(c);
  steps_.push_back(step);
  values_.push_back(value);
  return true;
}

MeasurementLog measure(const GainField& field, const GridSpec& grid, MeasurementLog log, std::span<const Cell> cells,
                       int step, const MeasurementNoise& noise) {
  for (Cell c : cells) {
    if (!grid.contains(c)) throw std::invalid_argument("measured cell outside the AoI");
    if (log.contains(c)) continue;
    double value = field.uav_plane[grid.index(c)];
    if (noise.std_db > 0.0) {
      Rng rng(derive_seed(noise.seed, "noise", static_cast<std::uint64_t>(grid.index(c))));
      value += noise.std_db * rng.normal();
    }
    log.append(c, step, value);
  }
  return log;
}

}  // namespace gainscout
