#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "gainscout/common.hpp"
#include "gainscout/grid_world.hpp"

namespace gainscout {

/// Parameters of the synthetic channel used as ground truth.
///
/// gain(q) = alpha0 - beta0 * ln(max(|q - tx|, d/2)) + shadowing(q) - penalty_db * blockages(tx, q)
/// with shadowing a zero-mean Gaussian field of covariance phi0 * exp(-r / delta0).
/// phi0 == 0 disables shadowing.
struct TruthParams {
  double alpha0 = -40.0;
  double beta0 = 15.0;
  double phi0 = 25.0;
  double delta0 = 50.0;
  double penalty_db = 15.0;
  double carrier_hz = 5e9;  // metadata only

  friend bool operator==(const TruthParams&, const TruthParams&) = default;
};

/// Ground-truth gain over the prediction plane and the flight plane, row-major over cells.
struct GainField {
  Vec3 tx;
  std::vector<double> pred_plane;
  std::vector<double> uav_plane;
  TruthParams params;
  std::uint64_t seed = 0;
  /// Random spectral features used for shadowing; 0 when sampled exactly by Cholesky.
  int spectral_features = 0;

  friend bool operator==(const GainField&, const GainField&) = default;
};

struct ShadowingOptions {
  /// Largest joint point count sampled exactly.
  int exact_limit = 5000;
  int spectral_features = 2000;
};

struct ShadowingSample {
  std::vector<double> pred_plane;
  std::vector<double> uav_plane;
  int spectral_features = 0;
};

/// Zero-mean Gaussian field on both planes jointly, covariance phi0 * exp(-r / delta0).
ShadowingSample sample_shadowing(const UrbanWorld& world, std::uint64_t seed, double phi0, double delta0,
                                 const ShadowingOptions& options = {});

/// Number of distinct buildings the straight segment a-b passes through.
/// Symmetric in its endpoints.
int count_blockages(const UrbanWorld& world, const Vec3& a, const Vec3& b);

GainField synthesize_field(const UrbanWorld& world, const Vec3& tx, std::uint64_t seed, const TruthParams& truth,
                           const ShadowingOptions& options = {});

/// Restricts a field synthesized on `source` to a crop window, shifting the transmitter.
GainField crop_field(const GainField& field, const GridSpec& source, const CropWindow& window);

/// Ordered, duplicate-free record of measured flight-plane cells.
class MeasurementLog {
 public:
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  bool contains(Cell c) const { return index_.contains(c); }

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<int>& first_steps() const { return steps_; }
  const std::vector<double>& values() const { return values_; }

  /// Returns false (and changes nothing) if `c` was already measured.
  bool append(Cell c, int step, double value);

  friend bool operator==(const MeasurementLog& a, const MeasurementLog& b) {
    return a.cells_ == b.cells_ && a.steps_ == b.steps_ && a.values_ == b.values_;
  }

 private:
  std::vector<Cell> cells_;
  std::vector<int> steps_;
  std::vector<double> values_;
  std::unordered_map<Cell, std::size_t, CellHash> index_;
};

/// Optional additive Gaussian noise on measurements. Zero by default.
struct MeasurementNoise {
  double std_db = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const MeasurementNoise&, const MeasurementNoise&) = default;
};

/// Appends ground-truth flight-plane values at the cells not yet in the log.
MeasurementLog measure(const GainField& field, const GridSpec& grid, MeasurementLog log, std::span<const Cell> cells,
                       int step, const MeasurementNoise& noise = {});

}  // namespace gainscout
