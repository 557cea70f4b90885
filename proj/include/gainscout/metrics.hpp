#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gainscout/channel.hpp"
#include "gainscout/grid_world.hpp"

namespace gainscout {

/// z-tilde: 1 where a prediction-plane cell is outdoor and was not measured.
/// A measured flight-plane cell excludes its prediction-plane twin only when the
/// two planes coincide.
std::vector<std::uint8_t> eval_mask(const UrbanWorld& world, const MeasurementLog& log);

/// sqrt(sum_j mask_j (pred_j - truth_j)^2 / |mask|).
double rmse(std::span<const double> prediction, std::span<const double> truth, std::span<const std::uint8_t> mask);

/// Natural log of the masked mean of error^2 / variance.
double goodness_of_fit(std::span<const double> errors, std::span<const double> variances,
                       std::span<const std::uint8_t> mask);

struct BinStat {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  /// Empty bins carry no value.
  std::optional<double> rmse;
};

/// Sixteen 10 dB bins over [-240, -80] dB.
std::vector<double> default_bin_edges();

/// Masked RMSE grouped by the true gain. Bins are [lo, hi) except the last, which is closed.
std::vector<BinStat> binned_rmse(std::span<const double> errors, std::span<const double> truth,
                                 std::span<const std::uint8_t> mask, std::span<const double> edges);

struct Evaluation {
  double rmse = 0.0;
  double goodness_of_fit = 0.0;
  std::size_t evaluated = 0;
  std::vector<BinStat> bins;
};

/// Scores a posterior over `query_cells` (prediction plane) against the true field.
Evaluation evaluate(const UrbanWorld& world, const GainField& field, const MeasurementLog& log,
                    std::span<const Cell> query_cells, const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                    std::span<const double> edges);

}  // namespace gainscout
