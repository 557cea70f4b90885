#include "gainscout/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gainscout {
namespace {

void check_sizes(std::size_t a, std::size_t b, std::size_t mask) {
  if (a != b || a != mask) throw std::invalid_argument("metric inputs differ in length");
}

}  // namespace

std::vector<std::uint8_t> eval_mask(const UrbanWorld& world, const MeasurementLog& log) {
  const GridSpec& g = world.grid();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.cell_count()), 0);
  for (int x = 0; x < g.nx(); ++x) {
    for (int y = 0; y < g.ny(); ++y) {
      if (world.outdoor_at_prediction({x, y})) mask[g.index({x, y})] = 1;
    }
  }
  if (g.planes_coincide()) {
    for (Cell c : log.cells()) mask[g.index(c)] = 0;
  }
  return mask;
}

double rmse(std::span<const double> prediction, std::span<const double> truth, std::span<const std::uint8_t> mask) {
  check_sizes(prediction.size(), truth.size(), mask.size());
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (!mask[j]) continue;
    const double e = prediction[j] - truth[j];
    sum += e * e;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("evaluation mask is empty");
  return std::sqrt(sum / static_cast<double>(n));
}

double goodness_of_fit(std::span<const double> errors, std::span<const double> variances,
                       std::span<const std::uint8_t> mask) {
  check_sizes(errors.size(), variances.size(), mask.size());
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (!mask[j]) continue;
    if (!(variances[j] > 0.0)) throw std::invalid_argument("goodness of fit needs positive variance on the mask");
    sum += errors[j] * errors[j] / variances[j];
    ++n;
  }
  if (n == 0) throw std::invalid_argument("evaluation mask is empty");
  return std::log(sum / static_cast<double>(n));
}

std::vector<double> default_bin_edges() {
  std::vector<double> edges;
  for (int k = 0; k <= 16; ++k) edges.push_back(-240.0 + 10.0 * k);
  return edges;
}

std::vector<BinStat> binned_rmse(std::span<const double> errors, std::span<const double> truth,
                                 std::span<const std::uint8_t> mask, std::span<const double> edges) {
  check_sizes(errors.size(), truth.size(), mask.size());
  if (edges.size() < 2) throw std::invalid_argument("need at least one bin");
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1])) throw std::invalid_argument("bin edges must increase");
  }
  const std::size_t bins = edges.size() - 1;
  std::vector<double> sums(bins, 0.0);
  std::vector<BinStat> out(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    out[k].lo = edges[k];
    out[k].hi = edges[k + 1];
  }
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (!mask[j]) continue;
    const double v = truth[j];
    if (v < edges.front() || v > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t k = static_cast<std::size_t>(it - edges.begin()) - 1;
    if (k >= bins) k = bins - 1;
    sums[k] += errors[j] * errors[j];
    ++out[k].count;
  }
  for (std::size_t k = 0; k < bins; ++k) {
    if (out[k].count > 0) out[k].rmse = std::sqrt(sums[k] / static_cast<double>(out[k].count));
  }
  return out;
}

Evaluation evaluate(const UrbanWorld& world, const GainField& field, const MeasurementLog& log,
                    std::span<const Cell> query_cells, const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                    std::span<const double> edges) {
  const GridSpec& g = world.grid();
  if (mean.size() != static_cast<Eigen::Index>(query_cells.size()) || variance.size() != mean.size()) {
    throw std::invalid_argument("posterior does not match the query cells");
  }
  const std::vector<std::uint8_t> full_mask = eval_mask(world, log);
  std::vector<double> err, var, truth;
  std::vector<std::uint8_t> mask;
  for (std::size_t k = 0; k < query_cells.size(); ++k) {
    const int i = g.index(query_cells[k]);
    err.push_back(mean(static_cast<Eigen::Index>(k)) - field.pred_plane[i]);
    var.push_back(variance(static_cast<Eigen::Index>(k)));
    truth.push_back(field.pred_plane[i]);
    mask.push_back(full_mask[i]);
  }
  std::size_t masked = 0;
  for (std::size_t i = 0; i < full_mask.size(); ++i) masked += full_mask[i];
  std::size_t covered = 0;
  for (std::uint8_t m : mask) covered += m;
  if (covered != masked) throw std::invalid_argument("query cells do not cover the evaluation mask");

  Evaluation e;
  const std::vector<double> zeros(err.size(), 0.0);
  e.rmse = rmse(err, zeros, mask);
  e.goodness_of_fit = goodness_of_fit(err, var, mask);
  e.evaluated = covered;
  e.bins = binned_rmse(err, truth, mask, edges);
  return e;
}

}  // namespace gainscout
