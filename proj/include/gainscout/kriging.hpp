#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gainscout/channel.hpp"
#include "gainscout/common.hpp"
#include "gainscout/grid_world.hpp"

namespace gainscout {

struct FitMetadata {
  std::string source = "manual";
  int sample_count = 0;
  double path_loss_mse = 0.0;
  double kernel_nll = 0.0;

  friend bool operator==(const FitMetadata&, const FitMetadata&) = default;
};

/// Log-distance mean plus exponential (Gudmundson) shadowing covariance.
struct KrigingModel {
  double alpha = 0.0;  ///< gain at 1 m, dB
  double beta = 0.0;   ///< dB per unit natural-log distance
  double phi = 1.0;    ///< shadowing variance, dB^2
  double delta = 1.0;  ///< correlation distance, m
  double jitter = 1e-6;  ///< added to the diagonal of observed covariances, dB^2
  double distance_floor_m = 0.0;
  FitMetadata fit;

  /// Model with the default jitter of 1e-6 * phi.
  static KrigingModel make(double alpha, double beta, double phi, double delta, double distance_floor_m = 0.0);

  void validate() const;
  double kernel(const Vec3& a, const Vec3& b) const;
  double mean(const Vec3& q, const Vec3& tx) const;

  friend bool operator==(const KrigingModel&, const KrigingModel&) = default;
};

/// alpha - beta * ln(max(|q - tx|, floor)).
double path_loss(const Vec3& q, const Vec3& tx, double alpha, double beta, double distance_floor_m = 0.0);

struct DistanceGain {
  double distance_m = 0.0;
  double gain_db = 0.0;
};

struct PathLossFit {
  double alpha = 0.0;
  double beta = 0.0;
  double mse = 0.0;
};

/// Least squares of gain on (1, -ln distance).
PathLossFit fit_path_loss(std::span<const DistanceGain> samples);

/// phi * exp(-|a - b| / delta).
double kernel(const Vec3& a, const Vec3& b, double phi, double delta);

/// Shadowing residuals observed at points, one independent realization per set.
struct ResidualSet {
  std::vector<Vec3> points;
  std::vector<double> residuals;
};

struct KernelFitOptions {
  int phi_grid = 25;
  int delta_grid = 25;
  /// Search bounds; non-positive values are derived from the data.
  double phi_min = 0.0;
  double phi_max = 0.0;
  double delta_min = 0.0;
  double delta_max = 0.0;
  /// Diagonal jitter relative to phi.
  double relative_jitter = 1e-6;
  int refine_iterations = 60;
};

struct KernelFit {
  double phi = 0.0;
  double delta = 0.0;
  double nll = 0.0;
};

/// Zero-mean Gaussian negative log-likelihood summed over the sets.
double kernel_nll(std::span<const ResidualSet> sets, double phi, double delta, double relative_jitter = 1e-6);

/// Grid search over (phi, delta) followed by a bracketed refinement in delta with phi
/// at its exact conditional optimum. Deterministic.
KernelFit fit_kernel(std::span<const ResidualSet> sets, const KernelFitOptions& options = {});

/// Samples for fitting a full model: gains observed at points around a known transmitter.
struct FitGroup {
  Vec3 tx;
  std::vector<Vec3> points;
  std::vector<double> gains;
};

/// Path loss by least squares over all groups, then the kernel on the residuals.
KrigingModel fit_model(std::span<const FitGroup> groups, double distance_floor_m, const KernelFitOptions& options = {});

struct Posterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  std::optional<Eigen::MatrixXd> covariance;
  /// Jitter actually used after escalation.
  double jitter = 0.0;
};

/// Gaussian conditioning of the gain at `queries` on `values` observed at `data`.
Posterior posterior_at(const KrigingModel& model, const Vec3& tx, std::span<const Vec3> data,
                       std::span<const double> values, std::span<const Vec3> queries, bool want_full_cov);

/// Posterior at prediction-plane cells given a measurement log on the flight plane.
Posterior posterior(const KrigingModel& model, const GridSpec& grid, const Vec3& tx, const MeasurementLog& log,
                    std::span<const Cell> queries, bool want_full_cov = false);

enum class Plane { Prediction, Flight };

/// Posterior variance at every cell of a plane, 0 at cells inside buildings at that altitude.
/// Depends only on the measured locations.
std::vector<double> posterior_variance_field(const KrigingModel& model, const UrbanWorld& world,
                                             const MeasurementLog& log, Plane plane = Plane::Prediction);

/// Growing lower Cholesky factor of the jittered kernel matrix of observed points.
class IncrementalCholesky {
 public:
  explicit IncrementalCholesky(KrigingModel model) : model_(std::move(model)) {}

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// Throws NumericalError if the extended matrix is not positive definite.
  void add(const Vec3& point);

  /// Covariance of `targets` conditioned on all added points.
  Eigen::MatrixXd conditional_covariance(std::span<const Vec3> targets) const;

  /// Keeps the conditional variance of `targets` current as points are added,
  /// at O(size * targets) per point.
  void track(std::vector<Vec3> targets);
  const std::vector<Vec3>& tracked() const { return targets_; }
  const Eigen::VectorXd& tracked_variance() const { return tracked_variance_; }

 private:
  KrigingModel model_;
  std::vector<Vec3> points_;
  Eigen::MatrixXd factor_;
  std::vector<Vec3> targets_;
  Eigen::MatrixXd whitened_;  // rows: L^-1 K(points, targets), capacity-padded
  Eigen::VectorXd tracked_variance_;
};

}  // namespace gainscout
