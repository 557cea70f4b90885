#include "gainscout/kriging.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gainscout {
namespace {

constexpr double kVarianceTolerance = 1e-9;

Eigen::MatrixXd kernel_matrix(const KrigingModel& m, std::span<const Vec3> a, std::span<const Vec3> b) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) k(i, j) = m.kernel(a[i], b[j]);
  }
  return k;
}

Eigen::MatrixXd symmetric_kernel_matrix(const KrigingModel& m, std::span<const Vec3> pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = m.phi;
    for (Eigen::Index i = j + 1; i < n; ++i) k(i, j) = k(j, i) = m.kernel(pts[i], pts[j]);
  }
  return k;
}

// Factorizes K + jitter I, escalating the jitter by 10x at most twice.
Eigen::LLT<Eigen::MatrixXd> factor_with_jitter(const Eigen::MatrixXd& k, double phi, double& jitter) {
  double j = jitter;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      jitter = j;
      return llt;
    }
    j = std::max(j, 1e-8 * phi) * 10.0;
  }
  throw NumericalError("observed covariance is not positive definite after jitter escalation");
}

struct ScaledFactor {
  double log_det = 0.0;  // log |R + eps I|
  double quad = 0.0;     // y^T (R + eps I)^-1 y
  double count = 0.0;
};

// Correlation-matrix statistics for one delta, summed over sets.
ScaledFactor scaled_factor(std::span<const ResidualSet> sets, double delta, double relative_jitter) {
  ScaledFactor out;
  const KrigingModel unit = KrigingModel::make(0.0, 0.0, 1.0, delta);
  for (const ResidualSet& s : sets) {
    Eigen::MatrixXd r = symmetric_kernel_matrix(unit, s.points);
    r.diagonal().array() += relative_jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) throw NumericalError("residual covariance is not positive definite");
    const Eigen::Map<const Eigen::VectorXd> y(s.residuals.data(), static_cast<Eigen::Index>(s.residuals.size()));
    const Eigen::VectorXd w = llt.matrixL().solve(y);
    out.log_det += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    out.quad += w.squaredNorm();
    out.count += static_cast<double>(s.residuals.size());
  }
  return out;
}

double nll_from(const ScaledFactor& f, double phi) {
  return 0.5 * (f.count * std::log(phi) + f.log_det + f.quad / phi + f.count * std::log(2.0 * std::numbers::pi));
}

std::vector<double> log_space(double lo, double hi, int count) {
  std::vector<double> v(static_cast<std::size_t>(count));
  if (count == 1) {
    v[0] = std::sqrt(lo * hi);
    return v;
  }
  for (int i = 0; i < count; ++i) {
    v[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (count - 1));
  }
  return v;
}

}  // namespace

KrigingModel KrigingModel::make(double alpha, double beta, double phi, double delta, double distance_floor_m) {
  KrigingModel m;
  m.alpha = alpha;
  m.beta = beta;
  m.phi = phi;
  m.delta = delta;
  m.jitter = 1e-6 * phi;
  m.distance_floor_m = distance_floor_m;
  return m;
}

void KrigingModel::validate() const {
  if (!(phi > 0.0) || !(delta > 0.0)) throw std::invalid_argument("kernel phi and delta must be positive");
  if (!(jitter >= 0.0)) throw std::invalid_argument("jitter must be non-negative");
}

double KrigingModel::kernel(const Vec3& a, const Vec3& b) const { return gainscout::kernel(a, b, phi, delta); }

double KrigingModel::mean(const Vec3& q, const Vec3& tx) const {
  return path_loss(q, tx, alpha, beta, distance_floor_m);
}

double path_loss(const Vec3& q, const Vec3& tx, double alpha, double beta, double distance_floor_m) {
  return alpha - beta * std::log(std::max(distance(q, tx), distance_floor_m));
}

PathLossFit fit_path_loss(std::span<const DistanceGain> samples) {
  if (samples.size() < 2) throw std::invalid_argument("path-loss fit needs at least two samples");
  double mx = 0.0;
  double mg = 0.0;
  for (const DistanceGain& s : samples) {
    if (!(s.distance_m > 0.0)) throw std::invalid_argument("path-loss sample distance must be positive");
    mx += -std::log(s.distance_m);
    mg += s.gain_db;
  }
  const auto n = static_cast<double>(samples.size());
  mx /= n;
  mg /= n;
  double sxx = 0.0;
  double sxg = 0.0;
  for (const DistanceGain& s : samples) {
    const double dx = -std::log(s.distance_m) - mx;
    sxx += dx * dx;
    sxg += dx * (s.gain_db - mg);
  }
  if (sxx <= 0.0) throw std::invalid_argument("path-loss fit is degenerate: all distances are equal");
  PathLossFit fit;
  fit.beta = sxg / sxx;
  fit.alpha = mg - fit.beta * mx;
  for (const DistanceGain& s : samples) {
    const double e = s.gain_db - (fit.alpha - fit.beta * std::log(s.distance_m));
    fit.mse += e * e;
  }
  fit.mse /= n;
  return fit;
}

double kernel(const Vec3& a, const Vec3& b, double phi, double delta) {
  return phi * std::exp(-distance(a, b) / delta);
}

double kernel_nll(std::span<const ResidualSet> sets, double phi, double delta, double relative_jitter) {
  return nll_from(scaled_factor(sets, delta, relative_jitter), phi);
}

KernelFit fit_kernel(std::span<const ResidualSet> sets, const KernelFitOptions& options) {
  double count = 0.0;
  double mean_square = 0.0;
  double min_dist = std::numeric_limits<double>::infinity();
  double max_dist = 0.0;
  for (const ResidualSet& s : sets) {
    if (s.points.size() != s.residuals.size()) throw std::invalid_argument("residual set size mismatch");
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      mean_square += s.residuals[i] * s.residuals[i];
      for (std::size_t j = i + 1; j < s.points.size(); ++j) {
        const double r = distance(s.points[i], s.points[j]);
        if (r == 0.0) throw std::invalid_argument("residual locations must be distinct");
        min_dist = std::min(min_dist, r);
        max_dist = std::max(max_dist, r);
      }
    }
    count += static_cast<double>(s.points.size());
  }
  if (count < 3) throw std::invalid_argument("kernel fit needs at least three residuals");
  mean_square /= count;
  if (!(mean_square > 0.0)) mean_square = 1.0;

  const double phi_lo = options.phi_min > 0.0 ? options.phi_min : 1e-2 * mean_square;
  const double phi_hi = options.phi_max > 0.0 ? options.phi_max : 1e2 * mean_square;
  const double delta_lo = options.delta_min > 0.0 ? options.delta_min : 0.25 * min_dist;
  const double delta_hi = options.delta_max > 0.0 ? options.delta_max : 4.0 * max_dist;
  if (!(phi_lo <= phi_hi) || !(delta_lo <= delta_hi)) throw std::invalid_argument("empty kernel search range");

  const std::vector<double> phis = log_space(phi_lo, phi_hi, options.phi_grid);
  const std::vector<double> deltas = log_space(delta_lo, delta_hi, options.delta_grid);

  // Stage 1: grid. Each delta costs one factorization; phi only rescales.
  KernelFit best{phis.front(), deltas.front(), std::numeric_limits<double>::infinity()};
  std::size_t best_delta = 0;
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    const ScaledFactor f = scaled_factor(sets, deltas[j], options.relative_jitter);
    for (double phi : phis) {
      const double v = nll_from(f, phi);
      if (v < best.nll) {
        best = {phi, deltas[j], v};
        best_delta = j;
      }
    }
  }

  // Stage 2: golden-section in log delta between the neighbouring grid points, with
  // phi set to its closed-form minimizer quad / count (clamped to the search range).
  const auto profile = [&](double delta) {
    const ScaledFactor f = scaled_factor(sets, delta, options.relative_jitter);
    const double phi = std::clamp(f.quad / f.count, phi_lo, phi_hi);
    return KernelFit{phi, delta, nll_from(f, phi)};
  };
  double a = std::log(deltas[best_delta == 0 ? 0 : best_delta - 1]);
  double b = std::log(deltas[std::min(best_delta + 1, deltas.size() - 1)]);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  KernelFit fc = profile(std::exp(c));
  KernelFit fd = profile(std::exp(d));
  for (int it = 0; it < options.refine_iterations && b - a > 1e-9; ++it) {
    if (fc.nll <= fd.nll) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = profile(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = profile(std::exp(d));
    }
  }
  const KernelFit refined = fc.nll <= fd.nll ? fc : fd;
  if (refined.nll < best.nll) best = refined;
  // The grid point itself with phi profiled can only improve on the grid minimum.
  const KernelFit at_grid = profile(deltas[best_delta]);
  if (at_grid.nll < best.nll) best = at_grid;
  return best;
}

KrigingModel fit_model(std::span<const FitGroup> groups, double distance_floor_m, const KernelFitOptions& options) {
  std::vector<DistanceGain> samples;
  for (const FitGroup& g : groups) {
    if (g.points.size() != g.gains.size()) throw std::invalid_argument("fit group size mismatch");
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      samples.push_back({std::max(distance(g.points[i], g.tx), distance_floor_m), g.gains[i]});
    }
  }
  const PathLossFit pl = fit_path_loss(samples);
  std::vector<ResidualSet> sets;
  for (const FitGroup& g : groups) {
    ResidualSet s{g.points, {}};
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      s.residuals.push_back(g.gains[i] - path_loss(g.points[i], g.tx, pl.alpha, pl.beta, distance_floor_m));
    }
    sets.push_back(std::move(s));
  }
  const KernelFit kf = fit_kernel(sets, options);
  KrigingModel m = KrigingModel::make(pl.alpha, pl.beta, kf.phi, kf.delta, distance_floor_m);
  m.jitter = options.relative_jitter * kf.phi;
  m.fit = {"fit", static_cast<int>(samples.size()), pl.mse, kf.nll};
  return m;
}

Posterior posterior_at(const KrigingModel& model, const Vec3& tx, std::span<const Vec3> data,
                       std::span<const double> values, std::span<const Vec3> queries, bool want_full_cov) {
  model.validate();
  if (data.empty()) throw std::invalid_argument("posterior needs at least one measurement");
  if (data.size() != values.size()) throw std::invalid_argument("measurement locations and values differ in size");

  const auto n = static_cast<Eigen::Index>(data.size());
  const auto m = static_cast<Eigen::Index>(queries.size());
  Posterior post;
  post.jitter = model.jitter;
  const Eigen::LLT<Eigen::MatrixXd> llt = factor_with_jitter(symmetric_kernel_matrix(model, data), model.phi, post.jitter);

  Eigen::VectorXd residual(n);
  for (Eigen::Index i = 0; i < n; ++i) residual(i) = values[i] - model.mean(data[i], tx);
  const Eigen::MatrixXd cross = kernel_matrix(model, data, queries);  // Sigma_vp
  const Eigen::VectorXd weights = llt.solve(residual);
  const Eigen::MatrixXd v = llt.matrixL().solve(cross);  // L^-1 Sigma_vp

  post.mean = cross.transpose() * weights;
  for (Eigen::Index j = 0; j < m; ++j) post.mean(j) += model.mean(queries[j], tx);

  post.variance = Eigen::VectorXd::Constant(m, model.phi) - v.colwise().squaredNorm().transpose();
  for (Eigen::Index j = 0; j < m; ++j) {
    if (post.variance(j) < -kVarianceTolerance * std::max(1.0, model.phi)) {
      throw NumericalError("posterior variance is negative beyond tolerance");
    }
    post.variance(j) = std::max(post.variance(j), 0.0);
  }
  if (want_full_cov) {
    Eigen::MatrixXd cov = symmetric_kernel_matrix(model, queries);
    cov.noalias() -= v.transpose() * v;
    post.covariance = std::move(cov);
  }
  return post;
}

Posterior posterior(const KrigingModel& model, const GridSpec& grid, const Vec3& tx, const MeasurementLog& log,
                    std::span<const Cell> queries, bool want_full_cov) {
  std::vector<Vec3> data;
  data.reserve(log.size());
  for (Cell c : log.cells()) data.push_back(grid.uav_point(c));
  std::vector<Vec3> points;
  points.reserve(queries.size());
  for (Cell c : queries) points.push_back(grid.pred_point(c));
  return posterior_at(model, tx, data, log.values(), points, want_full_cov);
}

std::vector<double> posterior_variance_field(const KrigingModel& model, const UrbanWorld& world,
                                             const MeasurementLog& log, Plane plane) {
  const GridSpec& grid = world.grid();
  const double altitude = plane == Plane::Prediction ? grid.pred_altitude_m : grid.uav_altitude_m;
  std::vector<int> indices;
  std::vector<Vec3> points;
  for (int i = 0; i < grid.cell_count(); ++i) {
    const Cell c = grid.cell(i);
    if (world.height(c) < altitude) {
      indices.push_back(i);
      points.push_back(grid.at_altitude(c, altitude));
    }
  }
  std::vector<double> field(static_cast<std::size_t>(grid.cell_count()), 0.0);
  if (log.empty()) {
    model.validate();
    for (int i : indices) field[i] = model.phi;
    return field;
  }
  std::vector<Vec3> data;
  for (Cell c : log.cells()) data.push_back(grid.uav_point(c));
  // Values do not enter the variance; the path-loss mean is irrelevant here.
  const std::vector<double> zeros(data.size(), 0.0);
  const Posterior post = posterior_at(model, Vec3{}, data, zeros, points, false);
  for (std::size_t k = 0; k < indices.size(); ++k) field[indices[k]] = post.variance(static_cast<Eigen::Index>(k));
  return field;
}

void IncrementalCholesky::add(const Vec3& point) {
  const auto n = static_cast<Eigen::Index>(points_.size());
  if (factor_.rows() <= n) {
    const Eigen::Index capacity = std::max<Eigen::Index>(16, 2 * factor_.rows());
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(capacity, capacity);
    grown.topLeftCorner(n, n) = factor_.topLeftCorner(n, n);
    factor_ = std::move(grown);
  }
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = model_.kernel(points_[i], point);
  Eigen::VectorXd row = k;
  if (n > 0) factor_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(row);
  const double pivot = model_.phi + model_.jitter - row.squaredNorm();
  if (!(pivot > 0.0)) throw NumericalError("incremental factor lost positive definiteness");
  factor_.row(n).head(n) = row.transpose();
  factor_(n, n) = std::sqrt(pivot);
  points_.push_back(point);

  if (targets_.empty()) return;
  if (whitened_.rows() <= n) {
    Eigen::MatrixXd grown(factor_.rows(), static_cast<Eigen::Index>(targets_.size()));
    grown.topRows(n) = whitened_.topRows(n);
    whitened_ = std::move(grown);
  }
  Eigen::RowVectorXd w = kernel_matrix(model_, std::span<const Vec3>(&point, 1), targets_);
  if (n > 0) w.noalias() -= row.transpose() * whitened_.topRows(n);
  w /= factor_(n, n);
  whitened_.row(n) = w;
  tracked_variance_ -= w.transpose().cwiseAbs2();
}

void IncrementalCholesky::track(std::vector<Vec3> targets) {
  targets_ = std::move(targets);
  const auto n = static_cast<Eigen::Index>(points_.size());
  const auto m = static_cast<Eigen::Index>(targets_.size());
  tracked_variance_ = Eigen::VectorXd::Constant(m, model_.phi);
  whitened_.resize(std::max<Eigen::Index>(factor_.rows(), 16), m);
  if (n == 0) return;
  Eigen::MatrixXd cross = kernel_matrix(model_, points_, targets_);
  factor_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(cross);
  whitened_.topRows(n) = cross;
  tracked_variance_ -= cross.colwise().squaredNorm().transpose();
}

Eigen::MatrixXd IncrementalCholesky::conditional_covariance(std::span<const Vec3> targets) const {
  Eigen::MatrixXd cov = symmetric_kernel_matrix(model_, targets);
  const auto n = static_cast<Eigen::Index>(points_.size());
  if (n == 0) return cov;
  Eigen::MatrixXd cross = kernel_matrix(model_, points_, targets);
  factor_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(cross);
  cov.noalias() -= cross.transpose() * cross;
  return cov;
}

}  // namespace gainscout
