#include <algorithm>
#include <cmath>
#include <numbers>

#include "gainscout/planners.hpp"

namespace gainscout {
namespace {

constexpr int kMaxJoint = 8;

// Returns the log-diagonal of the Cholesky factor of a small SPD matrix, or throws.
void small_cholesky_log_diag(double (&a)[kMaxJoint][kMaxJoint], int n, double (&log_diag)[kMaxJoint]) {
  for (int j = 0; j < n; ++j) {
    double pivot = a[j][j];
    for (int k = 0; k < j; ++k) pivot -= a[j][k] * a[j][k];
    if (!(pivot > 0.0)) throw NumericalError("conditional covariance is not positive definite");
    const double l = std::sqrt(pivot);
    a[j][j] = l;
    log_diag[j] = std::log(l);
    for (int i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (int k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
      a[i][j] = s / l;
    }
  }
}

}  // namespace

std::string to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::Entropy: return "entropy";
    case PlannerKind::Greedy: return "greedy";
    case PlannerKind::RandomWaypoint: return "random";
  }
  return "unknown";
}

PlannerKind planner_from_string(const std::string& name) {
  if (name == "entropy") return PlannerKind::Entropy;
  if (name == "greedy") return PlannerKind::Greedy;
  if (name == "random") return PlannerKind::RandomWaypoint;
  throw std::invalid_argument("unknown planner: " + name);
}

double gaussian_entropy(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw std::invalid_argument("covariance must be square");
  const auto n = static_cast<double>(cov.rows());
  if (cov.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return 0.5 * n * std::log(2.0 * std::numbers::pi * std::numbers::e) + 0.5 * log_det;
}

EntropyReward::EntropyReward(const KrigingModel& model, const GridSpec& grid)
    : model_(model),
      grid_(grid),
      revisit_entropy_(0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * model.jitter)) {
  model.validate();
  if (!(model.jitter > 0.0)) throw std::invalid_argument("entropy reward needs a positive jitter");
}

EntropyReward::EntropyReward(const KrigingModel& model, const GridSpec& grid, std::span<const Cell> history_cells,
                             const IncrementalCholesky& history, std::span<const Cell> candidates)
    : EntropyReward(model, grid) {
  in_history_.assign(static_cast<std::size_t>(grid.cell_count()), 0);
  for (Cell c : history_cells) in_history_[grid.index(c)] = 1;
  table_index_.assign(static_cast<std::size_t>(grid.cell_count()), -1);
  std::vector<Vec3> points;
  for (Cell c : candidates) {
    int& slot = table_index_[grid.index(c)];
    if (slot >= 0) continue;
    slot = static_cast<int>(points.size());
    points.push_back(grid.uav_point(c));
  }
  table_ = history.conditional_covariance(points);
  conditioned_ = true;
}

double EntropyReward::covariance(Cell a, Cell b) const {
  if (!conditioned_) return model_.kernel(grid_.uav_point(a), grid_.uav_point(b));
  const int i = table_index_[grid_.index(a)];
  const int j = table_index_[grid_.index(b)];
  if (i < 0 || j < 0) throw std::logic_error("entropy reward queried outside its candidate cells");
  return table_(i, j);
}

double EntropyReward::operator()(std::span<const Cell> current, std::span<const Cell> next) const {
  if (current.size() > 4 || next.size() > 4) throw std::invalid_argument("entropy reward supports at most 4 UAVs");
  Cell joint[kMaxJoint];
  int n_cur = 0;
  const auto seen = [&](Cell c, int upto) { return std::find(joint, joint + upto, c) != joint + upto; };
  for (Cell c : current) {
    // Cells already measured add nothing once the history is conditioned on.
    if (conditioned_ && in_history_[grid_.index(c)]) continue;
    if (!seen(c, n_cur)) joint[n_cur++] = c;
  }
  int n_all = n_cur;
  Cell revisits[kMaxJoint];
  int n_rev = 0;
  for (Cell c : next) {
    const bool known = (conditioned_ && in_history_[grid_.index(c)]) ||
                       std::find(current.begin(), current.end(), c) != current.end();
    if (known) {
      if (std::find(revisits, revisits + n_rev, c) == revisits + n_rev) revisits[n_rev++] = c;
    } else if (!seen(c, n_all)) {
      joint[n_all++] = c;
    }
  }

  double a[kMaxJoint][kMaxJoint];
  for (int i = 0; i < n_all; ++i) {
    for (int j = 0; j <= i; ++j) a[i][j] = covariance(joint[i], joint[j]);
    a[i][i] += model_.jitter;
  }
  double log_diag[kMaxJoint];
  small_cholesky_log_diag(a, n_all, log_diag);
  const int m = n_all - n_cur;
  double h = 0.5 * m * std::log(2.0 * std::numbers::pi * std::numbers::e);
  for (int i = n_cur; i < n_all; ++i) h += log_diag[i];
  return h + n_rev * revisit_entropy_;
}

double step_reward_entropy(const KrigingModel& model, const GridSpec& grid, std::span<const Cell> current,
                           std::span<const Cell> next) {
  return EntropyReward(model, grid)(current, next);
}

}  // namespace gainscout
