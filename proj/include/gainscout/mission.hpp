#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gainscout/channel.hpp"
#include "gainscout/grid_world.hpp"
#include "gainscout/kriging.hpp"
#include "gainscout/planners.hpp"

namespace gainscout {

struct StartPolicy {
  enum class Kind { Rectangle, WholeArea };
  Kind kind = Kind::Rectangle;
  double rectangle_side_m = 40.0;

  friend bool operator==(const StartPolicy&, const StartPolicy&) = default;
};

std::string to_string(StartPolicy::Kind kind);
StartPolicy::Kind start_policy_from_string(const std::string& name);

struct MissionConfig {
  PlannerKind planner = PlannerKind::Entropy;
  int uav_count = 3;
  int steps = 200;
  /// Greedy only: random-waypoint warmup, then replanning period.
  int warmup_steps = 20;
  int replan_period = 40;
  double repeat_prob = 0.8;
  StartPolicy start{};
  /// Entropy only. 0 plans the whole mission once (feasible only on small grids);
  /// otherwise plans `entropy_window` steps conditioned on everything measured so far
  /// and executes `entropy_execute` of them before replanning.
  int entropy_window = 3;
  int entropy_execute = 1;
  /// Windowed entropy only: steps of single-UAV cost-to-go, over the entropy of each
  /// cell given the measurements, credited at the end of each window. 0 disables.
  int entropy_lookahead = 40;
  std::uint64_t start_seed = 0;
  std::uint64_t planner_seed = 0;
  /// Steps after which the posterior is snapshotted (sorted, within [0, steps]).
  std::vector<int> checkpoints;
  MeasurementNoise noise{};
  std::size_t state_budget = 20'000'000;

  void validate() const;

  friend bool operator==(const MissionConfig&, const MissionConfig&) = default;
};

struct PosteriorSnapshot {
  int step = 0;
  std::size_t measured = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

struct MissionResult {
  MeasurementLog log;
  /// Outdoor prediction-plane cells the posteriors refer to, in grid order.
  std::vector<Cell> query_cells;
  Posterior final_posterior;
  /// Executed actions, positions (steps + 1), rewards and per-step decisions.
  MissionPlan trajectory;
  std::vector<PosteriorSnapshot> snapshots;
  /// Greedy: total flight-plane variance at each replanning point.
  std::vector<double> replan_variance_totals;
  std::optional<std::string> abort_reason;
};

/// Places N UAVs on distinct flyable cells according to the policy.
SwarmState sample_start(const UrbanWorld& world, const StartPolicy& policy, int uav_count, std::uint64_t seed);

/// Closed loop: start, measure, then plan/move/measure for `steps` steps.
MissionResult run_mission(const UrbanWorld& world, const GainField& field, const KrigingModel& model,
                          const MissionConfig& config);

}  // namespace gainscout
