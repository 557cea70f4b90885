#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gainscout/grid_world.hpp"
#include "gainscout/kriging.hpp"

namespace gainscout {

enum class PlannerKind { Entropy, Greedy, RandomWaypoint };

std::string to_string(PlannerKind kind);
PlannerKind planner_from_string(const std::string& name);

/// How a UAV's move at one step came about.
enum class StepDecision : std::uint8_t {
  Planned,       ///< chosen by an optimizing planner
  Initial,       ///< random waypoint, first step: no previous action
  Repeat,        ///< random waypoint, previous action repeated
  Random,        ///< random waypoint, fresh uniform draw
  ForcedRedraw,  ///< random waypoint, repeat chosen but illegal, redrawn
  Fallback,      ///< greedy, no monotone move left: random legal move
  Held,          ///< no legal move at all
};

struct PlannerParams {
  /// Largest number of joint states kept in one stage of the entropy planner.
  std::size_t state_budget = 20'000'000;
  int max_uavs = 3;
  double repeat_prob = 0.8;
  std::uint64_t seed = 0;
};

/// Inputs of one planning call. `history` optionally conditions the entropy
/// reward on cells measured before the plan starts.
struct PlanRequest {
  const UrbanWorld& world;
  const KrigingModel& model;
  SwarmState start;
  int horizon = 1;
  PlannerParams params{};
  std::span<const Cell> history_cells{};
  const IncrementalCholesky* history_factor = nullptr;
  /// Optional per-cell value added for every UAV at the final stage when picking
  /// the plan. Not part of the reported rewards.
  std::span<const double> terminal_value{};
};

struct MissionPlan {
  std::string planner;
  std::vector<JointAction> actions;
  std::vector<SwarmState> positions;  ///< horizon + 1 states, starting with the start state
  std::vector<double> step_rewards;
  double objective_value = 0.0;
  std::vector<std::vector<StepDecision>> decisions;  ///< [step][uav]
  std::vector<std::string> notes;
};

/// (n/2) log(2 pi e) + (1/2) log|cov|, determinant via Cholesky.
double gaussian_entropy(const Eigen::MatrixXd& cov);

/// Conditional Gaussian entropy of shadowing at the next cells given the current ones.
///
/// Next cells equal to a current cell (or a history cell) contribute the jitter-floor
/// entropy (1/2) log(2 pi e jitter) each; the remaining distinct cells contribute
/// H(next | current, history) under the model kernel with jitter on observed values.
class EntropyReward {
 public:
  EntropyReward(const KrigingModel& model, const GridSpec& grid);

  /// Condition every covariance on the factor's points. Only `candidates` may be queried later.
  EntropyReward(const KrigingModel& model, const GridSpec& grid, std::span<const Cell> history_cells,
                const IncrementalCholesky& history, std::span<const Cell> candidates);

  double operator()(std::span<const Cell> current, std::span<const Cell> next) const;

  double revisit_entropy() const { return revisit_entropy_; }

 private:
  double covariance(Cell a, Cell b) const;

  const KrigingModel& model_;
  const GridSpec& grid_;
  double revisit_entropy_;
  std::vector<std::uint8_t> in_history_;
  std::vector<int> table_index_;
  Eigen::MatrixXd table_;
  bool conditioned_ = false;
};

double step_reward_entropy(const KrigingModel& model, const GridSpec& grid, std::span<const Cell> current,
                           std::span<const Cell> next);

/// Value of `depth` further single-UAV steps over a frozen per-cell reward field,
/// by value iteration: V_k(c) = max over legal moves of reward(c') + V_{k-1}(c').
/// Indexed like the grid; 0 at cells that are not flyable.
std::vector<double> cost_to_go(const UrbanWorld& world, std::span<const double> cell_reward, int depth);

/// Forward value iteration over joint swarm positions maximizing the summed
/// conditional entropy. Among optimal plans returns the lexicographically smallest
/// action sequence.
MissionPlan plan_entropy_vi(const PlanRequest& request);

/// Per-UAV forward value iteration maximizing the summed variance at newly visited
/// cells, with each UAV's grid distance from `replan_origin` growing every step.
MissionPlan plan_greedy_variance(const PlanRequest& request, std::span<const double> variance_field,
                                 const SwarmState& replan_origin);

/// Each UAV repeats its previous move with probability p, else draws a legal move uniformly.
MissionPlan plan_random_waypoint(const UrbanWorld& world, const SwarmState& state, int steps, double p,
                                 std::uint64_t seed);

/// Same policy continuing from given previous moves (Hold = none).
MissionPlan plan_random_waypoint(const UrbanWorld& world, const SwarmState& state, int steps, double p,
                                 std::uint64_t seed, std::span<const Move> previous);

}  // namespace gainscout
