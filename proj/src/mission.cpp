#include "gainscout/mission.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gainscout/rng.hpp"

namespace gainscout {
namespace {

std::vector<Cell> pick_distinct(Rng& rng, std::vector<Cell> pool, int count) {
  for (int i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

class MissionRunner {
 public:
  MissionRunner(const UrbanWorld& world, const GainField& field, const KrigingModel& model,
                const MissionConfig& config)
      : world_(world), grid_(world.grid()), field_(field), model_(model), config_(config) {
    result_.query_cells = world.outdoor_prediction_cells();
    result_.trajectory.planner = to_string(config.planner);
  }

  MissionResult run() {
    SwarmState state = sample_start(world_, config_.start, config_.uav_count, config_.start_seed);
    result_.trajectory.positions.push_back(state);
    record_measurements(state, 0);
    try {
      switch (config_.planner) {
        case PlannerKind::Entropy: run_entropy(); break;
        case PlannerKind::Greedy: run_greedy(); break;
        case PlannerKind::RandomWaypoint: run_random(); break;
      }
    } catch (const std::exception& e) {
      result_.abort_reason = std::string("aborted at step ") + std::to_string(step()) + ": " + e.what();
    }
    if (result_.snapshots.empty() || result_.snapshots.back().step != step()) {
      result_.final_posterior = current_posterior();
    } else {
      result_.final_posterior.mean = result_.snapshots.back().mean;
      result_.final_posterior.variance = result_.snapshots.back().variance;
      result_.final_posterior.jitter = model_.jitter;
    }
    return std::move(result_);
  }

 private:
  int step() const { return static_cast<int>(result_.trajectory.actions.size()); }
  const SwarmState& state() const { return result_.trajectory.positions.back(); }

  Posterior current_posterior() const {
    return posterior(model_, grid_, field_.tx, result_.log, result_.query_cells, false);
  }

  void record_measurements(const SwarmState& s, int t) {
    const std::size_t before = result_.log.size();
    result_.log = measure(field_, grid_, std::move(result_.log), s.positions, t, config_.noise);
    if (history_) {
      for (std::size_t i = before; i < result_.log.size(); ++i) history_->add(grid_.uav_point(result_.log.cells()[i]));
    }
    if (std::binary_search(config_.checkpoints.begin(), config_.checkpoints.end(), t)) {
      Posterior p = current_posterior();
      result_.snapshots.push_back({t, result_.log.size(), std::move(p.mean), std::move(p.variance)});
    }
  }

  // Executes the first `count` steps of a plan made from the current state.
  void execute(const MissionPlan& plan, int count) {
    for (int k = 0; k < count; ++k) {
      if (!is_legal(world_, state(), plan.actions[k])) throw std::logic_error("planner emitted an illegal action");
      MissionPlan& traj = result_.trajectory;
      traj.actions.push_back(plan.actions[k]);
      traj.step_rewards.push_back(plan.step_rewards[k]);
      traj.objective_value += plan.step_rewards[k];
      traj.decisions.push_back(plan.decisions[k]);
      traj.positions.push_back(plan.positions[k + 1]);
      traj.positions.back().step = step();
      record_measurements(traj.positions.back(), step());
    }
    result_.trajectory.notes.insert(result_.trajectory.notes.end(), plan.notes.begin(), plan.notes.end());
  }

  PlannerParams planner_params(std::uint64_t seed) const {
    PlannerParams p;
    p.state_budget = config_.state_budget;
    p.repeat_prob = config_.repeat_prob;
    p.seed = seed;
    return p;
  }

  void run_entropy() {
    if (config_.steps == 0) return;
    if (config_.entropy_window == 0) {
      // The reward does not depend on measured values, so one plan covers the mission.
      PlanRequest req{world_, model_, state(), config_.steps, planner_params(config_.planner_seed)};
      execute(plan_entropy_vi(req), config_.steps);
      return;
    }
    history_.emplace(model_);
    const std::vector<Cell> flyable = world_.flyable_cells();
    if (config_.entropy_lookahead > 0) {
      std::vector<Vec3> targets;
      for (Cell c : flyable) targets.push_back(grid_.uav_point(c));
      history_->track(std::move(targets));
    }
    for (Cell c : result_.log.cells()) history_->add(grid_.uav_point(c));
    const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
    std::vector<double> cell_entropy(static_cast<std::size_t>(grid_.cell_count()), 0.0);
    while (step() < config_.steps) {
      const int horizon = std::min(config_.entropy_window, config_.steps - step());
      const int lookahead = std::min(config_.entropy_lookahead, config_.steps - step() - horizon);
      std::vector<double> terminal;
      if (lookahead > 0) {
        const Eigen::VectorXd& var = history_->tracked_variance();
        for (std::size_t i = 0; i < flyable.size(); ++i) {
          cell_entropy[grid_.index(flyable[i])] = 0.5 * std::log(two_pi_e * std::max(var(static_cast<Eigen::Index>(i)), model_.jitter));
        }
        for (Cell c : result_.log.cells()) cell_entropy[grid_.index(c)] = 0.5 * std::log(two_pi_e * model_.jitter);
        terminal = cost_to_go(world_, cell_entropy, lookahead);
      }
      PlanRequest req{world_, model_, state(), horizon, planner_params(config_.planner_seed),
                      result_.log.cells(), &*history_, terminal};
      const MissionPlan plan = plan_entropy_vi(req);
      execute(plan, std::min(config_.entropy_execute, horizon));
    }
  }

  void run_greedy() {
    const int warmup = std::min(config_.warmup_steps, config_.steps);
    if (warmup > 0) {
      const MissionPlan plan = plan_random_waypoint(world_, state(), warmup, config_.repeat_prob,
                                                    derive_seed(config_.planner_seed, "warmup"));
      execute(plan, warmup);
    }
    int round = 0;
    while (step() < config_.steps) {
      const std::vector<double> variance = posterior_variance_field(model_, world_, result_.log, Plane::Flight);
      const double total = std::accumulate(variance.begin(), variance.end(), 0.0);
      if (!result_.replan_variance_totals.empty() && !(total < result_.replan_variance_totals.back())) {
        throw std::logic_error("variance field did not decrease between replanning points");
      }
      result_.replan_variance_totals.push_back(total);
      const int horizon = std::min(config_.replan_period, config_.steps - step());
      PlanRequest req{world_, model_, state(), horizon,
                      planner_params(derive_seed(config_.planner_seed, "greedy", static_cast<std::uint64_t>(round)))};
      const MissionPlan plan = plan_greedy_variance(req, variance, state());
      execute(plan, horizon);
      ++round;
    }
  }

  void run_random() {
    if (config_.steps == 0) return;
    const MissionPlan plan = plan_random_waypoint(world_, state(), config_.steps, config_.repeat_prob,
                                                  derive_seed(config_.planner_seed, "random"));
    execute(plan, config_.steps);
  }

  const UrbanWorld& world_;
  const GridSpec& grid_;
  const GainField& field_;
  const KrigingModel& model_;
  const MissionConfig& config_;
  MissionResult result_;
  std::optional<IncrementalCholesky> history_;
};

}  // namespace

std::string to_string(StartPolicy::Kind kind) {
  return kind == StartPolicy::Kind::Rectangle ? "rectangle" : "whole";
}

StartPolicy::Kind start_policy_from_string(const std::string& name) {
  if (name == "rectangle") return StartPolicy::Kind::Rectangle;
  if (name == "whole") return StartPolicy::Kind::WholeArea;
  throw std::invalid_argument("unknown start policy: " + name);
}

void MissionConfig::validate() const {
  if (uav_count < 1) throw std::invalid_argument("at least one UAV required");
  if (steps < 0) throw std::invalid_argument("steps must be non-negative");
  if (planner == PlannerKind::Greedy && steps > 0 && !(warmup_steps < steps)) {
    throw std::invalid_argument("warmup must be shorter than the mission");
  }
  if (replan_period < 1) throw std::invalid_argument("replan period must be at least 1");
  if (entropy_window < 0 || entropy_execute < 1 || entropy_lookahead < 0) throw std::invalid_argument("bad entropy window");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) throw std::invalid_argument("checkpoints must be sorted");
  for (int c : checkpoints) {
    if (c < 0 || c > steps) throw std::invalid_argument("checkpoint outside the mission");
  }
  if (!(repeat_prob >= 0.0 && repeat_prob <= 1.0)) throw std::invalid_argument("repeat probability must lie in [0,1]");
}

SwarmState sample_start(const UrbanWorld& world, const StartPolicy& policy, int uav_count, std::uint64_t seed) {
  if (uav_count < 1) throw std::invalid_argument("at least one UAV required");
  const std::vector<Cell> flyable = world.flyable_cells();
  if (flyable.empty()) throw std::invalid_argument("world has no flyable cells at UAV altitude");
  if (static_cast<int>(flyable.size()) < uav_count) throw std::invalid_argument("fewer flyable cells than UAVs");
  Rng rng(derive_seed(seed, "start"));
  if (policy.kind == StartPolicy::Kind::WholeArea) return {pick_distinct(rng, flyable, uav_count), 0};

  const GridSpec& g = world.grid();
  const int side_x = std::clamp(static_cast<int>(std::lround(policy.rectangle_side_m / g.spacing_m)), 1, g.nx());
  const int side_y = std::clamp(static_cast<int>(std::lround(policy.rectangle_side_m / g.spacing_m)), 1, g.ny());
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const int x0 = rng.integer(0, g.nx() - side_x);
    const int y0 = rng.integer(0, g.ny() - side_y);
    std::vector<Cell> pool;
    for (int x = x0; x < x0 + side_x; ++x) {
      for (int y = y0; y < y0 + side_y; ++y) {
        if (world.flyable({x, y})) pool.push_back({x, y});
      }
    }
    if (static_cast<int>(pool.size()) >= uav_count) return {pick_distinct(rng, std::move(pool), uav_count), 0};
  }
  throw std::invalid_argument("no start rectangle with enough flyable cells");
}

MissionResult run_mission(const UrbanWorld& world, const GainField& field, const KrigingModel& model,
                          const MissionConfig& config) {
  config.validate();
  model.validate();
  return MissionRunner(world, field, model, config).run();
}

}  // namespace gainscout
