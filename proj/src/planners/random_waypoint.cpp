#include <algorithm>

#include "gainscout/planners.hpp"
#include "gainscout/rng.hpp"

namespace gainscout {

MissionPlan plan_random_waypoint(const UrbanWorld& world, const SwarmState& state, int steps, double p,
                                 std::uint64_t seed) {
  const std::vector<Move> none(state.positions.size(), Move::Hold);
  return plan_random_waypoint(world, state, steps, p, seed, none);
}

MissionPlan plan_random_waypoint(const UrbanWorld& world, const SwarmState& state, int steps, double p,
                                 std::uint64_t seed, std::span<const Move> previous) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("repeat probability must lie in [0, 1]");
  if (steps < 0) throw std::invalid_argument("step count must be non-negative");
  const auto n_uav = state.positions.size();
  if (previous.size() != n_uav) throw std::invalid_argument("one previous move per UAV required");

  std::vector<Rng> rngs;
  for (std::size_t n = 0; n < n_uav; ++n) rngs.emplace_back(derive_seed(seed, "random-waypoint", n));
  std::vector<Move> last(previous.begin(), previous.end());

  MissionPlan plan;
  plan.planner = to_string(PlannerKind::RandomWaypoint);
  plan.positions.push_back(state);
  for (int t = 0; t < steps; ++t) {
    const SwarmState& at = plan.positions.back();
    JointAction action(n_uav);
    std::vector<StepDecision> decisions(n_uav);
    for (std::size_t n = 0; n < n_uav; ++n) {
      Rng& rng = rngs[n];
      const std::vector<Move> legal = legal_moves(world, at.positions[n]);
      if (legal.empty()) {
        action[n] = Move::Hold;
        decisions[n] = StepDecision::Held;
        plan.notes.push_back("uav " + std::to_string(n) + " boxed in at step " + std::to_string(t) + "; holding");
        continue;
      }
      const auto draw = [&] { return legal[rng.index(legal.size())]; };
      if (last[n] == Move::Hold) {
        action[n] = draw();
        decisions[n] = StepDecision::Initial;
      } else if (rng.bernoulli(p)) {
        if (std::find(legal.begin(), legal.end(), last[n]) != legal.end()) {
          action[n] = last[n];
          decisions[n] = StepDecision::Repeat;
        } else {
          action[n] = draw();
          decisions[n] = StepDecision::ForcedRedraw;
        }
      } else {
        action[n] = draw();
        decisions[n] = StepDecision::Random;
      }
      last[n] = action[n];
    }
    SwarmState next = transition(at, action);
    plan.actions.push_back(std::move(action));
    plan.decisions.push_back(std::move(decisions));
    plan.positions.push_back(std::move(next));
    plan.step_rewards.push_back(0.0);
  }
  return plan;
}

}  // namespace gainscout
