#include <algorithm>
#include <numeric>

#include "gainscout/planners.hpp"
#include "gainscout/rng.hpp"

namespace gainscout {
namespace {

struct UavPath {
  std::vector<Move> moves;
  std::vector<StepDecision> decisions;
};

// Best monotone path of one UAV: every step increases the grid distance from `origin`.
// Returns as many steps as the monotone constraint allows (up to horizon).
std::vector<Move> best_monotone_path(const UrbanWorld& world, Cell start, Cell origin, int horizon,
                                     std::span<const double> variance) {
  const GridSpec& grid = world.grid();
  struct Stage {
    std::vector<int> cells;  // grid indices
    std::vector<double> value;
    std::vector<int> pred;
    std::vector<std::uint8_t> move;
    std::vector<int> order;
  };
  std::vector<Stage> stages;
  stages.push_back({{grid.index(start)}, {0.0}, {-1}, {0}, {0}});
  std::vector<int> slot_of(static_cast<std::size_t>(grid.cell_count()), -1);
  std::vector<int> rank;

  for (int t = 0; t < horizon; ++t) {
    const Stage& from = stages.back();
    Stage to;
    for (int slot : from.order) {
      const Cell c = grid.cell(from.cells[slot]);
      const int dist = manhattan(c, origin);
      for (int m = 0; m < kMoveCount; ++m) {
        const Cell n = apply(c, static_cast<Move>(m));
        if (!world.flyable(n) || manhattan(n, origin) <= dist) continue;
        const int gi = grid.index(n);
        const double v = from.value[slot] + variance[gi];
        int& s = slot_of[gi];
        if (s < 0) {
          s = static_cast<int>(to.cells.size());
          to.cells.push_back(gi);
          to.value.push_back(v);
          to.pred.push_back(slot);
          to.move.push_back(static_cast<std::uint8_t>(m));
        } else if (v > to.value[s]) {
          to.value[s] = v;
          to.pred[s] = slot;
          to.move[s] = static_cast<std::uint8_t>(m);
        }
      }
    }
    for (int gi : to.cells) slot_of[gi] = -1;
    if (to.cells.empty()) break;
    rank.assign(from.cells.size(), 0);
    for (std::size_t r = 0; r < from.order.size(); ++r) rank[from.order[r]] = static_cast<int>(r);
    to.order.resize(to.cells.size());
    std::iota(to.order.begin(), to.order.end(), 0);
    std::sort(to.order.begin(), to.order.end(), [&](int a, int b) {
      if (rank[to.pred[a]] != rank[to.pred[b]]) return rank[to.pred[a]] < rank[to.pred[b]];
      return to.move[a] < to.move[b];
    });
    stages.push_back(std::move(to));
  }

  const Stage& last = stages.back();
  int best = last.order.front();
  for (int slot : last.order) {
    if (last.value[slot] > last.value[best]) best = slot;
  }
  std::vector<Move> path(stages.size() - 1);
  for (std::size_t t = stages.size() - 1, slot = static_cast<std::size_t>(best); t > 0; --t) {
    path[t - 1] = static_cast<Move>(stages[t].move[slot]);
    slot = static_cast<std::size_t>(stages[t].pred[slot]);
  }
  return path;
}

}  // namespace

MissionPlan plan_greedy_variance(const PlanRequest& req, std::span<const double> variance_field,
                                 const SwarmState& replan_origin) {
  const UrbanWorld& world = req.world;
  const GridSpec& grid = world.grid();
  const auto n_uav = req.start.positions.size();
  if (req.horizon < 1) throw std::invalid_argument("planning horizon must be at least 1");
  if (replan_origin.positions.size() != n_uav) throw std::invalid_argument("replan origin has the wrong UAV count");
  if (static_cast<int>(variance_field.size()) != grid.cell_count()) {
    throw std::invalid_argument("variance field must cover the flight plane");
  }

  MissionPlan plan;
  plan.planner = to_string(PlannerKind::Greedy);
  std::vector<UavPath> paths(n_uav);
  for (std::size_t n = 0; n < n_uav; ++n) {
    const Cell start = req.start.positions[n];
    paths[n].moves = best_monotone_path(world, start, replan_origin.positions[n], req.horizon, variance_field);
    paths[n].decisions.assign(paths[n].moves.size(), StepDecision::Planned);
    if (static_cast<int>(paths[n].moves.size()) < req.horizon) {
      Cell at = start;
      for (Move m : paths[n].moves) at = apply(at, m);
      plan.notes.push_back("uav " + std::to_string(n) + " cornered after " + std::to_string(paths[n].moves.size()) +
                           " monotone steps; random legal fallback");
      Rng rng(derive_seed(req.params.seed, "greedy-fallback", n));
      while (static_cast<int>(paths[n].moves.size()) < req.horizon) {
        const std::vector<Move> legal = legal_moves(world, at);
        if (legal.empty()) {
          paths[n].moves.push_back(Move::Hold);
          paths[n].decisions.push_back(StepDecision::Held);
        } else {
          const Move m = legal[rng.index(legal.size())];
          paths[n].moves.push_back(m);
          paths[n].decisions.push_back(StepDecision::Fallback);
          at = apply(at, m);
        }
      }
    }
  }

  plan.positions.push_back(req.start);
  for (int t = 0; t < req.horizon; ++t) {
    JointAction a(n_uav);
    std::vector<StepDecision> d(n_uav);
    for (std::size_t n = 0; n < n_uav; ++n) {
      a[n] = paths[n].moves[t];
      d[n] = paths[n].decisions[t];
    }
    SwarmState s = transition(plan.positions.back(), a);
    double r = 0.0;
    for (std::size_t n = 0; n < n_uav; ++n) {
      if (a[n] != Move::Hold) r += variance_field[grid.index(s.positions[n])];
    }
    plan.step_rewards.push_back(r);
    plan.objective_value += r;
    plan.actions.push_back(std::move(a));
    plan.decisions.push_back(std::move(d));
    plan.positions.push_back(std::move(s));
  }
  return plan;
}

}  // namespace gainscout
