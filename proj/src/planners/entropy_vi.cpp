#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "gainscout/planners.hpp"

namespace gainscout {
namespace {

constexpr std::uint64_t kDenseLimit = 10'000'000;

// Compact numbering of flyable cells; joint states are mixed-radix numbers over it.
struct CellCodec {
  std::vector<int> id_of;     // grid index -> compact id or -1
  std::vector<Cell> cell_of;  // compact id -> cell
  int uav_count = 0;

  CellCodec(const UrbanWorld& world, int n) : uav_count(n) {
    const GridSpec& g = world.grid();
    id_of.assign(static_cast<std::size_t>(g.cell_count()), -1);
    for (Cell c : world.flyable_cells()) {
      id_of[g.index(c)] = static_cast<int>(cell_of.size());
      cell_of.push_back(c);
    }
  }

  std::uint64_t radix() const { return cell_of.size(); }

  std::uint64_t encode(const GridSpec& g, std::span<const Cell> cells) const {
    std::uint64_t key = 0;
    for (Cell c : cells) key = key * radix() + static_cast<std::uint64_t>(id_of[g.index(c)]);
    return key;
  }

  void decode(std::uint64_t key, std::span<Cell> out) const {
    for (int n = uav_count - 1; n >= 0; --n) {
      out[n] = cell_of[key % radix()];
      key /= radix();
    }
  }
};

// Slot lookup for one stage: dense array when the joint space is small, hash map otherwise.
class StageIndex {
 public:
  explicit StageIndex(std::uint64_t space) : dense_(space <= kDenseLimit) {
    if (dense_) slots_.assign(space, -1);
  }

  // Returns the slot and whether it was newly created.
  std::pair<int, bool> find_or_insert(std::uint64_t key, int next_slot) {
    if (dense_) {
      int& s = slots_[key];
      if (s >= 0) return {s, false};
      s = next_slot;
      return {s, true};
    }
    auto [it, inserted] = map_.try_emplace(key, next_slot);
    return {it->second, inserted};
  }

  void clear(std::span<const std::uint64_t> keys) {
    if (dense_) {
      for (std::uint64_t k : keys) slots_[k] = -1;
    } else {
      map_.clear();
    }
  }

 private:
  bool dense_;
  std::vector<int> slots_;
  std::unordered_map<std::uint64_t, int> map_;
};

struct Stage {
  std::vector<std::uint64_t> keys;
  std::vector<double> value;
  std::vector<int> pred;
  std::vector<std::uint32_t> action;
  std::vector<int> order;  // slots sorted by lexicographic rank of their best prefix
};

std::uint64_t checked_power(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    r *= base;
  }
  return r;
}

}  // namespace

std::vector<double> cost_to_go(const UrbanWorld& world, std::span<const double> cell_reward, int depth) {
  const GridSpec& g = world.grid();
  if (cell_reward.size() != static_cast<std::size_t>(g.cell_count())) {
    throw std::invalid_argument("cell reward must cover the grid");
  }
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  const std::vector<Cell> cells = world.flyable_cells();
  std::vector<std::vector<int>> successors(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (Move m : legal_moves(world, cells[i])) successors[i].push_back(g.index(apply(cells[i], m)));
  }
  std::vector<double> value(cell_reward.size(), 0.0);
  std::vector<double> next(cell_reward.size(), 0.0);
  for (int k = 0; k < depth; ++k) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double best = successors[i].empty() ? 0.0 : -std::numeric_limits<double>::infinity();
      for (int j : successors[i]) best = std::max(best, cell_reward[j] + value[j]);
      next[g.index(cells[i])] = best;
    }
    std::swap(value, next);
  }
  return value;
}

MissionPlan plan_entropy_vi(const PlanRequest& req) {
  const UrbanWorld& world = req.world;
  const GridSpec& grid = world.grid();
  const int n_uav = static_cast<int>(req.start.positions.size());
  if (n_uav < 1 || n_uav > req.params.max_uavs) {
    throw std::invalid_argument("entropy planner supports 1.." + std::to_string(req.params.max_uavs) + " UAVs");
  }
  if (req.horizon < 1) throw std::invalid_argument("planning horizon must be at least 1");
  for (Cell c : req.start.positions) {
    if (!world.flyable(c)) throw std::invalid_argument("start position is not flyable");
  }

  const CellCodec codec(world, n_uav);
  const std::uint64_t space = checked_power(codec.radix(), n_uav);
  if (space == std::numeric_limits<std::uint64_t>::max() || space > (std::uint64_t{1} << 56)) {
    throw BudgetExceeded("joint state space does not fit in a 64-bit key");
  }

  std::optional<EntropyReward> reward;
  if (req.history_factor != nullptr) {
    std::vector<Cell> candidates;
    for (Cell c : world.flyable_cells()) {
      for (Cell s : req.start.positions) {
        if (manhattan(c, s) <= req.horizon) {
          candidates.push_back(c);
          break;
        }
      }
    }
    reward.emplace(req.model, grid, req.history_cells, *req.history_factor, candidates);
  } else {
    reward.emplace(req.model, grid);
  }

  // Per-cell legal moves, by compact id.
  std::vector<std::vector<Move>> moves(codec.cell_of.size());
  for (std::size_t i = 0; i < moves.size(); ++i) moves[i] = legal_moves(world, codec.cell_of[i]);

  const std::uint64_t action_count = checked_power(kMoveCount, n_uav);
  std::unordered_map<std::uint64_t, double> reward_cache;

  std::vector<Stage> stages(static_cast<std::size_t>(req.horizon) + 1);
  stages[0].keys = {codec.encode(grid, req.start.positions)};
  stages[0].value = {0.0};
  stages[0].pred = {-1};
  stages[0].action = {0};
  stages[0].order = {0};

  StageIndex index(space);
  std::vector<Cell> current(static_cast<std::size_t>(n_uav));
  std::vector<Cell> next(static_cast<std::size_t>(n_uav));
  std::vector<int> digit(static_cast<std::size_t>(n_uav));
  std::vector<int> rank;

  for (int t = 0; t < req.horizon; ++t) {
    const Stage& from = stages[t];
    Stage& to = stages[t + 1];
    for (int slot : from.order) {
      const std::uint64_t key = from.keys[slot];
      codec.decode(key, current);
      std::vector<const std::vector<Move>*> options(static_cast<std::size_t>(n_uav));
      bool any = true;
      for (int n = 0; n < n_uav; ++n) {
        options[n] = &moves[codec.id_of[grid.index(current[n])]];
        any = any && !options[n]->empty();
      }
      if (!any) continue;
      // Odometer over per-UAV legal moves; UAV 0 is the slowest digit, giving
      // increasing joint-action index.
      std::fill(digit.begin(), digit.end(), 0);
      for (;;) {
        std::uint32_t action = 0;
        for (int n = 0; n < n_uav; ++n) {
          const Move m = (*options[n])[digit[n]];
          action = action * kMoveCount + static_cast<std::uint32_t>(m);
          next[n] = apply(current[n], m);
        }
        const std::uint64_t next_key = codec.encode(grid, next);
        const std::uint64_t cache_key = key * action_count + action;
        auto cached = reward_cache.find(cache_key);
        double r;
        if (cached != reward_cache.end()) {
          r = cached->second;
        } else {
          r = (*reward)(current, next);
          reward_cache.emplace(cache_key, r);
        }
        const double v = from.value[slot] + r;
        const auto [to_slot, created] = index.find_or_insert(next_key, static_cast<int>(to.keys.size()));
        if (created) {
          to.keys.push_back(next_key);
          to.value.push_back(v);
          to.pred.push_back(slot);
          to.action.push_back(action);
          if (to.keys.size() > req.params.state_budget) {
            throw BudgetExceeded("entropy planner exceeded its state budget at step " + std::to_string(t + 1));
          }
        } else if (v > to.value[to_slot]) {
          to.value[to_slot] = v;
          to.pred[to_slot] = slot;
          to.action[to_slot] = action;
        }
        int n = n_uav - 1;
        while (n >= 0 && ++digit[n] == static_cast<int>(options[n]->size())) digit[n--] = 0;
        if (n < 0) break;
      }
    }
    index.clear(to.keys);
    if (to.keys.empty()) throw BlockedSwarm("no legal joint action from any reachable state at step " + std::to_string(t));

    rank.assign(from.keys.size(), 0);
    for (std::size_t r = 0; r < from.order.size(); ++r) rank[from.order[r]] = static_cast<int>(r);
    to.order.resize(to.keys.size());
    std::iota(to.order.begin(), to.order.end(), 0);
    std::sort(to.order.begin(), to.order.end(), [&](int a, int b) {
      if (rank[to.pred[a]] != rank[to.pred[b]]) return rank[to.pred[a]] < rank[to.pred[b]];
      return to.action[a] < to.action[b];
    });
  }

  const Stage& last = stages.back();
  if (!req.terminal_value.empty() && req.terminal_value.size() != static_cast<std::size_t>(grid.cell_count())) {
    throw std::invalid_argument("terminal value must cover the grid");
  }
  const auto score = [&](int slot) {
    double v = last.value[slot];
    if (req.terminal_value.empty()) return v;
    codec.decode(last.keys[slot], current);
    for (Cell c : current) v += req.terminal_value[grid.index(c)];
    return v;
  };
  int best = last.order.front();
  double best_score = score(best);
  for (int slot : last.order) {
    const double v = score(slot);
    if (v > best_score) {
      best = slot;
      best_score = v;
    }
  }

  MissionPlan plan;
  plan.planner = to_string(PlannerKind::Entropy);
  plan.objective_value = last.value[best];
  std::vector<std::uint32_t> actions(static_cast<std::size_t>(req.horizon));
  for (int t = req.horizon, slot = best; t > 0; --t) {
    actions[t - 1] = stages[t].action[slot];
    slot = stages[t].pred[slot];
  }
  plan.positions.push_back(req.start);
  for (int t = 0; t < req.horizon; ++t) {
    JointAction a = joint_action_from_index(actions[t], n_uav);
    SwarmState s = transition(plan.positions.back(), a);
    const std::uint64_t cache_key = codec.encode(grid, plan.positions.back().positions) * action_count + actions[t];
    plan.step_rewards.push_back(reward_cache.at(cache_key));
    plan.actions.push_back(std::move(a));
    plan.positions.push_back(std::move(s));
    plan.decisions.emplace_back(static_cast<std::size_t>(n_uav), StepDecision::Planned);
  }
  return plan;
}

}  // namespace gainscout
