#include "gainscout/grid_world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "gainscout/rng.hpp"

namespace gainscout {
namespace {

int cells_along(double extent_m, double spacing_m) {
  return static_cast<int>(std::lround(extent_m / spacing_m));
}

void require_whole_cells(double extent_m, double spacing_m, const char* name) {
  const double ratio = extent_m / spacing_m;
  if (!(ratio >= 1.0) || std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument(std::string(name) + " must be a positive whole number of grid spacings");
  }
}

std::vector<int> label_buildings(const GridSpec& grid, const std::vector<double>& heights) {
  std::vector<int> labels(heights.size(), -1);
  int next = 0;
  std::queue<Cell> frontier;
  for (int i = 0; i < grid.cell_count(); ++i) {
    if (heights[i] <= 0.0 || labels[i] >= 0) continue;
    labels[i] = next;
    frontier.push(grid.cell(i));
    while (!frontier.empty()) {
      const Cell c = frontier.front();
      frontier.pop();
      for (int m = 0; m < kMoveCount; ++m) {
        const Cell n = apply(c, static_cast<Move>(m));
        if (!grid.contains(n)) continue;
        const int j = grid.index(n);
        if (labels[j] < 0 && heights[j] == heights[i]) {
          labels[j] = next;
          frontier.push(n);
        }
      }
    }
    ++next;
  }
  return labels;
}

// Interior cut lines of one axis, drawn without replacement from {1..n-1} and
// redrawn until every block spans at least min_cells.
std::vector<int> block_cuts(Rng& rng, int n, int blocks, int min_cells) {
  std::vector<int> lines(static_cast<std::size_t>(n - 1));
  std::iota(lines.begin(), lines.end(), 1);
  const int cuts = blocks - 1;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (int i = 0; i < cuts; ++i) {
      const auto j = i + static_cast<int>(rng.index(lines.size() - i));
      std::swap(lines[i], lines[j]);
    }
    std::vector<int> edges(lines.begin(), lines.begin() + cuts);
    edges.push_back(0);
    edges.push_back(n);
    std::sort(edges.begin(), edges.end());
    bool ok = true;
    for (std::size_t i = 1; i < edges.size(); ++i) ok = ok && edges[i] - edges[i - 1] >= min_cells;
    if (ok) return edges;
  }
  throw std::invalid_argument("could not partition the area into blocks of the minimum size");
}

}  // namespace

void GridSpec::validate() const {
  if (!(spacing_m > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  require_whole_cells(length_m, spacing_m, "length");
  require_whole_cells(width_m, spacing_m, "width");
  require_whole_cells(height_m, spacing_m, "height");
  if (!(pred_altitude_m > 0.0 && pred_altitude_m <= height_m)) {
    throw std::invalid_argument("prediction altitude must lie in (0, height]");
  }
  if (!(uav_altitude_m > 0.0 && uav_altitude_m <= height_m)) {
    throw std::invalid_argument("UAV altitude must lie in (0, height]");
  }
}

int GridSpec::nx() const { return cells_along(length_m, spacing_m); }
int GridSpec::ny() const { return cells_along(width_m, spacing_m); }

void GenerationParams::validate() const {
  if (!(spacing_m > 0.0 && area_side_m >= spacing_m)) throw std::invalid_argument("area must span at least one cell");
  if (blocks_per_dim < 1) throw std::invalid_argument("blocks_per_dim must be positive");
  if (blocks_per_dim * min_block_m > area_side_m) throw std::invalid_argument("blocks do not fit in the area");
  if (min_building_m <= 0.0 || max_building_m < min_building_m) throw std::invalid_argument("bad building size range");
  if (min_building_m > min_block_m - street_width_m) {
    throw std::invalid_argument("minimum building size exceeds block size");
  }
  if (max_buildings_per_block < 1) throw std::invalid_argument("max_buildings_per_block must be positive");
  if (min_building_height_m < 0.0 || max_building_height_m < min_building_height_m ||
      max_building_height_m > height_m) {
    throw std::invalid_argument("bad building height range");
  }
  if (!(open_space_prob >= 0.0 && open_space_prob <= 1.0)) throw std::invalid_argument("open_space_prob must be in [0,1]");
}

UrbanWorld::UrbanWorld(GridSpec grid, std::vector<double> heights, std::vector<Cell> nofly,
                       std::optional<WorldOrigin> origin)
    : grid_(grid), heights_(std::move(heights)), nofly_(std::move(nofly)), origin_(std::move(origin)) {
  grid_.validate();
  if (static_cast<int>(heights_.size()) != grid_.cell_count()) {
    throw std::invalid_argument("heights size does not match the grid");
  }
  for (double h : heights_) {
    if (!(h >= 0.0 && h <= grid_.height_m)) throw std::invalid_argument("building height outside [0, height_m]");
  }
  std::sort(nofly_.begin(), nofly_.end());
  nofly_.erase(std::unique(nofly_.begin(), nofly_.end()), nofly_.end());
  nofly_mask_.assign(heights_.size(), 0);
  for (Cell c : nofly_) {
    if (!grid_.contains(c)) throw std::invalid_argument("no-fly cell outside the grid");
    nofly_mask_[grid_.index(c)] = 1;
  }
  labels_ = label_buildings(grid_, heights_);
}

UrbanWorld UrbanWorld::open(GridSpec grid) {
  grid.validate();
  return UrbanWorld(grid, std::vector<double>(static_cast<std::size_t>(grid.cell_count()), 0.0));
}

std::vector<std::uint8_t> UrbanWorld::outdoor_mask() const {
  std::vector<std::uint8_t> z(heights_.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = heights_[i] < grid_.pred_altitude_m ? 1 : 0;
  return z;
}

std::vector<Cell> UrbanWorld::outdoor_prediction_cells() const {
  std::vector<Cell> out;
  for (int i = 0; i < grid_.cell_count(); ++i) {
    if (heights_[i] < grid_.pred_altitude_m) out.push_back(grid_.cell(i));
  }
  return out;
}

std::vector<Cell> UrbanWorld::flyable_cells() const {
  std::vector<Cell> out;
  for (int i = 0; i < grid_.cell_count(); ++i) {
    if (flyable(grid_.cell(i))) out.push_back(grid_.cell(i));
  }
  return out;
}

std::uint64_t joint_action_index(const JointAction& action) {
  std::uint64_t index = 0;
  for (Move m : action) {
    if (m == Move::Hold) throw std::invalid_argument("hold has no joint action index");
    index = index * kMoveCount + static_cast<std::uint64_t>(m);
  }
  return index;
}

JointAction joint_action_from_index(std::uint64_t index, int uav_count) {
  JointAction action(static_cast<std::size_t>(uav_count));
  for (int n = uav_count - 1; n >= 0; --n) {
    action[n] = static_cast<Move>(index % kMoveCount);
    index /= kMoveCount;
  }
  return action;
}

SwarmState transition(const SwarmState& state, const JointAction& action) {
  if (action.size() != state.positions.size()) throw std::invalid_argument("one move per UAV required");
  SwarmState next{state.positions, state.step + 1};
  for (std::size_t n = 0; n < action.size(); ++n) next.positions[n] = apply(state.positions[n], action[n]);
  return next;
}

bool is_legal(const UrbanWorld& world, const SwarmState& state, const JointAction& action) {
  if (action.size() != state.positions.size()) return false;
  for (std::size_t n = 0; n < action.size(); ++n) {
    if (!world.flyable(apply(state.positions[n], action[n]))) return false;
  }
  return true;
}

std::vector<Move> legal_moves(const UrbanWorld& world, Cell from) {
  std::vector<Move> moves;
  for (int m = 0; m < kMoveCount; ++m) {
    if (world.flyable(apply(from, static_cast<Move>(m)))) moves.push_back(static_cast<Move>(m));
  }
  return moves;
}

std::vector<Building> layout_buildings(std::uint64_t seed, const GenerationParams& params) {
  params.validate();
  Rng rng(derive_seed(seed, "layout"));
  const int n = static_cast<int>(std::floor(params.area_side_m / params.spacing_m + 1e-9));
  const int min_cells = static_cast<int>(std::ceil(params.min_block_m / params.spacing_m - 1e-9));
  const std::vector<int> xs = block_cuts(rng, n, params.blocks_per_dim, min_cells);
  const std::vector<int> ys = block_cuts(rng, n, params.blocks_per_dim, min_cells);
  const double d = params.spacing_m;
  const double half_street = 0.5 * params.street_width_m;

  std::vector<Building> buildings;
  for (int bx = 0; bx < params.blocks_per_dim; ++bx) {
    for (int by = 0; by < params.blocks_per_dim; ++by) {
      if (rng.bernoulli(params.open_space_prob)) continue;
      const double ix0 = xs[bx] * d + half_street;
      const double ix1 = xs[bx + 1] * d - half_street;
      const double iy0 = ys[by] * d + half_street;
      const double iy1 = ys[by + 1] * d - half_street;
      const int count = rng.integer(1, params.max_buildings_per_block);
      for (int k = 0; k < count; ++k) {
        const double w = rng.uniform(params.min_building_m, std::min(params.max_building_m, ix1 - ix0));
        const double l = rng.uniform(params.min_building_m, std::min(params.max_building_m, iy1 - iy0));
        const double x0 = rng.uniform(ix0, ix1 - w);
        const double y0 = rng.uniform(iy0, iy1 - l);
        const double h = rng.uniform(params.min_building_height_m, params.max_building_height_m);
        buildings.push_back({x0, y0, x0 + w, y0 + l, h});
      }
    }
  }
  return buildings;
}

UrbanWorld rasterize(std::span<const Building> buildings, const GenerationParams& params, std::uint64_t seed) {
  const int n = static_cast<int>(std::floor(params.area_side_m / params.spacing_m + 1e-9));
  GridSpec grid{n * params.spacing_m, n * params.spacing_m, params.height_m,
                params.spacing_m, params.pred_altitude_m, params.uav_altitude_m};
  std::vector<double> heights(static_cast<std::size_t>(n) * n, 0.0);
  for (const Building& b : buildings) {
    for (int x = 0; x < n; ++x) {
      const double cx = (x + 0.5) * params.spacing_m;
      if (cx < b.x0 || cx >= b.x1) continue;
      for (int y = 0; y < n; ++y) {
        const double cy = (y + 0.5) * params.spacing_m;
        if (cy < b.y0 || cy >= b.y1) continue;
        double& h = heights[grid.index({x, y})];
        h = std::max(h, b.height_m);
      }
    }
  }
  return UrbanWorld(grid, std::move(heights), {}, WorldOrigin{seed, params, std::nullopt});
}

UrbanWorld generate_world(std::uint64_t seed, const GenerationParams& params) {
  const std::vector<Building> buildings = layout_buildings(seed, params);
  return rasterize(buildings, params, seed);
}

CropWindow choose_crop(const GridSpec& grid, std::uint64_t seed, double side_m) {
  const int side = static_cast<int>(std::lround(side_m / grid.spacing_m));
  if (side < 1 || side > grid.nx() || side > grid.ny()) {
    throw std::invalid_argument("crop side larger than the world");
  }
  Rng rng(derive_seed(seed, "crop"));
  return {rng.integer(0, grid.nx() - side), rng.integer(0, grid.ny() - side), side};
}

std::vector<double> crop_plane(std::span<const double> plane, const GridSpec& grid, const CropWindow& window) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(window.side_cells) * window.side_cells);
  for (int x = 0; x < window.side_cells; ++x) {
    for (int y = 0; y < window.side_cells; ++y) {
      out.push_back(plane[grid.index({window.x0 + x, window.y0 + y})]);
    }
  }
  return out;
}

UrbanWorld crop_world(const UrbanWorld& world, const CropWindow& window) {
  const GridSpec& src = world.grid();
  if (window.x0 < 0 || window.y0 < 0 || window.x0 + window.side_cells > src.nx() ||
      window.y0 + window.side_cells > src.ny()) {
    throw std::invalid_argument("crop window outside the world");
  }
  GridSpec grid = src;
  grid.length_m = window.side_cells * src.spacing_m;
  grid.width_m = grid.length_m;
  std::vector<Cell> nofly;
  for (Cell c : world.nofly()) {
    const Cell shifted{c.x - window.x0, c.y - window.y0};
    if (grid.contains(shifted)) nofly.push_back(shifted);
  }
  std::optional<WorldOrigin> origin = world.origin();
  if (origin) {
    // Crops compose by offset.
    CropWindow total = window;
    if (origin->crop) {
      total.x0 += origin->crop->x0;
      total.y0 += origin->crop->y0;
    }
    origin->crop = total;
  }
  return UrbanWorld(grid, crop_plane(world.heights(), src, window), std::move(nofly), std::move(origin));
}

UrbanWorld crop_world(const UrbanWorld& world, std::uint64_t seed, double side_m) {
  return crop_world(world, choose_crop(world.grid(), seed, side_m));
}

}  // namespace gainscout
