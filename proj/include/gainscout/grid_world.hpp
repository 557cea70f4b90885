#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gainscout/common.hpp"

namespace gainscout {

/// Geometry of the discretized area of interest.
///
/// The horizontal lattice has nx() x ny() cells of side spacing_m; cell (x, y) is
/// centered at ((x + 0.5) d, (y + 0.5) d). Prediction and flight planes sit at
/// fixed altitudes and need not coincide with multiples of the spacing.
struct GridSpec {
  double length_m = 384.0;
  double width_m = 384.0;
  double height_m = 60.0;
  double spacing_m = 4.0;
  double pred_altitude_m = 10.0;
  double uav_altitude_m = 10.0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  int nx() const;
  int ny() const;
  int cell_count() const { return nx() * ny(); }

  bool contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < nx() && c.y < ny(); }
  int index(Cell c) const { return c.x * ny() + c.y; }
  Cell cell(int index) const { return {index / ny(), index % ny()}; }

  Vec3 at_altitude(Cell c, double altitude_m) const {
    return {(c.x + 0.5) * spacing_m, (c.y + 0.5) * spacing_m, altitude_m};
  }
  Vec3 pred_point(Cell c) const { return at_altitude(c, pred_altitude_m); }
  Vec3 uav_point(Cell c) const { return at_altitude(c, uav_altitude_m); }

  /// True when prediction and flight planes are the same set of 3D points.
  bool planes_coincide() const { return pred_altitude_m == uav_altitude_m; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Knobs of the Manhattan-style environment generator. Lengths are meters.
struct GenerationParams {
  double area_side_m = 486.0;
  double spacing_m = 4.0;
  double height_m = 60.0;
  double pred_altitude_m = 10.0;
  double uav_altitude_m = 10.0;
  int blocks_per_dim = 5;
  double street_width_m = 12.0;
  double min_block_m = 48.0;
  double min_building_m = 12.0;
  double max_building_m = 60.0;
  int max_buildings_per_block = 4;
  double min_building_height_m = 5.0;
  double max_building_height_m = 50.0;
  double open_space_prob = 0.2;

  void validate() const;

  friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

/// Axis-aligned building footprint in meters with a flat roof.
struct Building {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  double height_m = 0.0;
};

/// Offset of a square crop in cells of the source grid.
struct CropWindow {
  int x0 = 0;
  int y0 = 0;
  int side_cells = 0;

  friend bool operator==(const CropWindow&, const CropWindow&) = default;
};

/// Provenance of a generated world. Not needed to use the world, only to re-create it.
struct WorldOrigin {
  std::uint64_t seed = 0;
  GenerationParams params;
  std::optional<CropWindow> crop;

  friend bool operator==(const WorldOrigin&, const WorldOrigin&) = default;
};

/// Discretized 3D map: a height per horizontal cell plus an optional no-fly mask.
class UrbanWorld {
 public:
  UrbanWorld(GridSpec grid, std::vector<double> heights, std::vector<Cell> nofly = {},
             std::optional<WorldOrigin> origin = std::nullopt);

  /// A world with no buildings.
  static UrbanWorld open(GridSpec grid);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> heights() const { return heights_; }
  double height(Cell c) const { return heights_[grid_.index(c)]; }
  const std::vector<Cell>& nofly() const { return nofly_; }
  bool in_nofly(Cell c) const { return nofly_mask_[grid_.index(c)] != 0; }
  const std::optional<WorldOrigin>& origin() const { return origin_; }

  /// z_j: 1 when the prediction-plane cell is outdoor (building height below h_P).
  bool outdoor_at_prediction(Cell c) const { return height(c) < grid_.pred_altitude_m; }
  std::vector<std::uint8_t> outdoor_mask() const;
  std::vector<Cell> outdoor_prediction_cells() const;

  /// A UAV may occupy c: inside the AoI, below-altitude roof, not no-fly.
  bool flyable(Cell c) const {
    return grid_.contains(c) && height(c) < grid_.uav_altitude_m && !in_nofly(c);
  }
  std::vector<Cell> flyable_cells() const;

  /// Building identity per cell (-1 outdoors): 4-connected cells sharing one positive height.
  std::span<const int> building_labels() const { return labels_; }
  int building_label(Cell c) const { return labels_[grid_.index(c)]; }

 private:
  GridSpec grid_;
  std::vector<double> heights_;
  std::vector<Cell> nofly_;
  std::vector<std::uint8_t> nofly_mask_;
  std::vector<int> labels_;
  std::optional<WorldOrigin> origin_;
};

/// Displacement of one UAV by one grid spacing. Hold is emitted only by fallbacks
/// when a UAV has no legal move.
enum class Move : std::uint8_t { PlusX = 0, MinusX = 1, PlusY = 2, MinusY = 3, Hold = 4 };

inline constexpr int kMoveCount = 4;

inline Cell apply(Cell c, Move m) {
  switch (m) {
    case Move::PlusX: return {c.x + 1, c.y};
    case Move::MinusX: return {c.x - 1, c.y};
    case Move::PlusY: return {c.x, c.y + 1};
    case Move::MinusY: return {c.x, c.y - 1};
    case Move::Hold: return c;
  }
  return c;
}

/// One move per UAV.
using JointAction = std::vector<Move>;

/// Index of a joint action in [0, 4^N): UAV 0 is the most significant digit, so index
/// order equals lexicographic order of the move vector.
std::uint64_t joint_action_index(const JointAction& action);
JointAction joint_action_from_index(std::uint64_t index, int uav_count);

struct SwarmState {
  std::vector<Cell> positions;
  int step = 0;

  friend bool operator==(const SwarmState&, const SwarmState&) = default;
};

/// Displaces every UAV by its move and advances the step. Legality is not checked.
SwarmState transition(const SwarmState& state, const JointAction& action);

/// True iff every UAV's next cell is flyable.
bool is_legal(const UrbanWorld& world, const SwarmState& state, const JointAction& action);

/// Moves of a single UAV at `from` that land on a flyable cell, in index order.
std::vector<Move> legal_moves(const UrbanWorld& world, Cell from);

std::vector<Building> layout_buildings(std::uint64_t seed, const GenerationParams& params);
UrbanWorld rasterize(std::span<const Building> buildings, const GenerationParams& params, std::uint64_t seed);

/// Random Manhattan-grid city; a pure function of (seed, params).
UrbanWorld generate_world(std::uint64_t seed, const GenerationParams& params = {});

CropWindow choose_crop(const GridSpec& grid, std::uint64_t seed, double side_m);
UrbanWorld crop_world(const UrbanWorld& world, const CropWindow& window);
UrbanWorld crop_world(const UrbanWorld& world, std::uint64_t seed, double side_m);

/// Copies the cells of `window` out of a row-major nx-by-ny plane.
std::vector<double> crop_plane(std::span<const double> plane, const GridSpec& grid, const CropWindow& window);

}  // namespace gainscout
