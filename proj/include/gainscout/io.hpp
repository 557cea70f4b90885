#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gainscout/channel.hpp"
#include "gainscout/grid_world.hpp"
#include "gainscout/kriging.hpp"
#include "gainscout/metrics.hpp"
#include "gainscout/mission.hpp"
#include "gainscout/planners.hpp"

namespace gainscout {

using Json = nlohmann::json;

/// Version stamped into every JSON artifact and CSV row.
inline constexpr int kSchemaVersion = 1;
/// Part of every run identity: bump when results are expected to change.
inline constexpr std::string_view kCodeVersion = "gainscout-1.0.0";

/// Little-endian float64 array as base64, independent of host byte order.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(std::string_view text);

Json to_json(const GridSpec& g);
Json to_json(const GenerationParams& p);
Json to_json(const TruthParams& t);
Json to_json(const KrigingModel& m);
Json to_json(const MissionConfig& c);
Json to_json(const MeasurementLog& log);
Json to_json(const MissionPlan& plan);

GridSpec grid_from_json(const Json& j);
GenerationParams generation_from_json(const Json& j);
TruthParams truth_from_json(const Json& j);
KrigingModel model_from_json(const Json& j);
MissionConfig mission_config_from_json(const Json& j);
MeasurementLog log_from_json(const Json& j);
MissionPlan plan_from_json(const Json& j);

/// FNV-1a over the grid and the height/no-fly bytes. Fields record it to refuse pairing
/// with a different world.
std::uint64_t world_hash(const UrbanWorld& world);

Json world_to_json(const UrbanWorld& world);
UrbanWorld world_from_json(const Json& j);
Json field_to_json(const GainField& field, const UrbanWorld& world);
/// Throws std::invalid_argument if the field was not built for `world`.
GainField field_from_json(const Json& j, const UrbanWorld& world);

/// Canonical text of an artifact: sorted keys, two-space indent, trailing newline.
std::string dump(const Json& j);

/// Writes to a temporary sibling and renames it over `path`, creating parents.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

std::string hex64(std::uint64_t v);

}  // namespace gainscout
