#include "gainscout/io.hpp"

#include <array>
#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include "gainscout/rng.hpp"

namespace gainscout {
namespace {

constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint8_t(bytes[i]) << 16) | (std::uint8_t(bytes[i + 1]) << 8) | std::uint8_t(bytes[i + 2]);
    for (int s = 18; s >= 0; s -= 6) out.push_back(kAlphabet[(v >> s) & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = std::uint8_t(bytes[i]) << 16;
    if (rest == 2) v |= std::uint8_t(bytes[i + 1]) << 8;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(rest == 2 ? kAlphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::string unbase64(std::string_view text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (std::size_t k = 0; k < kAlphabet.size(); ++k) lookup[static_cast<unsigned char>(kAlphabet[k])] = static_cast<int>(k);
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length is not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      int d = 0;
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
      } else {
        d = lookup[static_cast<unsigned char>(c)];
        if (d < 0 || pad > 0) throw std::invalid_argument("invalid base64 text");
      }
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    if (pad < 2) out.push_back(static_cast<char>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<char>(v & 0xff));
  }
  return out;
}

Json cell_json(Cell c) { return Json::array({c.x, c.y}); }
Cell cell_from(const Json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }
Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }
Vec3 vec_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

// Config readers fall back to defaults for absent keys; artifact readers use at().
template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_schema(const Json& j, std::string_view kind) {
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::invalid_argument(std::string(kind) + ": unsupported schema_version");
  }
  if (j.contains("kind") && j.at("kind").get<std::string>() != kind) {
    throw std::invalid_argument("expected a " + std::string(kind) + " file, found " + j.at("kind").get<std::string>());
  }
}

const char* decision_name(StepDecision d) {
  switch (d) {
    case StepDecision::Planned: return "planned";
    case StepDecision::Initial: return "initial";
    case StepDecision::Repeat: return "repeat";
    case StepDecision::Random: return "random";
    case StepDecision::ForcedRedraw: return "forced_redraw";
    case StepDecision::Fallback: return "fallback";
    case StepDecision::Held: return "held";
  }
  return "?";
}

StepDecision decision_from(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(StepDecision::Held); ++k) {
    if (s == decision_name(static_cast<StepDecision>(k))) return static_cast<StepDecision>(k);
  }
  throw std::invalid_argument("unknown step decision: " + s);
}

}  // namespace

std::string encode_doubles(std::span<const double> values) {
  std::string bytes(values.size() * 8, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  return base64(bytes);
}

std::vector<double> decode_doubles(std::string_view text) {
  const std::string bytes = unbase64(text);
  if (bytes.size() % 8 != 0) throw std::invalid_argument("float64 payload has a partial value");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<std::uint8_t>(bytes[i * 8 + b]);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

Json to_json(const GridSpec& g) {
  return {{"length_m", g.length_m},       {"width_m", g.width_m},
          {"height_m", g.height_m},       {"spacing_m", g.spacing_m},
          {"pred_altitude_m", g.pred_altitude_m}, {"uav_altitude_m", g.uav_altitude_m}};
}

GridSpec grid_from_json(const Json& j) {
  GridSpec g;
  read_opt(j, "length_m", g.length_m);
  read_opt(j, "width_m", g.width_m);
  read_opt(j, "height_m", g.height_m);
  read_opt(j, "spacing_m", g.spacing_m);
  read_opt(j, "pred_altitude_m", g.pred_altitude_m);
  read_opt(j, "uav_altitude_m", g.uav_altitude_m);
  g.validate();
  return g;
}

Json to_json(const GenerationParams& p) {
  return {{"area_side_m", p.area_side_m},
          {"spacing_m", p.spacing_m},
          {"height_m", p.height_m},
          {"pred_altitude_m", p.pred_altitude_m},
          {"uav_altitude_m", p.uav_altitude_m},
          {"blocks_per_dim", p.blocks_per_dim},
          {"street_width_m", p.street_width_m},
          {"min_block_m", p.min_block_m},
          {"min_building_m", p.min_building_m},
          {"max_building_m", p.max_building_m},
          {"max_buildings_per_block", p.max_buildings_per_block},
          {"min_building_height_m", p.min_building_height_m},
          {"max_building_height_m", p.max_building_height_m},
          {"open_space_prob", p.open_space_prob}};
}

GenerationParams generation_from_json(const Json& j) {
  GenerationParams p;
  read_opt(j, "area_side_m", p.area_side_m);
  read_opt(j, "spacing_m", p.spacing_m);
  read_opt(j, "height_m", p.height_m);
  read_opt(j, "pred_altitude_m", p.pred_altitude_m);
  read_opt(j, "uav_altitude_m", p.uav_altitude_m);
  read_opt(j, "blocks_per_dim", p.blocks_per_dim);
  read_opt(j, "street_width_m", p.street_width_m);
  read_opt(j, "min_block_m", p.min_block_m);
  read_opt(j, "min_building_m", p.min_building_m);
  read_opt(j, "max_building_m", p.max_building_m);
  read_opt(j, "max_buildings_per_block", p.max_buildings_per_block);
  read_opt(j, "min_building_height_m", p.min_building_height_m);
  read_opt(j, "max_building_height_m", p.max_building_height_m);
  read_opt(j, "open_space_prob", p.open_space_prob);
  p.validate();
  return p;
}

Json to_json(const TruthParams& t) {
  return {{"alpha0", t.alpha0}, {"beta0", t.beta0},          {"phi0", t.phi0},
          {"delta0", t.delta0}, {"penalty_db", t.penalty_db}, {"carrier_hz", t.carrier_hz}};
}

TruthParams truth_from_json(const Json& j) {
  TruthParams t;
  read_opt(j, "alpha0", t.alpha0);
  read_opt(j, "beta0", t.beta0);
  read_opt(j, "phi0", t.phi0);
  read_opt(j, "delta0", t.delta0);
  read_opt(j, "penalty_db", t.penalty_db);
  read_opt(j, "carrier_hz", t.carrier_hz);
  return t;
}

Json to_json(const KrigingModel& m) {
  return {{"schema_version", kSchemaVersion},
          {"kind", "model"},
          {"alpha", m.alpha},
          {"beta", m.beta},
          {"phi", m.phi},
          {"delta", m.delta},
          {"jitter", m.jitter},
          {"distance_floor_m", m.distance_floor_m},
          {"log_base", "e"},
          {"fit",
           {{"source", m.fit.source},
            {"sample_count", m.fit.sample_count},
            {"path_loss_mse", m.fit.path_loss_mse},
            {"kernel_nll", m.fit.kernel_nll}}}};
}

KrigingModel model_from_json(const Json& j) {
  check_schema(j, "model");
  KrigingModel m;
  m.alpha = j.at("alpha").get<double>();
  m.beta = j.at("beta").get<double>();
  m.phi = j.at("phi").get<double>();
  m.delta = j.at("delta").get<double>();
  m.jitter = j.contains("jitter") ? j.at("jitter").get<double>() : 1e-6 * m.phi;
  read_opt(j, "distance_floor_m", m.distance_floor_m);
  if (j.contains("fit")) {
    const Json& f = j.at("fit");
    read_opt(f, "source", m.fit.source);
    read_opt(f, "sample_count", m.fit.sample_count);
    read_opt(f, "path_loss_mse", m.fit.path_loss_mse);
    read_opt(f, "kernel_nll", m.fit.kernel_nll);
  }
  m.validate();
  return m;
}

Json to_json(const MissionConfig& c) {
  return {{"planner", to_string(c.planner)},
          {"uav_count", c.uav_count},
          {"steps", c.steps},
          {"warmup_steps", c.warmup_steps},
          {"replan_period", c.replan_period},
          {"repeat_prob", c.repeat_prob},
          {"start", {{"kind", to_string(c.start.kind)}, {"rectangle_side_m", c.start.rectangle_side_m}}},
          {"entropy_window", c.entropy_window},
          {"entropy_execute", c.entropy_execute},
          {"entropy_lookahead", c.entropy_lookahead},
          {"start_seed", c.start_seed},
          {"planner_seed", c.planner_seed},
          {"checkpoints", c.checkpoints},
          {"noise", {{"std_db", c.noise.std_db}, {"seed", c.noise.seed}}},
          {"state_budget", c.state_budget}};
}

MissionConfig mission_config_from_json(const Json& j) {
  MissionConfig c;
  if (j.contains("planner")) c.planner = planner_from_string(j.at("planner").get<std::string>());
  read_opt(j, "uav_count", c.uav_count);
  read_opt(j, "steps", c.steps);
  read_opt(j, "warmup_steps", c.warmup_steps);
  read_opt(j, "replan_period", c.replan_period);
  read_opt(j, "repeat_prob", c.repeat_prob);
  if (j.contains("start")) {
    const Json& s = j.at("start");
    if (s.contains("kind")) c.start.kind = start_policy_from_string(s.at("kind").get<std::string>());
    read_opt(s, "rectangle_side_m", c.start.rectangle_side_m);
  }
  read_opt(j, "entropy_window", c.entropy_window);
  read_opt(j, "entropy_execute", c.entropy_execute);
  read_opt(j, "entropy_lookahead", c.entropy_lookahead);
  read_opt(j, "start_seed", c.start_seed);
  read_opt(j, "planner_seed", c.planner_seed);
  read_opt(j, "checkpoints", c.checkpoints);
  if (j.contains("noise")) {
    read_opt(j.at("noise"), "std_db", c.noise.std_db);
    read_opt(j.at("noise"), "seed", c.noise.seed);
  }
  read_opt(j, "state_budget", c.state_budget);
  return c;
}

Json to_json(const MeasurementLog& log) {
  Json cells = Json::array();
  for (Cell c : log.cells()) cells.push_back(cell_json(c));
  return {{"cells", cells}, {"first_steps", log.first_steps()}, {"values", encode_doubles(log.values())}};
}

MeasurementLog log_from_json(const Json& j) {
  const Json& cells = j.at("cells");
  const auto steps = j.at("first_steps").get<std::vector<int>>();
  const auto values = decode_doubles(j.at("values").get<std::string>());
  if (cells.size() != steps.size() || steps.size() != values.size()) {
    throw std::invalid_argument("measurement log arrays differ in length");
  }
  MeasurementLog log;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!log.append(cell_from(cells[i]), steps[i], values[i])) throw std::invalid_argument("measurement log repeats a cell");
  }
  return log;
}

Json to_json(const MissionPlan& plan) {
  Json actions = Json::array();
  for (const JointAction& a : plan.actions) {
    Json row = Json::array();
    for (Move m : a) row.push_back(static_cast<int>(m));
    actions.push_back(row);
  }
  Json positions = Json::array();
  for (const SwarmState& s : plan.positions) {
    Json row = Json::array();
    for (Cell c : s.positions) row.push_back(cell_json(c));
    positions.push_back({{"step", s.step}, {"cells", row}});
  }
  Json decisions = Json::array();
  for (const auto& step : plan.decisions) {
    Json row = Json::array();
    for (StepDecision d : step) row.push_back(decision_name(d));
    decisions.push_back(row);
  }
  return {{"planner", plan.planner},
          {"actions", actions},
          {"positions", positions},
          {"step_rewards", encode_doubles(plan.step_rewards)},
          {"objective_value", encode_doubles(std::span<const double>(&plan.objective_value, 1))},
          {"decisions", decisions},
          {"notes", plan.notes}};
}

MissionPlan plan_from_json(const Json& j) {
  MissionPlan plan;
  plan.planner = j.at("planner").get<std::string>();
  for (const Json& row : j.at("actions")) {
    JointAction a;
    for (const Json& m : row) {
      const int v = m.get<int>();
      if (v < 0 || v > static_cast<int>(Move::Hold)) throw std::invalid_argument("invalid move code");
      a.push_back(static_cast<Move>(v));
    }
    plan.actions.push_back(std::move(a));
  }
  for (const Json& s : j.at("positions")) {
    SwarmState state;
    state.step = s.at("step").get<int>();
    for (const Json& c : s.at("cells")) state.positions.push_back(cell_from(c));
    plan.positions.push_back(std::move(state));
  }
  plan.step_rewards = decode_doubles(j.at("step_rewards").get<std::string>());
  const auto objective = decode_doubles(j.at("objective_value").get<std::string>());
  if (objective.size() != 1) throw std::invalid_argument("objective_value must hold one value");
  plan.objective_value = objective[0];
  for (const Json& row : j.at("decisions")) {
    std::vector<StepDecision> step;
    for (const Json& d : row) step.push_back(decision_from(d.get<std::string>()));
    plan.decisions.push_back(std::move(step));
  }
  plan.notes = j.at("notes").get<std::vector<std::string>>();
  return plan;
}

std::uint64_t world_hash(const UrbanWorld& world) {
  std::uint64_t h = fnv1a64(to_json(world.grid()).dump());
  h = fnv1a64(encode_doubles(world.heights()), h);
  for (Cell c : world.nofly()) h = fnv1a64(std::to_string(c.x) + "," + std::to_string(c.y) + ";", h);
  return h;
}

Json world_to_json(const UrbanWorld& world) {
  Json j = {{"schema_version", kSchemaVersion},
            {"kind", "world"},
            {"grid", to_json(world.grid())},
            {"heights", encode_doubles(world.heights())},
            {"world_hash", hex64(world_hash(world))}};
  Json nofly = Json::array();
  for (Cell c : world.nofly()) nofly.push_back(cell_json(c));
  j["nofly"] = nofly;
  if (const auto& o = world.origin()) {
    Json origin = {{"seed", o->seed}, {"params", to_json(o->params)}};
    if (o->crop) origin["crop"] = {{"x0", o->crop->x0}, {"y0", o->crop->y0}, {"side_cells", o->crop->side_cells}};
    j["origin"] = origin;
  }
  return j;
}

UrbanWorld world_from_json(const Json& j) {
  check_schema(j, "world");
  GridSpec grid = grid_from_json(j.at("grid"));
  std::vector<double> heights = decode_doubles(j.at("heights").get<std::string>());
  if (heights.size() != static_cast<std::size_t>(grid.cell_count())) throw std::invalid_argument("world heights do not match the grid");
  std::vector<Cell> nofly;
  for (const Json& c : j.at("nofly")) nofly.push_back(cell_from(c));
  std::optional<WorldOrigin> origin;
  if (j.contains("origin")) {
    const Json& o = j.at("origin");
    WorldOrigin w;
    w.seed = o.at("seed").get<std::uint64_t>();
    w.params = generation_from_json(o.at("params"));
    if (o.contains("crop")) {
      const Json& c = o.at("crop");
      w.crop = CropWindow{c.at("x0").get<int>(), c.at("y0").get<int>(), c.at("side_cells").get<int>()};
    }
    origin = w;
  }
  UrbanWorld world(grid, std::move(heights), std::move(nofly), origin);
  if (j.contains("world_hash") && j.at("world_hash").get<std::string>() != hex64(world_hash(world))) {
    throw std::invalid_argument("world_hash does not match the stored heights");
  }
  return world;
}

Json field_to_json(const GainField& field, const UrbanWorld& world) {
  if (field.pred_plane.size() != static_cast<std::size_t>(world.grid().cell_count())) {
    throw std::invalid_argument("field does not match the world grid");
  }
  return {{"schema_version", kSchemaVersion},
          {"kind", "field"},
          {"tx", vec_json(field.tx)},
          {"params", to_json(field.params)},
          {"seed", field.seed},
          {"spectral_features", field.spectral_features},
          {"world_hash", hex64(world_hash(world))},
          {"encoding", "base64-float64-le"},
          {"pred_plane", encode_doubles(field.pred_plane)},
          {"uav_plane", encode_doubles(field.uav_plane)}};
}

GainField field_from_json(const Json& j, const UrbanWorld& world) {
  check_schema(j, "field");
  if (j.at("world_hash").get<std::string>() != hex64(world_hash(world))) {
    throw std::invalid_argument("field was synthesized for a different world");
  }
  GainField f;
  f.tx = vec_from(j.at("tx"));
  f.params = truth_from_json(j.at("params"));
  f.seed = j.at("seed").get<std::uint64_t>();
  f.spectral_features = j.at("spectral_features").get<int>();
  f.pred_plane = decode_doubles(j.at("pred_plane").get<std::string>());
  f.uav_plane = decode_doubles(j.at("uav_plane").get<std::string>());
  const auto n = static_cast<std::size_t>(world.grid().cell_count());
  if (f.pred_plane.size() != n || f.uav_plane.size() != n) throw std::invalid_argument("field planes do not match the grid");
  return f;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  static std::atomic<std::uint64_t> counter{0};
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("cannot write " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot write " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 15];
  return s;
}

}  // namespace gainscout
