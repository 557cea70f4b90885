#include "gainscout/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gainscout/rng.hpp"

namespace gainscout {
namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Streams are prefixed so the calibration corpus never shares worlds with evaluation.
std::vector<Scenario> scenarios_from_streams(const ExperimentSpec& spec, const std::string& prefix, int worlds,
                                             int per_world) {
  std::vector<std::vector<Scenario>> by_world(static_cast<std::size_t>(worlds));
  parallel_for(by_world.size(), 1, [&](std::size_t w) {
    const std::uint64_t seed = derive_seed(spec.master_seed, prefix + "world", w);
    auto full = std::make_shared<const UrbanWorld>(generate_world(seed, spec.environment));
    const std::vector<Vec3> lattice = transmitter_lattice(*full, spec.tx);
    std::vector<std::size_t> chosen(lattice.size());
    for (std::size_t k = 0; k < chosen.size(); ++k) chosen[k] = k;
    if (per_world > 0 && chosen.size() > static_cast<std::size_t>(per_world)) {
      Rng rng(derive_seed(spec.master_seed, prefix + "tx", w));
      for (std::size_t k = 0; k < static_cast<std::size_t>(per_world); ++k) {
        std::swap(chosen[k], chosen[k + rng.index(chosen.size() - k)]);
      }
      chosen.resize(static_cast<std::size_t>(per_world));
      std::sort(chosen.begin(), chosen.end());
    }
    std::shared_ptr<const UrbanWorld> world = full;
    std::optional<CropWindow> window;
    if (spec.crop_side_m > 0.0) {
      window = choose_crop(full->grid(), derive_seed(spec.master_seed, prefix + "crop", w), spec.crop_side_m);
      world = std::make_shared<const UrbanWorld>(crop_world(*full, *window));
    }
    for (std::size_t k : chosen) {
      Scenario s;
      s.world_index = static_cast<int>(w);
      s.world_seed = seed;
      s.tx_index = static_cast<int>(k);
      s.world = world;
      // Synthesized on the whole area so that blockage by buildings outside the crop counts.
      s.field = synthesize_field(*full, lattice[k], derive_seed(spec.master_seed, prefix + "field", w * 4096 + k), spec.truth);
      if (window) s.field = crop_field(s.field, full->grid(), *window);
      by_world[w].push_back(std::move(s));
    }
  });
  std::vector<Scenario> out;
  for (auto& v : by_world) {
    for (auto& s : v) out.push_back(std::move(s));
  }
  return out;
}

Json scenario_json(const Scenario& s) {
  return {{"world_index", s.world_index}, {"world_seed", s.world_seed},      {"tx_index", s.tx_index},
          {"tx", {s.field.tx.x, s.field.tx.y, s.field.tx.z}}, {"field_seed", s.field.seed},
          {"world_hash", hex64(world_hash(*s.world))}};
}

Json checkpoint_json(const CheckpointMetrics& c) {
  return {{"step", c.step},
          {"measured", c.measured},
          {"rmse", c.rmse},
          {"goodness_of_fit", c.goodness_of_fit},
          {"mean_variance", c.mean_variance}};
}

struct Group {
  std::vector<std::string> key;
  std::vector<double> values;
};

std::vector<SummaryRow> summarize(const CsvTable& t, bool per_step) {
  const std::size_t planner = t.column("planner"), uavs = t.column("uav_count"), start = t.column("start"),
                    steps = t.column("steps"), rmse = t.column("rmse");
  const std::size_t step = per_step ? t.column("step") : 0;
  const std::optional<std::size_t> status =
      std::find(t.header.begin(), t.header.end(), "status") != t.header.end() ? std::optional(t.column("status"))
                                                                               : std::nullopt;
  std::vector<Group> groups;
  std::map<std::vector<std::string>, std::size_t> index;
  for (const auto& row : t.rows) {
    if (status && row[*status] != "ok") continue;
    std::vector<std::string> key{row[planner], row[uavs], row[start], row[steps]};
    if (per_step) key.push_back(row[step]);
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) groups.push_back({key, {}});
    groups[it->second].values.push_back(std::stod(row[rmse]));
  }
  std::vector<SummaryRow> out;
  for (const Group& g : groups) {
    SummaryRow r;
    r.planner = g.key[0];
    r.uav_count = std::stoi(g.key[1]);
    r.start = g.key[2];
    r.steps = std::stoi(g.key[3]);
    r.step = per_step ? std::stoi(g.key[4]) : r.steps;
    r.runs = g.values.size();
    double sum = 0.0;
    for (double v : g.values) sum += v;
    r.mean = sum / static_cast<double>(r.runs);
    if (r.runs > 1) {
      double ss = 0.0;
      for (double v : g.values) ss += (v - r.mean) * (v - r.mean);
      r.stderr_ = std::sqrt(ss / static_cast<double>(r.runs - 1)) / std::sqrt(static_cast<double>(r.runs));
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace

void MissionGrid::validate() const {
  if (planners.empty() || uav_counts.empty() || step_counts.empty() || starts.empty()) {
    throw std::invalid_argument("mission grid has an empty axis");
  }
  if (seeds < 1) throw std::invalid_argument("mission seed range is empty");
  for (int s : step_counts) {
    if (s < 0) throw std::invalid_argument("negative mission length");
  }
  for (int n : uav_counts) {
    if (n < 1) throw std::invalid_argument("at least one UAV required");
  }
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) throw std::invalid_argument("checkpoints must be sorted");
}

void ExperimentSpec::validate() const {
  environment.validate();
  if (world_count < 1) throw std::invalid_argument("world seed range is empty");
  if (crop_side_m < 0.0 || crop_side_m > environment.area_side_m) throw std::invalid_argument("crop side out of range");
  if (!(tx.spacing_m > 0.0)) throw std::invalid_argument("transmitter spacing must be positive");
  if (tx.per_world < 0) throw std::invalid_argument("transmitters per world must be non-negative");
  if (model.fixed) {
    model.model.validate();
  } else if (model.fit_worlds < 1 || model.fit_tx_per_world < 0 || model.fit_samples < 2) {
    throw std::invalid_argument("invalid model calibration corpus");
  }
  missions.validate();
}

Json to_json(const ExperimentSpec& spec) {
  Json planners = Json::array(), starts = Json::array();
  for (PlannerKind p : spec.missions.planners) planners.push_back(to_string(p));
  for (StartPolicy::Kind k : spec.missions.starts) starts.push_back(to_string(k));
  Json model = {{"fixed", spec.model.fixed},
                {"fit_worlds", spec.model.fit_worlds},
                {"fit_tx_per_world", spec.model.fit_tx_per_world},
                {"fit_samples", spec.model.fit_samples}};
  if (spec.model.fixed) model["model"] = to_json(spec.model.model);
  return {{"schema_version", kSchemaVersion},
          {"kind", "experiment"},
          {"master_seed", spec.master_seed},
          {"environment", to_json(spec.environment)},
          {"world_count", spec.world_count},
          {"crop_side_m", spec.crop_side_m},
          {"tx", {{"spacing_m", spec.tx.spacing_m}, {"altitude_m", spec.tx.altitude_m}, {"per_world", spec.tx.per_world}}},
          {"truth", to_json(spec.truth)},
          {"model", model},
          {"missions",
           {{"planners", planners},
            {"uav_counts", spec.missions.uav_counts},
            {"step_counts", spec.missions.step_counts},
            {"starts", starts},
            {"seeds", spec.missions.seeds},
            {"checkpoints", spec.missions.checkpoints},
            {"base", to_json(spec.missions.base)}}}};
}

ExperimentSpec experiment_from_json(const Json& j) {
  if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::invalid_argument("experiment: unsupported schema_version");
  }
  ExperimentSpec s;
  read_opt(j, "master_seed", s.master_seed);
  if (j.contains("environment")) s.environment = generation_from_json(j.at("environment"));
  read_opt(j, "world_count", s.world_count);
  read_opt(j, "crop_side_m", s.crop_side_m);
  if (j.contains("tx")) {
    read_opt(j.at("tx"), "spacing_m", s.tx.spacing_m);
    read_opt(j.at("tx"), "altitude_m", s.tx.altitude_m);
    read_opt(j.at("tx"), "per_world", s.tx.per_world);
  }
  if (j.contains("truth")) s.truth = truth_from_json(j.at("truth"));
  if (j.contains("model")) {
    const Json& m = j.at("model");
    read_opt(m, "fixed", s.model.fixed);
    read_opt(m, "fit_worlds", s.model.fit_worlds);
    read_opt(m, "fit_tx_per_world", s.model.fit_tx_per_world);
    read_opt(m, "fit_samples", s.model.fit_samples);
    if (m.contains("model")) s.model.model = model_from_json(m.at("model"));
  }
  if (j.contains("missions")) {
    const Json& m = j.at("missions");
    if (m.contains("base")) s.missions.base = mission_config_from_json(m.at("base"));
    if (m.contains("planners")) {
      s.missions.planners.clear();
      for (const Json& p : m.at("planners")) s.missions.planners.push_back(planner_from_string(p.get<std::string>()));
    }
    read_opt(m, "uav_counts", s.missions.uav_counts);
    read_opt(m, "step_counts", s.missions.step_counts);
    if (m.contains("starts")) {
      s.missions.starts.clear();
      for (const Json& k : m.at("starts")) s.missions.starts.push_back(start_policy_from_string(k.get<std::string>()));
    }
    read_opt(m, "seeds", s.missions.seeds);
    read_opt(m, "checkpoints", s.missions.checkpoints);
  }
  s.validate();
  return s;
}

std::vector<Vec3> transmitter_lattice(const UrbanWorld& world, const TxPlacement& placement) {
  const GridSpec& g = world.grid();
  std::vector<Vec3> out;
  for (int i = 0; (i + 0.5) * placement.spacing_m < g.length_m; ++i) {
    for (int j = 0; (j + 0.5) * placement.spacing_m < g.width_m; ++j) {
      const Vec3 tx{(i + 0.5) * placement.spacing_m, (j + 0.5) * placement.spacing_m, placement.altitude_m};
      const Cell c{static_cast<int>(std::floor(tx.x / g.spacing_m)), static_cast<int>(std::floor(tx.y / g.spacing_m))};
      if (g.contains(c) && world.height(c) < tx.z) out.push_back(tx);
    }
  }
  return out;
}

std::vector<Scenario> build_scenarios(const ExperimentSpec& spec) {
  return scenarios_from_streams(spec, "", spec.world_count, spec.tx.per_world);
}

KrigingModel fit_scenarios(std::span<const Scenario> scenarios, int samples_per_scenario, std::uint64_t seed) {
  if (scenarios.empty()) throw std::invalid_argument("no scenarios to fit on");
  std::vector<FitGroup> groups;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const Scenario& s = scenarios[i];
    const GridSpec& g = s.world->grid();
    std::vector<Cell> cells = s.world->flyable_cells();
    const std::size_t take = std::min(cells.size(), static_cast<std::size_t>(samples_per_scenario));
    Rng rng(derive_seed(seed, "fit-sample", i));
    for (std::size_t k = 0; k < take; ++k) std::swap(cells[k], cells[k + rng.index(cells.size() - k)]);
    FitGroup group;
    group.tx = s.field.tx;
    for (std::size_t k = 0; k < take; ++k) {
      group.points.push_back(g.uav_point(cells[k]));
      group.gains.push_back(s.field.uav_plane[g.index(cells[k])]);
    }
    groups.push_back(std::move(group));
  }
  KrigingModel m = fit_model(groups, 0.5 * scenarios.front().world->grid().spacing_m);
  m.fit.source = "corpus";
  return m;
}

KrigingModel fit_corpus_model(const ExperimentSpec& spec) {
  const std::vector<Scenario> corpus =
      scenarios_from_streams(spec, "fit-", spec.model.fit_worlds, spec.model.fit_tx_per_world);
  return fit_scenarios(corpus, spec.model.fit_samples, derive_seed(spec.master_seed, "fit"));
}

std::vector<RunSpec> expand_runs(std::span<const Scenario> scenarios, const MissionGrid& grid, std::uint64_t master_seed) {
  grid.validate();
  std::vector<RunSpec> runs;
  for (std::size_t sc = 0; sc < scenarios.size(); ++sc) {
    for (PlannerKind planner : grid.planners) {
      for (int n : grid.uav_counts) {
        for (int steps : grid.step_counts) {
          for (StartPolicy::Kind start : grid.starts) {
            for (int seed = 0; seed < grid.seeds; ++seed) {
              RunSpec r;
              r.scenario = sc;
              r.mission_seed = seed;
              MissionConfig& m = r.mission;
              m = grid.base;
              m.planner = planner;
              m.uav_count = n;
              m.steps = steps;
              m.start.kind = start;
              // Warmup must leave at least one planned step.
              if (planner == PlannerKind::Greedy) m.warmup_steps = std::max(0, std::min(m.warmup_steps, steps - 1));
              m.checkpoints.clear();
              for (int c : grid.checkpoints) {
                if (c <= steps) m.checkpoints.push_back(c);
              }
              m.start_seed = derive_seed(derive_seed(master_seed, "start", static_cast<std::uint64_t>(seed)), "scenario", sc);
              m.planner_seed = derive_seed(derive_seed(master_seed, "planner", static_cast<std::uint64_t>(seed)), "scenario", sc);
              m.noise.seed = derive_seed(derive_seed(master_seed, "noise", static_cast<std::uint64_t>(seed)), "scenario", sc);
              runs.push_back(std::move(r));
            }
          }
        }
      }
    }
  }
  return runs;
}

std::uint64_t run_identity(const Json& context, const Scenario& scenario, const RunSpec& run) {
  const Json j = {{"code_version", kCodeVersion},
                  {"schema_version", kSchemaVersion},
                  {"context", context},
                  {"scenario", scenario_json(scenario)},
                  {"mission_seed", run.mission_seed},
                  {"mission", to_json(run.mission)}};
  return fnv1a64(j.dump());
}

RunRecord execute_run(const Scenario& scenario, const KrigingModel& model, const RunSpec& run, const Json& context) {
  RunRecord rec;
  rec.spec = run;
  rec.world_index = scenario.world_index;
  rec.world_seed = scenario.world_seed;
  rec.tx_index = scenario.tx_index;
  rec.run_id = run_identity(context, scenario, run);
  rec.artifact = "runs/" + hex64(rec.run_id) + ".json";
  Json bundle = {{"schema_version", kSchemaVersion},
                 {"kind", "run"},
                 {"run_id", hex64(rec.run_id)},
                 {"code_version", kCodeVersion},
                 {"scenario", scenario_json(scenario)},
                 {"mission_seed", run.mission_seed},
                 {"mission", to_json(run.mission)},
                 {"model", to_json(model)}};
  try {
    const UrbanWorld& world = *scenario.world;
    const MissionResult result = run_mission(world, scenario.field, model, run.mission);
    const std::vector<double> edges = default_bin_edges();
    const Evaluation e = evaluate(world, scenario.field, result.log, result.query_cells, result.final_posterior.mean,
                                  result.final_posterior.variance, edges);
    rec.measured = result.log.size();
    rec.evaluated = e.evaluated;
    rec.rmse = e.rmse;
    rec.goodness_of_fit = e.goodness_of_fit;
    for (const PosteriorSnapshot& snap : result.snapshots) {
      MeasurementLog prefix;
      for (std::size_t i = 0; i < snap.measured; ++i) {
        prefix.append(result.log.cells()[i], result.log.first_steps()[i], result.log.values()[i]);
      }
      const Evaluation ce = evaluate(world, scenario.field, prefix, result.query_cells, snap.mean, snap.variance, edges);
      rec.checkpoints.push_back({snap.step, snap.measured, ce.rmse, ce.goodness_of_fit, snap.variance.mean()});
    }
    if (result.abort_reason) {
      rec.status = "aborted";
      rec.message = *result.abort_reason;
    }
    Json bins = Json::array();
    for (const BinStat& b : e.bins) {
      bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"rmse", b.rmse ? Json(*b.rmse) : Json(nullptr)}});
    }
    Json checkpoints = Json::array();
    for (const CheckpointMetrics& c : rec.checkpoints) checkpoints.push_back(checkpoint_json(c));
    bundle["trajectory"] = to_json(result.trajectory);
    bundle["log"] = to_json(result.log);
    bundle["replan_variance_totals"] = encode_doubles(result.replan_variance_totals);
    bundle["final_mean"] = encode_doubles(std::span<const double>(result.final_posterior.mean.data(),
                                                                  static_cast<std::size_t>(result.final_posterior.mean.size())));
    bundle["final_variance"] = encode_doubles(std::span<const double>(
        result.final_posterior.variance.data(), static_cast<std::size_t>(result.final_posterior.variance.size())));
    bundle["metrics"] = {{"measured", rec.measured},
                         {"evaluated", rec.evaluated},
                         {"rmse", rec.rmse},
                         {"goodness_of_fit", rec.goodness_of_fit},
                         {"goodness_of_fit_log", "natural"},
                         {"bins", bins}};
    bundle["checkpoints"] = checkpoints;
  } catch (const std::exception& ex) {
    rec.status = "failed";
    rec.message = ex.what();
    rec.rmse = rec.goodness_of_fit = std::nan("");
  }
  bundle["status"] = rec.status;
  bundle["message"] = rec.message;
  rec.bundle = dump(bundle);
  return rec;
}

int resolve_jobs(int requested) {
  if (const char* env = std::getenv("GAINSCOUT_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw std::invalid_argument(std::string("GAINSCOUT_JOBS must be a positive integer, got '") + env + "'");
  }
  return std::max(1, requested);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

bool ExperimentResult::all_ok() const {
  return std::all_of(records.begin(), records.end(), [](const RunRecord& r) { return r.status == "ok"; });
}

std::vector<RunRecord> run_grid(std::span<const Scenario> scenarios, const KrigingModel& model, const MissionGrid& grid,
                                std::uint64_t master_seed, const Json& context, int jobs,
                                const std::optional<std::filesystem::path>& out) {
  const std::vector<RunSpec> runs = expand_runs(scenarios, grid, master_seed);
  std::vector<RunRecord> records(runs.size());
  parallel_for(runs.size(), jobs, [&](std::size_t i) {
    records[i] = execute_run(scenarios[runs[i].scenario], model, runs[i], context);
    if (out) write_file_atomic(*out / records[i].artifact, records[i].bundle);
  });
  if (out) {
    write_file_atomic(*out / "metrics.csv", metrics_csv(records));
    write_file_atomic(*out / "checkpoints.csv", checkpoints_csv(records));
  }
  return records;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int jobs, const std::optional<std::filesystem::path>& out) {
  spec.validate();
  ExperimentResult result;
  result.model = spec.model.fixed ? spec.model.model : fit_corpus_model(spec);
  const std::vector<Scenario> scenarios = build_scenarios(spec);
  Json context = to_json(spec);
  context.erase("missions");
  context["resolved_model"] = to_json(result.model);
  if (out) {
    write_file_atomic(*out / "spec.json", dump(to_json(spec)));
    write_file_atomic(*out / "model.json", dump(to_json(result.model)));
  }
  result.records = run_grid(scenarios, result.model, spec.missions, spec.master_seed, context, jobs, out);
  return result;
}

std::string metrics_csv(std::span<const RunRecord> records) {
  std::ostringstream s;
  s << "schema_version,run_id,world_index,world_seed,tx_index,planner,uav_count,steps,start,mission_seed,status,"
       "measured,evaluated,rmse,goodness_of_fit,artifact\n";
  for (const RunRecord& r : records) {
    const MissionConfig& m = r.spec.mission;
    s << kSchemaVersion << ',' << hex64(r.run_id) << ',' << r.world_index << ',' << r.world_seed << ',' << r.tx_index << ','
      << to_string(m.planner) << ',' << m.uav_count << ',' << m.steps << ',' << to_string(m.start.kind) << ','
      << r.spec.mission_seed << ',' << r.status << ',' << r.measured << ',' << r.evaluated << ',' << num(r.rmse) << ','
      << num(r.goodness_of_fit) << ',' << r.artifact << '\n';
  }
  return s.str();
}

std::string checkpoints_csv(std::span<const RunRecord> records) {
  std::ostringstream s;
  s << "schema_version,run_id,planner,uav_count,steps,start,mission_seed,step,measured,rmse,goodness_of_fit,mean_variance\n";
  for (const RunRecord& r : records) {
    const MissionConfig& m = r.spec.mission;
    for (const CheckpointMetrics& c : r.checkpoints) {
      s << kSchemaVersion << ',' << hex64(r.run_id) << ',' << to_string(m.planner) << ',' << m.uav_count << ','
        << m.steps << ',' << to_string(m.start.kind) << ',' << r.spec.mission_seed << ',' << c.step << ',' << c.measured
        << ',' << num(c.rmse) << ',' << num(c.goodness_of_fit) << ',' << num(c.mean_variance) << '\n';
    }
  }
  return s.str();
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::invalid_argument("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw std::invalid_argument("CSV has no header");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size()) throw std::invalid_argument("CSV row has " + std::to_string(row.size()) + " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable merge_tables(std::span<const CsvTable> tables) {
  if (tables.empty()) throw std::invalid_argument("no tables to merge");
  CsvTable out;
  out.header = tables.front().header;
  for (const CsvTable& t : tables) {
    if (t.header != out.header) throw std::invalid_argument("CSV schema mismatch: headers differ");
    out.rows.insert(out.rows.end(), t.rows.begin(), t.rows.end());
  }
  return out;
}

std::vector<SummaryRow> summarize_metrics(const CsvTable& metrics) { return summarize(metrics, false); }
std::vector<SummaryRow> summarize_checkpoints(const CsvTable& checkpoints) { return summarize(checkpoints, true); }

std::string summary_csv(std::span<const SummaryRow> rows) {
  std::ostringstream s;
  s << "planner,uav_count,start,steps,runs,mean_rmse,stderr_rmse\n";
  for (const SummaryRow& r : rows) {
    s << r.planner << ',' << r.uav_count << ',' << r.start << ',' << r.steps << ',' << r.runs << ',' << num(r.mean) << ','
      << num(r.stderr_) << '\n';
  }
  return s.str();
}

std::string curve_csv(std::span<const SummaryRow> rows) {
  std::ostringstream s;
  s << "planner,uav_count,start,steps,step,runs,mean_rmse,stderr_rmse\n";
  for (const SummaryRow& r : rows) {
    s << r.planner << ',' << r.uav_count << ',' << r.start << ',' << r.steps << ',' << r.step << ',' << r.runs << ','
      << num(r.mean) << ',' << num(r.stderr_) << '\n';
  }
  return s.str();
}

}  // namespace gainscout
