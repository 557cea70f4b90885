#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gainscout/io.hpp"

namespace gainscout {

/// Transmitters on a square lattice over the generated area; lattice points inside a
/// building at the transmitter altitude are dropped.
struct TxPlacement {
  double spacing_m = 97.2;
  double altitude_m = 2.0;
  /// Keep this many per world, chosen at random from the outdoor lattice points. 0 keeps all.
  int per_world = 0;
};

/// Where the Kriging model comes from: fitted once over a calibration corpus of worlds
/// disjoint from the evaluation worlds, or given.
struct ModelSource {
  bool fixed = false;
  KrigingModel model = KrigingModel::make(-40.0, 15.0, 25.0, 50.0, 2.0);
  int fit_worlds = 2;
  int fit_tx_per_world = 3;
  int fit_samples = 400;
};

/// The set of missions run on every scenario: planners x UAV counts x horizons x start
/// policies x seeds. Other mission knobs come from `base`.
struct MissionGrid {
  std::vector<PlannerKind> planners{PlannerKind::Entropy, PlannerKind::Greedy, PlannerKind::RandomWaypoint};
  std::vector<int> uav_counts{3};
  std::vector<int> step_counts{200};
  std::vector<StartPolicy::Kind> starts{StartPolicy::Kind::Rectangle};
  int seeds = 1;
  std::vector<int> checkpoints;
  MissionConfig base{};

  void validate() const;
};

struct ExperimentSpec {
  std::uint64_t master_seed = 0;
  GenerationParams environment{};
  int world_count = 1;
  /// Side of the random square crop evaluated in each world; 0 keeps the whole area.
  double crop_side_m = 384.0;
  TxPlacement tx{};
  TruthParams truth{};
  ModelSource model{};
  MissionGrid missions{};

  void validate() const;
};

Json to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_from_json(const Json& j);

/// Outdoor lattice points of `world`, row-major over the lattice.
std::vector<Vec3> transmitter_lattice(const UrbanWorld& world, const TxPlacement& placement);

/// A world and the ground truth for one transmitter in it.
struct Scenario {
  int world_index = 0;
  std::uint64_t world_seed = 0;
  int tx_index = 0;
  std::shared_ptr<const UrbanWorld> world;
  GainField field;
};

/// Evaluation scenarios of an experiment. Every random choice flows from the master seed
/// through named streams: "world", "crop", "tx", "field".
std::vector<Scenario> build_scenarios(const ExperimentSpec& spec);

/// Fits the model over calibration worlds drawn from the "fit-*" streams.
KrigingModel fit_corpus_model(const ExperimentSpec& spec);

/// Random distinct flight-plane cells of each scenario, measured without noise.
KrigingModel fit_scenarios(std::span<const Scenario> scenarios, int samples_per_scenario, std::uint64_t seed);

struct RunSpec {
  std::size_t scenario = 0;
  int mission_seed = 0;
  MissionConfig mission;
};

/// Runs in deterministic order. Start, planner and noise seeds depend on the scenario and
/// mission seed but not on the planner, so planners are compared on identical starts.
std::vector<RunSpec> expand_runs(std::span<const Scenario> scenarios, const MissionGrid& grid, std::uint64_t master_seed);

struct CheckpointMetrics {
  int step = 0;
  std::size_t measured = 0;
  double rmse = 0.0;
  double goodness_of_fit = 0.0;
  double mean_variance = 0.0;
};

struct RunRecord {
  RunSpec spec;
  int world_index = 0;
  std::uint64_t world_seed = 0;
  int tx_index = 0;
  std::uint64_t run_id = 0;
  /// "ok", "aborted" (planner gave up, partial results kept) or "failed".
  std::string status = "ok";
  std::string message;
  std::size_t measured = 0;
  std::size_t evaluated = 0;
  double rmse = 0.0;
  double goodness_of_fit = 0.0;
  std::vector<CheckpointMetrics> checkpoints;
  /// Canonical JSON of the mission artifact.
  std::string bundle;
  std::string artifact;
};

/// Hash of everything a run depends on: code version, context (truth, environment,
/// model), scenario identity and mission configuration.
std::uint64_t run_identity(const Json& context, const Scenario& scenario, const RunSpec& run);

/// Runs and scores one mission. Never throws for mission-level failures; they are
/// recorded in the status.
RunRecord execute_run(const Scenario& scenario, const KrigingModel& model, const RunSpec& run, const Json& context);

/// Worker count: GAINSCOUT_JOBS when set, otherwise `requested`, at least 1.
int resolve_jobs(int requested);

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. The first exception is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

struct ExperimentResult {
  KrigingModel model;
  std::vector<RunRecord> records;
  bool all_ok() const;
};

/// Full pipeline. With `out`, writes spec.json, model.json, runs/<id>.json, metrics.csv
/// and checkpoints.csv under it, each atomically.
ExperimentResult run_experiment(const ExperimentSpec& spec, int jobs,
                                const std::optional<std::filesystem::path>& out = std::nullopt);

/// Same for explicit scenarios and model; `context` enters the run identities.
std::vector<RunRecord> run_grid(std::span<const Scenario> scenarios, const KrigingModel& model, const MissionGrid& grid,
                                std::uint64_t master_seed, const Json& context, int jobs,
                                const std::optional<std::filesystem::path>& out = std::nullopt);

std::string metrics_csv(std::span<const RunRecord> records);
std::string checkpoints_csv(std::span<const RunRecord> records);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
/// Concatenates tables; throws std::invalid_argument when headers differ.
CsvTable merge_tables(std::span<const CsvTable> tables);

struct SummaryRow {
  std::string planner;
  int uav_count = 0;
  std::string start;
  int steps = 0;
  int step = 0;  ///< checkpoint step for curves, equal to `steps` for final summaries
  std::size_t runs = 0;
  double mean = 0.0;
  /// Sample standard deviation over sqrt(runs); 0 for a single run.
  double stderr_ = 0.0;
};

/// Mean and standard error of RMSE per (planner, N, start, T) over the "ok" rows of a
/// metrics table, in first-appearance order.
std::vector<SummaryRow> summarize_metrics(const CsvTable& metrics);
/// Same per checkpoint step, from a checkpoints table.
std::vector<SummaryRow> summarize_checkpoints(const CsvTable& checkpoints);

std::string summary_csv(std::span<const SummaryRow> rows);
/// step, mean, stderr triples per group.
std::string curve_csv(std::span<const SummaryRow> rows);

}  // namespace gainscout
