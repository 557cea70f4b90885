// gainscout: environment/field generation, model fitting, mission sweeps and reports.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gainscout/experiment.hpp"
#include "gainscout/io.hpp"
#include "gainscout/rng.hpp"

namespace fs = std::filesystem;
using namespace gainscout;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

UrbanWorld load_world(const fs::path& p) {
  if (!fs::exists(p)) throw std::runtime_error("world file not found: " + p.string());
  try {
    return world_from_json(read_json(p));
  } catch (const std::exception& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

GainField load_field(const fs::path& p, const UrbanWorld& world) {
  if (!fs::exists(p)) throw std::runtime_error("field file not found: " + p.string());
  try {
    return field_from_json(read_json(p), world);
  } catch (const std::exception& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

KrigingModel load_model(const fs::path& p) {
  if (!fs::exists(p)) throw std::runtime_error("model file not found: " + p.string());
  try {
    return model_from_json(read_json(p));
  } catch (const std::exception& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

// A field file belongs to the world given at the same position, or to the only world.
std::vector<Scenario> load_scenarios(const std::vector<std::string>& worlds, const std::vector<std::string>& fields) {
  if (worlds.empty() || fields.empty()) throw std::runtime_error("need at least one --world and one --field");
  if (worlds.size() != 1 && worlds.size() != fields.size()) {
    throw std::runtime_error("give one --world, or one per --field");
  }
  std::vector<std::shared_ptr<const UrbanWorld>> loaded;
  for (const auto& w : worlds) loaded.push_back(std::make_shared<const UrbanWorld>(load_world(w)));
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::size_t w = worlds.size() == 1 ? 0 : i;
    Scenario s;
    s.world_index = static_cast<int>(w);
    s.world_seed = loaded[w]->origin() ? loaded[w]->origin()->seed : 0;
    s.tx_index = static_cast<int>(i);
    s.world = loaded[w];
    s.field = load_field(fields[i], *loaded[w]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gainscout: active channel-gain prediction with UAV swarms"};
  app.require_subcommand(1);

  // gen-env
  auto* env = app.add_subcommand("gen-env", "Generate random city worlds");
  std::uint64_t env_seed = 0;
  int env_count = 1;
  std::string env_out, env_params;
  double env_crop = 0.0;
  env->add_option("--seed", env_seed, "Master seed; world i uses its 'world' sub-stream");
  env->add_option("--count", env_count, "Number of worlds")->check(CLI::NonNegativeNumber);
  env->add_option("--out", env_out, "Output directory")->required();
  env->add_option("--params", env_params, "JSON file of generation parameters");
  env->add_option("--crop-side", env_crop, "Crop each world to a random square of this side (m); 0 keeps it whole");

  // gen-field
  auto* fld = app.add_subcommand("gen-field", "Synthesize ground-truth gain fields for a world");
  std::string fld_world, fld_out, fld_truth, fld_tx;
  std::uint64_t fld_seed = 0;
  double fld_spacing = 97.2, fld_alt = 2.0;
  fld->add_option("--world", fld_world, "World JSON")->required();
  fld->add_option("--out", fld_out, "Output directory")->required();
  fld->add_option("--seed", fld_seed, "Master seed; transmitter k uses its 'field' sub-stream");
  fld->add_option("--truth", fld_truth, "JSON file of truth parameters");
  fld->add_option("--tx", fld_tx, "Single transmitter x,y,z in meters; default is the outdoor lattice");
  fld->add_option("--tx-spacing", fld_spacing, "Lattice spacing (m)");
  fld->add_option("--tx-altitude", fld_alt, "Lattice transmitter altitude (m)");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit path loss and kernel from sampled measurements");
  std::vector<std::string> fit_worlds, fit_fields;
  std::string fit_out;
  int fit_samples = 400;
  std::uint64_t fit_seed = 0;
  fit->add_option("--world", fit_worlds, "World JSON (one, or one per field)")->required();
  fit->add_option("--field", fit_fields, "Field JSON")->required();
  fit->add_option("--samples", fit_samples, "Measured flight-plane cells per field")->check(CLI::Range(2, 1000000));
  fit->add_option("--seed", fit_seed, "Sampling seed");
  fit->add_option("--out", fit_out, "Output directory (writes model.json)")->required();

  // run
  auto* run = app.add_subcommand("run", "Run a mission sweep and write metrics");
  std::string run_spec, run_model, run_out, run_planners = "entropy,greedy,random", run_starts = "rectangle";
  std::vector<std::string> run_worlds, run_fields;
  std::vector<int> run_uavs{3}, run_steps{200}, run_checkpoints;
  int run_seeds = 1, run_jobs = 1;
  std::uint64_t run_master = 0;
  run->add_option("--spec", run_spec, "Experiment JSON; generates worlds and fields inline");
  run->add_option("--world", run_worlds, "World JSON (with --field and --model)");
  run->add_option("--field", run_fields, "Field JSON");
  run->add_option("--model", run_model, "Model JSON");
  run->add_option("--planners", run_planners, "Comma-separated: entropy,greedy,random");
  run->add_option("--uavs", run_uavs, "UAV counts")->delimiter(',');
  run->add_option("--steps", run_steps, "Mission lengths")->delimiter(',');
  run->add_option("--starts", run_starts, "Comma-separated: rectangle,whole");
  run->add_option("--seeds", run_seeds, "Mission seeds per configuration")->check(CLI::PositiveNumber);
  run->add_option("--checkpoints", run_checkpoints, "Steps at which RMSE is recorded")->delimiter(',');
  run->add_option("--master-seed", run_master, "Seed for starts, planners and noise");
  run->add_option("--jobs", run_jobs, "Worker threads (GAINSCOUT_JOBS overrides)")->check(CLI::PositiveNumber);
  run->add_option("--out", run_out, "Output directory")->required();

  // report
  auto* rep = app.add_subcommand("report", "Aggregate metrics CSVs");
  std::vector<std::string> rep_in, rep_ckpt;
  std::string rep_out;
  rep->add_option("--in", rep_in, "metrics.csv files")->required();
  rep->add_option("--checkpoints", rep_ckpt, "checkpoints.csv files for RMSE-vs-step curves");
  rep->add_option("--out", rep_out, "Output directory (writes summary.csv, curve.csv)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*env) {
      GenerationParams params;
      if (!env_params.empty()) params = generation_from_json(read_json(env_params));
      fs::create_directories(env_out);
      for (int i = 0; i < env_count; ++i) {
        const std::uint64_t seed = derive_seed(env_seed, "world", static_cast<std::uint64_t>(i));
        UrbanWorld w = generate_world(seed, params);
        if (env_crop > 0.0) w = crop_world(w, derive_seed(env_seed, "crop", static_cast<std::uint64_t>(i)), env_crop);
        const fs::path p = fs::path(env_out) / ("world_" + std::to_string(i) + ".json");
        write_file_atomic(p, dump(world_to_json(w)));
        std::cout << p.string() << " seed=" << seed << "\n";
      }
      return 0;
    }

    if (*fld) {
      const UrbanWorld world = load_world(fld_world);
      TruthParams truth;
      if (!fld_truth.empty()) truth = truth_from_json(read_json(fld_truth));
      std::vector<Vec3> txs;
      if (!fld_tx.empty()) {
        const auto parts = split_list(fld_tx);
        if (parts.size() != 3) throw std::runtime_error("--tx needs x,y,z");
        txs.push_back({std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])});
      } else {
        txs = transmitter_lattice(world, {fld_spacing, fld_alt, 0});
      }
      const std::string stem = fs::path(fld_world).stem().string();
      for (std::size_t k = 0; k < txs.size(); ++k) {
        const GainField f = synthesize_field(world, txs[k], derive_seed(fld_seed, "field", k), truth);
        const fs::path p = fs::path(fld_out) / (stem + "_field_" + std::to_string(k) + ".json");
        write_file_atomic(p, dump(field_to_json(f, world)));
        std::cout << p.string() << "\n";
      }
      return 0;
    }

    if (*fit) {
      const std::vector<Scenario> scenarios = load_scenarios(fit_worlds, fit_fields);
      const KrigingModel m = fit_scenarios(scenarios, fit_samples, fit_seed);
      write_file_atomic(fs::path(fit_out) / "model.json", dump(to_json(m)));
      std::cout << "alpha=" << m.alpha << " beta=" << m.beta << " phi=" << m.phi << " delta=" << m.delta << "\n";
      return 0;
    }

    if (*run) {
      const int jobs = resolve_jobs(run_jobs);
      std::vector<RunRecord> records;
      if (!run_spec.empty()) {
        if (!fs::exists(run_spec)) throw std::runtime_error("experiment file not found: " + run_spec);
        const ExperimentSpec spec = experiment_from_json(read_json(run_spec));
        records = run_experiment(spec, jobs, fs::path(run_out)).records;
      } else {
        if (run_model.empty()) throw std::runtime_error("run needs --spec, or --world, --field and --model");
        const std::vector<Scenario> scenarios = load_scenarios(run_worlds, run_fields);
        const KrigingModel model = load_model(run_model);
        MissionGrid grid;
        grid.planners.clear();
        for (const auto& p : split_list(run_planners)) grid.planners.push_back(planner_from_string(p));
        grid.starts.clear();
        for (const auto& s : split_list(run_starts)) grid.starts.push_back(start_policy_from_string(s));
        grid.uav_counts = run_uavs;
        grid.step_counts = run_steps;
        grid.seeds = run_seeds;
        grid.checkpoints = run_checkpoints;
        const Json context = {{"model", to_json(model)}, {"master_seed", run_master}};
        records = run_grid(scenarios, model, grid, run_master, context, jobs, fs::path(run_out));
      }
      int failed = 0;
      for (const RunRecord& r : records) {
        if (r.status != "ok") {
          ++failed;
          std::cerr << "run " << hex64(r.run_id) << " " << r.status << ": " << r.message << "\n";
        }
      }
      std::cout << records.size() << " runs, " << failed << " not ok; metrics in "
                << (fs::path(run_out) / "metrics.csv").string() << "\n";
      return failed == 0 ? 0 : 2;
    }

    if (*rep) {
      std::vector<CsvTable> tables;
      for (const auto& p : rep_in) tables.push_back(parse_csv(read_file(p)));
      const auto summary = summarize_metrics(merge_tables(tables));
      write_file_atomic(fs::path(rep_out) / "summary.csv", summary_csv(summary));
      std::cout << summary_csv(summary);
      if (!rep_ckpt.empty()) {
        std::vector<CsvTable> ck;
        for (const auto& p : rep_ckpt) ck.push_back(parse_csv(read_file(p)));
        const auto curve = summarize_checkpoints(merge_tables(ck));
        write_file_atomic(fs::path(rep_out) / "curve.csv", curve_csv(curve));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "gainscout: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
