// Acceptance checks, one PASS/FAIL line per criterion. Run with criterion numbers to
// select a subset, e.g. `acceptance 1 2 8`.
#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gainscout/experiment.hpp"
#include "gainscout/io.hpp"
#include "gainscout/rng.hpp"
#include "oracles.hpp"

using namespace gainscout;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

struct PairedTest {
  double mean_diff = 0.0;
  double t = 0.0;
  double p = 1.0;  // two-sided
};

PairedTest paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  PairedTest out;
  out.mean_diff = mean(d);
  double ss = 0.0;
  for (double x : d) ss += (x - out.mean_diff) * (x - out.mean_diff);
  const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  if (se == 0.0) {
    out.t = out.mean_diff == 0.0 ? 0.0 : std::copysign(INFINITY, out.mean_diff);
    out.p = out.mean_diff == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.t = out.mean_diff / se;
  const boost::math::students_t dist(static_cast<double>(n - 1));
  out.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
  return out;
}

// ---------------------------------------------------------------------------------------
// 1. Posterior mean and covariance against brute-force joint conditioning.

Verdict kriging_oracle() {
  constexpr int kInstances = 200;
  constexpr double kTol = 1e-8;
  constexpr double kSeconds = 5.0;
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst_mean = 0.0, worst_cov = 0.0;
  for (int inst = 0; inst < kInstances; ++inst) {
    GridSpec g;
    g.spacing_m = rng.uniform(2.0, 10.0);
    g.length_m = g.spacing_m * rng.integer(2, 4);
    g.width_m = g.spacing_m * 2;
    g.pred_altitude_m = 10.0;
    g.uav_altitude_m = rng.bernoulli(0.5) ? 10.0 : rng.uniform(11.0, 40.0);
    const KrigingModel m = KrigingModel::make(rng.uniform(-60, -20), rng.uniform(10, 30), rng.uniform(1, 50),
                                              rng.uniform(2, 100), 0.5 * g.spacing_m);
    const Vec3 tx{rng.uniform(-50, 80), rng.uniform(-50, 80), rng.uniform(1, 30)};
    // Up to 8 cells in total between observations and queries.
    std::vector<int> cells(static_cast<std::size_t>(g.cell_count()));
    std::iota(cells.begin(), cells.end(), 0);
    for (std::size_t k = 0; k < cells.size(); ++k) std::swap(cells[k], cells[k + rng.index(cells.size() - k)]);
    const int total = std::min<int>(8, static_cast<int>(cells.size()));
    const int n_obs = rng.integer(1, total - 1);
    std::vector<Vec3> data, queries;
    std::vector<double> values;
    for (int k = 0; k < total; ++k) {
      const Cell c = g.cell(cells[static_cast<std::size_t>(k)]);
      if (k < n_obs) {
        data.push_back(g.uav_point(c));
        values.push_back(m.mean(data.back(), tx) + rng.normal() * std::sqrt(m.phi));
      } else {
        queries.push_back(g.pred_point(c));
      }
    }
    const Posterior p = posterior_at(m, tx, data, values, queries, true);
    const oracle::Conditioned ref = oracle::condition(m, tx, data, values, queries);
    worst_mean = std::max(worst_mean, (p.mean - ref.mean).cwiseAbs().maxCoeff() / ref.mean.cwiseAbs().maxCoeff());
    worst_cov = std::max(worst_cov, (*p.covariance - ref.cov).cwiseAbs().maxCoeff() / m.phi);
    worst_cov = std::max(worst_cov, (p.variance - ref.cov.diagonal()).cwiseAbs().maxCoeff() / m.phi);
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = worst_mean < kTol && worst_cov < kTol && secs < kSeconds;
  v.summary = fmt("%d instances, max rel err mean %.2e, cov %.2e (tol %.0e); %.2f s (limit %.0f s)", kInstances,
                  worst_mean, worst_cov, kTol, secs, kSeconds);
  return v;
}

// ---------------------------------------------------------------------------------------
// 2. Forward value iteration against exhaustive enumeration.

Verdict vi_optimality() {
  constexpr int kInstances = 50;
  constexpr double kSeconds = 60.0;
  const auto t0 = Clock::now();
  Rng rng(202);
  int value_match = 0, action_match = 0;
  long long largest = 0, total_paths = 0;
  for (int inst = 0; inst < kInstances; ++inst) {
    GridSpec g;
    const int side = rng.integer(3, 6);
    g.length_m = g.width_m = 4.0 * side;
    const UrbanWorld w = UrbanWorld::open(g);
    const KrigingModel m = KrigingModel::make(0.0, 0.0, rng.uniform(1, 50), rng.uniform(2, 40));
    const int n = rng.integer(1, 2);
    const int horizon = rng.integer(1, 4);
    SwarmState start;
    while (static_cast<int>(start.positions.size()) < n) {
      const Cell c{rng.integer(0, side - 1), rng.integer(0, side - 1)};
      if (std::find(start.positions.begin(), start.positions.end(), c) == start.positions.end()) start.positions.push_back(c);
    }
    const MissionPlan plan = plan_entropy_vi({w, m, start, horizon});
    const oracle::BestPath best = oracle::enumerate(w, start, horizon, [&](const auto& a, const auto& b) {
      return step_reward_entropy(m, g, a, b);
    });
    std::vector<std::uint64_t> actions;
    for (const JointAction& a : plan.actions) actions.push_back(joint_action_index(a));
    largest = std::max(largest, best.paths);
    total_paths += best.paths;
    value_match += plan.objective_value == best.value;
    action_match += actions == best.actions;
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = value_match == kInstances && action_match == kInstances && secs < kSeconds;
  v.summary = fmt("%d/%d objectives bit-identical, %d/%d action sequences identical; %.1f s (limit %.0f s)", value_match,
                  kInstances, action_match, kInstances, secs, kSeconds);
  v.details.push_back(fmt("%lld legal paths enumerated in total, %lld in the largest instance", total_paths, largest));
  return v;
}

// ---------------------------------------------------------------------------------------
// 3. Hyperparameter recovery from 400 measurements of sampled fields.

Verdict hyperparameter_recovery() {
  constexpr int kSeeds = 20;
  constexpr int kMeasurements = 400;
  constexpr double kPhi0 = 25.0, kDelta0 = 50.0;
  constexpr double kKernelTol = 0.20, kPathLossTol = 0.01;
  constexpr double kSeconds = 120.0;
  const auto t0 = Clock::now();
  GridSpec g;  // the 384 m AoI at 4 m spacing
  std::vector<double> phis, deltas;
  double worst_alpha = 0.0, worst_beta = 0.0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng(derive_seed(303, "recovery", static_cast<std::uint64_t>(seed)));
    std::vector<int> cells(static_cast<std::size_t>(g.cell_count()));
    std::iota(cells.begin(), cells.end(), 0);
    for (int k = 0; k < kMeasurements; ++k) std::swap(cells[k], cells[k + rng.index(cells.size() - k)]);
    ResidualSet set;
    for (int k = 0; k < kMeasurements; ++k) set.points.push_back(g.uav_point(g.cell(cells[k])));
    // Exact joint sample at the measured points.
    Eigen::MatrixXd k(kMeasurements, kMeasurements);
    for (int i = 0; i < kMeasurements; ++i) {
      for (int j = 0; j < kMeasurements; ++j) k(i, j) = kernel(set.points[i], set.points[j], kPhi0, kDelta0);
    }
    const Eigen::MatrixXd l = k.llt().matrixL();
    Eigen::VectorXd z(kMeasurements);
    for (int i = 0; i < kMeasurements; ++i) z(i) = rng.normal();
    const Eigen::VectorXd s = l * z;
    set.residuals.assign(s.data(), s.data() + kMeasurements);
    const KernelFit fit = fit_kernel(std::span(&set, 1));
    phis.push_back(fit.phi);
    deltas.push_back(fit.delta);

    // Noiseless path loss around a random transmitter.
    const double alpha0 = rng.uniform(-60, -20), beta0 = rng.uniform(10, 40);
    const Vec3 tx{rng.uniform(0, 384), rng.uniform(0, 384), 2.0};
    std::vector<DistanceGain> samples;
    for (const Vec3& q : set.points) {
      const double r = std::max(distance(q, tx), 2.0);
      samples.push_back({r, path_loss(q, tx, alpha0, beta0, 2.0)});
    }
    const PathLossFit pl = fit_path_loss(samples);
    worst_alpha = std::max(worst_alpha, std::abs(pl.alpha - alpha0) / std::abs(alpha0));
    worst_beta = std::max(worst_beta, std::abs(pl.beta - beta0) / std::abs(beta0));
  }
  const double phi_err = std::abs(median(phis) / kPhi0 - 1.0);
  const double delta_err = std::abs(median(deltas) / kDelta0 - 1.0);
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = phi_err < kKernelTol && delta_err < kKernelTol && worst_alpha < kPathLossTol && worst_beta < kPathLossTol &&
           secs < kSeconds;
  v.summary = fmt("median phi %.2f (err %.1f%%), median delta %.2f (err %.1f%%), tol 20%%; path loss max err alpha %.1e beta %.1e "
                  "(tol 1%%); %.1f s (limit %.0f s)",
                  median(phis), 100 * phi_err, median(deltas), 100 * delta_err, worst_alpha, worst_beta, secs, kSeconds);
  return v;
}

// ---------------------------------------------------------------------------------------
// 4. Goodness of fit on truth drawn from the model itself.

Verdict calibration() {
  constexpr int kMissions = 50;
  constexpr double kTol = 0.3;
  constexpr double kSeconds = 300.0;
  const auto t0 = Clock::now();
  TruthParams truth;
  truth.penalty_db = 0.0;  // the predictor's own model: log-distance plus exponential shadowing
  const KrigingModel model = KrigingModel::make(truth.alpha0, truth.beta0, truth.phi0, truth.delta0, 2.0);
  const PlannerKind planners[] = {PlannerKind::Entropy, PlannerKind::Greedy, PlannerKind::RandomWaypoint};
  std::vector<double> gofs;
  std::map<std::string, std::vector<double>> by_planner;
  for (int k = 0; k < kMissions; ++k) {
    const std::uint64_t seed = derive_seed(404, "calibration", static_cast<std::uint64_t>(k));
    const UrbanWorld world = crop_world(generate_world(derive_seed(seed, "world")), derive_seed(seed, "crop"), 96.0);
    std::vector<Cell> street;
    for (Cell c : world.flyable_cells()) {
      if (world.height(c) < 2.0) street.push_back(c);
    }
    Rng rng(derive_seed(seed, "tx"));
    const Vec3 tx = world.grid().at_altitude(street[rng.index(street.size())], 2.0);
    const GainField field = synthesize_field(world, tx, derive_seed(seed, "field"), truth);
    MissionConfig c;
    c.planner = planners[k % 3];
    c.steps = 50;
    c.start_seed = derive_seed(seed, "start");
    c.planner_seed = derive_seed(seed, "planner");
    const MissionResult r = run_mission(world, field, model, c);
    const Evaluation e = evaluate(world, field, r.log, r.query_cells, r.final_posterior.mean, r.final_posterior.variance,
                                  default_bin_edges());
    gofs.push_back(e.goodness_of_fit);
    by_planner[to_string(c.planner)].push_back(e.goodness_of_fit);
  }
  const double avg = mean(gofs);
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = std::abs(avg) < kTol && secs < kSeconds;
  v.summary = fmt("mean goodness of fit %+.3f over %d missions (tol |.| < %.1f); %.1f s (limit %.0f s)", avg, kMissions, kTol,
                  secs, kSeconds);
  for (const auto& [name, g] : by_planner) v.details.push_back(fmt("%s: mean %+.3f over %zu", name.c_str(), mean(g), g.size()));
  return v;
}

// ---------------------------------------------------------------------------------------
// 5-7. Planner comparison on synthetic cities.

struct Sweep {
  KrigingModel model;
  double setup_seconds = 0.0;
  double rect_seconds = 0.0;
  double whole_seconds = 0.0;
  std::vector<RunRecord> rect;
  std::vector<RunRecord> whole;
};

// The sweep takes minutes, so it can be shared between processes through a cache file:
// `--sweep-cache F` reads F when it exists, `--refresh-sweep` recomputes and rewrites it.
std::optional<std::filesystem::path> sweep_cache;
bool refresh_sweep = false;

Json records_to_json(const std::vector<RunRecord>& records) {
  Json out = Json::array();
  for (const RunRecord& r : records) {
    Json ck = Json::array();
    for (const auto& c : r.checkpoints) ck.push_back({c.step, c.rmse, c.mean_variance});
    out.push_back({{"scenario", r.spec.scenario}, {"planner", to_string(r.spec.mission.planner)}, {"status", r.status},
                   {"rmse", r.rmse}, {"checkpoints", ck}});
  }
  return out;
}

std::vector<RunRecord> records_from_json(const Json& j) {
  std::vector<RunRecord> out;
  for (const Json& e : j) {
    RunRecord r;
    r.spec.scenario = e.at("scenario").get<std::size_t>();
    r.spec.mission.planner = planner_from_string(e.at("planner").get<std::string>());
    r.status = e.at("status").get<std::string>();
    r.rmse = e.at("rmse").get<double>();
    for (const Json& c : e.at("checkpoints")) {
      CheckpointMetrics m;
      m.step = c.at(0).get<int>();
      m.rmse = c.at(1).get<double>();
      m.mean_variance = c.at(2).get<double>();
      r.checkpoints.push_back(m);
    }
    out.push_back(std::move(r));
  }
  return out;
}

Sweep compute_sweep() {
  Sweep s;
  ExperimentSpec spec;
  spec.master_seed = 2026;
  spec.world_count = 30;
  spec.crop_side_m = 384.0;
  spec.tx.per_world = 1;
  spec.missions.uav_counts = {3};
  spec.missions.step_counts = {200};
  spec.missions.checkpoints = {0, 50, 100, 150, 200};
  auto t0 = Clock::now();
  s.model = fit_corpus_model(spec);
  const std::vector<Scenario> scenarios = build_scenarios(spec);
  Json context = to_json(spec);
  context.erase("missions");
  context["resolved_model"] = to_json(s.model);
  s.setup_seconds = seconds_since(t0);
  const int jobs = resolve_jobs(1);

  spec.missions.starts = {StartPolicy::Kind::Rectangle};
  t0 = Clock::now();
  s.rect = run_grid(scenarios, s.model, spec.missions, spec.master_seed, context, jobs);
  s.rect_seconds = seconds_since(t0);

  spec.missions.starts = {StartPolicy::Kind::WholeArea};
  t0 = Clock::now();
  s.whole = run_grid(scenarios, s.model, spec.missions, spec.master_seed, context, jobs);
  s.whole_seconds = seconds_since(t0);
  return s;
}

const Sweep& sweep() {
  static std::optional<Sweep> cached;
  if (cached) return *cached;
  if (sweep_cache && !refresh_sweep && std::filesystem::exists(*sweep_cache)) {
    const Json j = read_json(*sweep_cache);
    Sweep s;
    s.model = model_from_json(j.at("model"));
    s.setup_seconds = j.at("setup_seconds").get<double>();
    s.rect_seconds = j.at("rect_seconds").get<double>();
    s.whole_seconds = j.at("whole_seconds").get<double>();
    s.rect = records_from_json(j.at("rect"));
    s.whole = records_from_json(j.at("whole"));
    cached = std::move(s);
    return *cached;
  }
  cached = compute_sweep();
  if (sweep_cache) {
    const Json j = {{"model", to_json(cached->model)},
                    {"setup_seconds", cached->setup_seconds},
                    {"rect_seconds", cached->rect_seconds},
                    {"whole_seconds", cached->whole_seconds},
                    {"rect", records_to_json(cached->rect)},
                    {"whole", records_to_json(cached->whole)}};
    write_file_atomic(*sweep_cache, dump(j));
  }
  return *cached;
}

// RMSE per scenario, in scenario order, for one planner.
std::vector<double> rmse_of(const std::vector<RunRecord>& records, PlannerKind planner) {
  std::vector<std::pair<std::size_t, double>> rows;
  for (const RunRecord& r : records) {
    if (r.spec.mission.planner == planner) rows.emplace_back(r.spec.scenario, r.rmse);
  }
  std::sort(rows.begin(), rows.end());
  std::vector<double> out;
  for (const auto& [sc, v] : rows) out.push_back(v);
  return out;
}

int not_ok(const std::vector<RunRecord>& records) {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const RunRecord& r) { return r.status != "ok"; }));
}

Verdict planner_ordering() {
  constexpr double kAlpha = 0.05;
  constexpr double kSeconds = 1800.0;
  const Sweep& s = sweep();
  const auto e = rmse_of(s.rect, PlannerKind::Entropy);
  const auto g = rmse_of(s.rect, PlannerKind::Greedy);
  const auto r = rmse_of(s.rect, PlannerKind::RandomWaypoint);
  const PairedTest eg = paired_t(g, e);
  const PairedTest gr = paired_t(r, g);
  const double secs = s.setup_seconds + s.rect_seconds;
  const int bad = not_ok(s.rect);
  Verdict v;
  v.pass = bad == 0 && mean(e) < mean(g) && mean(g) < mean(r) && eg.p < kAlpha && gr.p < kAlpha && secs < kSeconds;
  v.summary = fmt("mean RMSE entropy %.3f < greedy %.3f < random %.3f dB; paired t p=%.2g (greedy-entropy), p=%.2g "
                  "(random-greedy), need < %.2f; %zu worlds; %.0f s (limit %.0f s)",
                  mean(e), mean(g), mean(r), eg.p, gr.p, kAlpha, e.size(), secs, kSeconds);
  v.details.push_back(fmt("fitted model alpha %.3f beta %.3f phi %.3f delta %.3f", s.model.alpha, s.model.beta, s.model.phi,
                          s.model.delta));
  v.details.push_back(fmt("greedy-entropy mean diff %.3f (t %.2f); random-greedy %.3f (t %.2f); runs not ok: %d",
                          eg.mean_diff, eg.t, gr.mean_diff, gr.t, bad));
  int entropy_wins = 0;
  for (std::size_t i = 0; i < e.size(); ++i) entropy_wins += e[i] < g[i];
  v.details.push_back(fmt("entropy beats greedy on %d/%zu worlds", entropy_wins, e.size()));
  return v;
}

Verdict start_dispersion() {
  constexpr double kSeconds = 1800.0;
  const Sweep& s = sweep();
  bool all_lower = true;
  Verdict v;
  for (PlannerKind p : {PlannerKind::Entropy, PlannerKind::Greedy, PlannerKind::RandomWaypoint}) {
    const double rect = mean(rmse_of(s.rect, p)), whole = mean(rmse_of(s.whole, p));
    all_lower = all_lower && whole < rect;
    const PairedTest t = paired_t(rmse_of(s.rect, p), rmse_of(s.whole, p));
    v.details.push_back(fmt("%s: rectangle %.3f, whole area %.3f dB (paired p=%.2g)", to_string(p).c_str(), rect, whole, t.p));
  }
  const double gap_rect = mean(rmse_of(s.rect, PlannerKind::Greedy)) - mean(rmse_of(s.rect, PlannerKind::Entropy));
  const double gap_whole = mean(rmse_of(s.whole, PlannerKind::Greedy)) - mean(rmse_of(s.whole, PlannerKind::Entropy));
  const double secs = s.setup_seconds + s.whole_seconds;
  const int bad = not_ok(s.whole);
  v.pass = bad == 0 && all_lower && gap_whole < gap_rect && secs < kSeconds;
  v.summary = fmt("whole-area starts lower for every planner: %s; greedy-entropy gap %.3f -> %.3f dB; %.0f s (limit %.0f s)",
                  all_lower ? "yes" : "no", gap_rect, gap_whole, secs, kSeconds);
  if (bad) v.details.push_back(fmt("runs not ok: %d", bad));
  return v;
}

Verdict monotone_learning() {
  constexpr double kRmseShare = 0.90;
  // Mean posterior variance may only drift by rounding.
  constexpr double kVarianceSlack = 1e-9;
  const Sweep& s = sweep();
  Verdict v;
  bool pass = true;
  for (PlannerKind p : {PlannerKind::Entropy, PlannerKind::Greedy, PlannerKind::RandomWaypoint}) {
    int runs = 0, rmse_mono = 0, var_mono = 0;
    for (const auto* set : {&s.rect, &s.whole}) {
      for (const RunRecord& r : *set) {
        if (r.spec.mission.planner != p) continue;
        ++runs;
        bool rm = r.checkpoints.size() == 5, vm = r.checkpoints.size() == 5;
        for (std::size_t k = 1; k < r.checkpoints.size(); ++k) {
          rm = rm && r.checkpoints[k].rmse <= r.checkpoints[k - 1].rmse;
          vm = vm && r.checkpoints[k].mean_variance <= r.checkpoints[k - 1].mean_variance * (1.0 + kVarianceSlack);
        }
        rmse_mono += rm;
        var_mono += vm;
      }
    }
    const double share = static_cast<double>(rmse_mono) / runs;
    pass = pass && share >= kRmseShare && var_mono == runs;
    v.details.push_back(fmt("%s: RMSE non-increasing on %d/%d runs (%.0f%%), mean variance non-increasing on %d/%d",
                            to_string(p).c_str(), rmse_mono, runs, 100 * share, var_mono, runs));
  }
  v.pass = pass;
  v.summary = fmt("checkpoints {0,50,100,150,200}; RMSE share needed %.0f%%, variance share needed 100%%", 100 * kRmseShare);
  return v;
}

// ---------------------------------------------------------------------------------------
// 8. Planner wall time against the square of the outdoor cell count at N = 2.

Verdict complexity() {
  constexpr double kFactor = 3.0;
  constexpr int kHorizon = 20;
  const KrigingModel m = KrigingModel::make(0.0, 0.0, 25.0, 50.0);
  std::vector<int> sides{5, 8, 10};
  std::vector<double> times;
  Verdict v;
  for (int side : sides) {
    GridSpec g;
    g.length_m = g.width_m = 4.0 * side;
    const UrbanWorld w = UrbanWorld::open(g);
    const SwarmState start{{{side / 2, side / 2}, {side / 2 - 1, side / 2}}, 0};
    std::vector<double> reps;
    for (int rep = 0; rep < 5; ++rep) {
      const auto t0 = Clock::now();
      const MissionPlan plan = plan_entropy_vi({w, m, start, kHorizon});
      reps.push_back(seconds_since(t0));
      if (plan.actions.size() != kHorizon) return {false, "planner returned a short plan", {}};
    }
    times.push_back(median(reps));
  }
  bool pass = true;
  for (std::size_t i = 0; i < sides.size(); ++i) {
    const double s = sides[i] * sides[i], s0 = sides[0] * sides[0];
    const double ratio = (times[i] / times[0]) / ((s / s0) * (s / s0));
    if (i > 0) pass = pass && ratio <= kFactor && ratio >= 1.0 / kFactor;
    v.details.push_back(fmt("S=%3.0f: %.4f s (median of 5), growth relative to S^2 model: %.2f", s, times[i], ratio));
  }
  v.pass = pass;
  v.summary = fmt("N=2, T=%d, open grids S in {25, 64, 100}; measured/S^2-predicted growth within [1/%.0f, %.0f]", kHorizon,
                  kFactor, kFactor);
  return v;
}

// ---------------------------------------------------------------------------------------
// 9. Re-runs with identical seeds produce identical artifacts.

Verdict determinism() {
  struct Case {
    PlannerKind planner;
    int uavs;
    StartPolicy::Kind start;
    double noise;
    int window;
  };
  const Case cases[] = {
      {PlannerKind::Entropy, 3, StartPolicy::Kind::Rectangle, 0.0, 3},
      {PlannerKind::Entropy, 2, StartPolicy::Kind::WholeArea, 0.5, 3},
      {PlannerKind::Entropy, 1, StartPolicy::Kind::Rectangle, 0.0, 2},
      {PlannerKind::Greedy, 3, StartPolicy::Kind::Rectangle, 0.0, 3},
      {PlannerKind::Greedy, 2, StartPolicy::Kind::WholeArea, 0.5, 3},
      {PlannerKind::Greedy, 4, StartPolicy::Kind::Rectangle, 0.0, 3},
      {PlannerKind::RandomWaypoint, 3, StartPolicy::Kind::Rectangle, 0.0, 3},
      {PlannerKind::RandomWaypoint, 1, StartPolicy::Kind::WholeArea, 0.5, 3},
      {PlannerKind::RandomWaypoint, 5, StartPolicy::Kind::WholeArea, 0.0, 3},
      {PlannerKind::Entropy, 3, StartPolicy::Kind::WholeArea, 0.0, 1},
  };
  Verdict v;
  int identical = 0, k = 0;
  for (const Case& c : cases) {
    const std::uint64_t seed = derive_seed(909, "determinism", static_cast<std::uint64_t>(k++));
    const auto make = [&] {
      Scenario s;
      s.world = std::make_shared<const UrbanWorld>(crop_world(generate_world(derive_seed(seed, "world")), seed, 128.0));
      const auto cells = s.world->flyable_cells();
      const Vec3 tx = s.world->grid().at_altitude(cells[cells.size() / 2], 2.0);
      s.field = synthesize_field(*s.world, tx, derive_seed(seed, "field"), TruthParams{});
      return s;
    };
    RunSpec run;
    run.mission.planner = c.planner;
    run.mission.uav_count = c.uavs;
    run.mission.steps = 60;
    run.mission.start.kind = c.start;
    run.mission.noise.std_db = c.noise;
    run.mission.noise.seed = derive_seed(seed, "noise");
    run.mission.entropy_window = c.window;
    run.mission.start_seed = derive_seed(seed, "start");
    run.mission.planner_seed = derive_seed(seed, "planner");
    run.mission.checkpoints = {0, 30, 60};
    const KrigingModel m = KrigingModel::make(-40, 15, 25, 50, 2);
    // Independent re-creation of world and field for each run.
    const RunRecord a = execute_run(make(), m, run, Json::object());
    const RunRecord b = execute_run(make(), m, run, Json::object());
    const std::uint64_t ha = fnv1a64(a.bundle), hb = fnv1a64(b.bundle);
    const bool same = ha == hb && a.bundle == b.bundle && a.status == "ok";
    identical += same;
    v.details.push_back(fmt("%-7s N=%d %-9s noise %.1f: %s %s %s", to_string(c.planner).c_str(), c.uavs,
                            to_string(c.start).c_str(), c.noise, hex64(ha).c_str(), same ? "==" : "!=", hex64(hb).c_str()));
  }
  v.pass = identical == 10;
  v.summary = fmt("%d/10 configurations produce bit-identical artifacts on re-run", identical);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"kriging oracle equivalence", kriging_oracle},
      {"value iteration optimality", vi_optimality},
      {"hyperparameter recovery", hyperparameter_recovery},
      {"calibration", calibration},
      {"planner ordering", planner_ordering},
      {"start dispersion", start_dispersion},
      {"monotone learning", monotone_learning},
      {"complexity", complexity},
      {"determinism", determinism},
  };
  std::set<int> selected;
  bool sweep_only = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--sweep-cache" && i + 1 < argc) {
      sweep_cache = argv[++i];
    } else if (a == "--refresh-sweep") {
      refresh_sweep = true;
    } else if (a == "--sweep-only") {
      sweep_only = true;
    } else {
      selected.insert(std::atoi(argv[i]));
    }
  }
  if (sweep_only) {
    const Sweep& s = sweep();
    std::printf("sweep: %zu + %zu runs, %.0f s\n", s.rect.size(), s.whole.size(),
                s.setup_seconds + s.rect_seconds + s.whole_seconds);
    return 0;
  }
  int passed = 0, run = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what(), {}};
    }
    ++run;
    passed += v.pass;
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.summary.c_str());
    for (const auto& d : v.details) std::printf("       %s\n", d.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d passed\n", passed, run);
  return passed == run ? 0 : 1;
}
