#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "gainscout/channel.hpp"
#include "gainscout/kriging.hpp"
#include "gainscout/rng.hpp"
#include "oracles.hpp"

using namespace gainscout;

namespace {

GridSpec grid_of(int cells, double spacing = 4.0) {
  GridSpec g;
  g.spacing_m = spacing;
  g.length_m = g.width_m = spacing * cells;
  return g;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("path_loss closed forms") {
  CHECK(path_loss({1, 0, 0}, {0, 0, 0}, -30.0, 20.0) == -30.0);
  CHECK(path_loss({std::numbers::e, 0, 0}, {0, 0, 0}, 0.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(path_loss({100, 0, 0}, {0, 0, 0}, -30.0, 20.0) == doctest::Approx(-122.10340371976183).epsilon(1e-14));
  // Floor applies below the floor distance.
  CHECK(path_loss({0.5, 0, 0}, {0, 0, 0}, -30.0, 20.0, 2.0) == path_loss({2, 0, 0}, {0, 0, 0}, -30.0, 20.0));
}

TEST_CASE("kernel closed forms") {
  const Vec3 o{0, 0, 0};
  CHECK(kernel(o, o, 7.0, 3.0) == 7.0);
  CHECK(kernel(o, {3, 0, 0}, 7.0, 3.0) == doctest::Approx(7.0 / std::numbers::e).epsilon(1e-15));
  CHECK(kernel(o, {0, 0, 9}, 1.0, 3.0) == doctest::Approx(0.049787068367863944).epsilon(1e-14));
}

TEST_CASE("fit_path_loss") {
  SUBCASE("noiseless recovery") {
    std::vector<DistanceGain> s;
    for (double r : {1.5, 3.0, 10.0, 40.0, 200.0}) s.push_back({r, -30.0 - 20.0 * std::log(r)});
    const PathLossFit f = fit_path_loss(s);
    CHECK(std::abs(f.alpha + 30.0) < 1e-9);
    CHECK(std::abs(f.beta - 20.0) < 1e-9);
    CHECK(f.mse < 1e-18);
  }
  SUBCASE("two points are fit exactly") {
    const std::vector<DistanceGain> s{{2.0, -50.0}, {20.0, -90.0}};
    const PathLossFit f = fit_path_loss(s);
    CHECK(f.alpha - f.beta * std::log(2.0) == doctest::Approx(-50.0).epsilon(1e-12));
    CHECK(f.alpha - f.beta * std::log(20.0) == doctest::Approx(-90.0).epsilon(1e-12));
  }
  SUBCASE("noisy fit equals the normal equations and lies within 3 standard errors") {
    Rng rng(17);
    std::vector<DistanceGain> s;
    Eigen::MatrixXd x(1000, 2);
    Eigen::VectorXd y(1000);
    for (int i = 0; i < 1000; ++i) {
      const double r = rng.uniform(2.0, 300.0);
      const double g = -30.0 - 20.0 * std::log(r) + 2.0 * rng.normal();
      s.push_back({r, g});
      x(i, 0) = 1.0;
      x(i, 1) = -std::log(r);
      y(i) = g;
    }
    const Eigen::MatrixXd xtx = x.transpose() * x;
    const Eigen::Vector2d coef = xtx.fullPivLu().solve(x.transpose() * y);
    const PathLossFit f = fit_path_loss(s);
    CHECK(std::abs(f.alpha - coef(0)) < 1e-9 * std::abs(coef(0)));
    CHECK(std::abs(f.beta - coef(1)) < 1e-9 * std::abs(coef(1)));
    const Eigen::MatrixXd cov = 4.0 * xtx.inverse();
    CHECK(std::abs(f.alpha + 30.0) < 3.0 * std::sqrt(cov(0, 0)));
    CHECK(std::abs(f.beta - 20.0) < 3.0 * std::sqrt(cov(1, 1)));
  }
  SUBCASE("degenerate designs are rejected") {
    const std::vector<DistanceGain> same{{5.0, -1.0}, {5.0, -2.0}, {5.0, -3.0}};
    CHECK_THROWS_AS(fit_path_loss(same), std::invalid_argument);
    const std::vector<DistanceGain> one{{5.0, -1.0}};
    CHECK_THROWS_AS(fit_path_loss(one), std::invalid_argument);
  }
}

TEST_CASE("fit_kernel recovers sampled hyperparameters") {
  // 400 points on a 500 m square: ten correlation lengths across.
  GridSpec spec = grid_of(20, 25.0);
  spec.height_m = 75.0;
  const UrbanWorld w = UrbanWorld::open(spec);
  const GridSpec& g = w.grid();
  Rng pick(3);
  std::vector<double> phis, deltas;
  for (int seed = 0; seed < 5; ++seed) {
    const ShadowingSample s = sample_shadowing(w, 100 + seed, 25.0, 50.0);
    ResidualSet set;
    std::vector<int> idx(static_cast<std::size_t>(g.cell_count()));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < 400; ++i) std::swap(idx[i], idx[i + pick.index(idx.size() - i)]);
    for (int i = 0; i < 400; ++i) {
      set.points.push_back(g.pred_point(g.cell(idx[i])));
      set.residuals.push_back(s.pred_plane[idx[i]]);
    }
    const std::vector<ResidualSet> sets{set};
    const KernelFit f = fit_kernel(sets);
    CHECK(f.nll <= kernel_nll(sets, 25.0, 50.0) + 1e-9);
    phis.push_back(f.phi);
    deltas.push_back(f.delta);
  }
  std::sort(phis.begin(), phis.end());
  std::sort(deltas.begin(), deltas.end());
  CHECK(std::abs(phis[2] / 25.0 - 1.0) < 0.3);
  CHECK(std::abs(deltas[2] / 50.0 - 1.0) < 0.3);
}

TEST_CASE("fit_kernel white-noise limit gives the mean square") {
  ResidualSet set;
  for (int i = 0; i < 30; ++i) {
    set.points.push_back({4.0 * i, 0.0, 10.0});
    set.residuals.push_back(3.0);
  }
  KernelFitOptions opt;
  opt.delta_min = 1e-3;
  opt.delta_max = 1e-2;
  const std::vector<ResidualSet> sets{set};
  const KernelFit f = fit_kernel(sets, opt);
  CHECK(f.phi == doctest::Approx(9.0).epsilon(1e-4));
}

TEST_CASE("fit_kernel input validation") {
  ResidualSet two{{{0, 0, 0}, {1, 0, 0}}, {1.0, 2.0}};
  CHECK_THROWS_AS(fit_kernel(std::vector<ResidualSet>{two}), std::invalid_argument);
  ResidualSet dup{{{0, 0, 0}, {1, 0, 0}, {0, 0, 0}}, {1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(fit_kernel(std::vector<ResidualSet>{dup}), std::invalid_argument);
}

TEST_CASE("kernel_nll matches the dense formula") {
  ResidualSet set{{{0, 0, 0}, {3, 0, 0}, {0, 5, 1}, {7, 2, 0}}, {1.0, -0.5, 2.0, 0.3}};
  const double phi = 4.0, delta = 6.0;
  Eigen::MatrixXd k(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) k(i, j) = kernel(set.points[i], set.points[j], phi, delta);
    k(i, i) += 1e-6 * phi;
  }
  const Eigen::Vector4d y(1.0, -0.5, 2.0, 0.3);
  const double expect = 0.5 * std::log(k.determinant()) + 0.5 * y.dot(k.inverse() * y) + 2.0 * std::log(2.0 * std::numbers::pi);
  CHECK(kernel_nll(std::vector<ResidualSet>{set}, phi, delta) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("posterior matches brute-force conditioning on a 5-cell instance") {
  const KrigingModel m = KrigingModel::make(-30.0, 20.0, 25.0, 10.0, 2.0);
  const Vec3 tx{0, 0, 2};
  const std::vector<Vec3> data{{4, 4, 10}, {12, 4, 10}, {4, 16, 10}};
  const std::vector<double> values{-70.0, -80.0, -78.0};
  const std::vector<Vec3> queries{{8, 8, 10}, {20, 20, 10}};
  const Posterior p = posterior_at(m, tx, data, values, queries, true);
  const oracle::Conditioned o = oracle::condition(m, tx, data, values, queries);
  for (int j = 0; j < 2; ++j) {
    CHECK(rel_err(p.mean(j), o.mean(j)) < 1e-8);
    CHECK(rel_err(p.variance(j), o.cov(j, j)) < 1e-8);
    for (int k = 0; k < 2; ++k) CHECK(rel_err((*p.covariance)(j, k), o.cov(j, k)) < 1e-8);
  }
}

TEST_CASE("posterior limits") {
  const KrigingModel m = KrigingModel::make(-30.0, 20.0, 25.0, 10.0, 2.0);
  const Vec3 tx{0, 0, 2};
  const std::vector<Vec3> data{{4, 4, 10}};
  const std::vector<double> values{-55.0};
  SUBCASE("query at the measured point") {
    const Posterior p = posterior_at(m, tx, data, values, data, false);
    CHECK(p.mean(0) == doctest::Approx(-55.0).epsilon(1e-5));
    CHECK(p.variance(0) <= m.jitter + 1e-12);
  }
  SUBCASE("query far away") {
    const std::vector<Vec3> far{{5000, 4, 10}};
    const Posterior p = posterior_at(m, tx, data, values, far, false);
    CHECK(p.mean(0) == doctest::Approx(m.mean(far[0], tx)).epsilon(1e-12));
    CHECK(p.variance(0) == doctest::Approx(m.phi).epsilon(1e-12));
  }
  SUBCASE("empty data is rejected") {
    CHECK_THROWS_AS(posterior_at(m, tx, {}, {}, data, false), std::invalid_argument);
  }
}

TEST_CASE("posterior covariance is symmetric and PSD") {
  Rng rng(8);
  const KrigingModel m = KrigingModel::make(-30.0, 20.0, 25.0, 30.0, 2.0);
  std::vector<Vec3> data, queries;
  std::vector<double> values;
  for (int i = 0; i < 40; ++i) {
    data.push_back({rng.uniform(0, 100), rng.uniform(0, 100), 10});
    values.push_back(rng.uniform(-120, -60));
  }
  for (int i = 0; i < 30; ++i) queries.push_back({rng.uniform(0, 100), rng.uniform(0, 100), 10});
  const Posterior p = posterior_at(m, {50, 50, 2}, data, values, queries, true);
  const Eigen::MatrixXd& c = *p.covariance;
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  CHECK(es.eigenvalues().minCoeff() >= -1e-6 * m.phi);
}

TEST_CASE("exact interpolation without jitter on a well-conditioned instance") {
  KrigingModel m = KrigingModel::make(-30.0, 20.0, 25.0, 10.0, 2.0);
  m.jitter = 0.0;
  const std::vector<Vec3> data{{0, 0, 10}, {30, 0, 10}, {0, 30, 10}};
  const std::vector<double> values{-60.0, -75.0, -71.0};
  const Posterior p = posterior_at(m, {50, 50, 2}, data, values, data, false);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(p.mean(i) - values[i]) <= 1e-6);
}

TEST_CASE("jitter escalates on a singular observed covariance") {
  KrigingModel m = KrigingModel::make(0.0, 0.0, 25.0, 10.0);
  m.jitter = 0.0;
  const std::vector<Vec3> data{{0, 0, 0}, {0, 0, 0}, {2, 0, 0}};
  const std::vector<double> values{1.0, 1.0, 1.0};
  const Posterior p = posterior_at(m, {}, data, values, data, false);
  CHECK(p.jitter > 0.0);
  CHECK(p.jitter <= 1e-6 * m.phi + 1e-15);
}

TEST_CASE("variance field ignores values and shrinks as data arrive") {
  const UrbanWorld w = crop_world(generate_world(12), 1, 64.0);
  const GridSpec& g = w.grid();
  const KrigingModel m = KrigingModel::make(-40.0, 15.0, 25.0, 30.0, 2.0);
  const GainField f = synthesize_field(w, g.at_altitude(w.outdoor_prediction_cells()[0], 2.0), 1, TruthParams{});
  const std::vector<Cell> flyable = w.flyable_cells();

  MeasurementLog log;
  std::vector<double> before = posterior_variance_field(m, w, log);
  for (int i = 0; i < g.cell_count(); ++i) {
    if (w.outdoor_at_prediction(g.cell(i))) CHECK(before[i] == m.phi);
  }
  Rng rng(4);
  for (int k = 0; k < 15; ++k) {
    const std::vector<Cell> c{flyable[rng.index(flyable.size())]};
    log = measure(f, g, log, c, k);
    const std::vector<double> after = posterior_variance_field(m, w, log);
    for (int i = 0; i < g.cell_count(); ++i) CHECK(after[i] <= before[i] + 1e-9);
    before = after;
  }

  // Same locations, permuted values.
  MeasurementLog permuted;
  const auto& vals = log.values();
  for (std::size_t i = 0; i < log.size(); ++i) permuted.append(log.cells()[i], 0, vals[(i + 3) % vals.size()]);
  CHECK(posterior_variance_field(m, w, permuted) == before);
}

TEST_CASE("grid posterior uses the flight plane for data and the prediction plane for queries") {
  GridSpec g = grid_of(6);
  g.uav_altitude_m = 20.0;
  const UrbanWorld w = UrbanWorld::open(g);
  const KrigingModel m = KrigingModel::make(-40.0, 15.0, 25.0, 30.0, 2.0);
  MeasurementLog log;
  log.append({2, 2}, 0, -70.0);
  const std::vector<Cell> q{{2, 2}};
  const Posterior p = posterior(m, g, {0, 0, 2}, log, q);
  const oracle::Conditioned o = oracle::condition(m, {0, 0, 2}, {g.uav_point({2, 2})}, {-70.0}, {g.pred_point({2, 2})});
  CHECK(rel_err(p.mean(0), o.mean(0)) < 1e-10);
  CHECK(p.variance(0) > 1.0);  // 10 m vertical gap
}

TEST_CASE("incremental factor matches a fresh conditioning") {
  const KrigingModel m = KrigingModel::make(0.0, 0.0, 25.0, 20.0);
  Rng rng(2);
  IncrementalCholesky inc(m);
  std::vector<Vec3> targets;
  for (int i = 0; i < 12; ++i) targets.push_back({rng.uniform(0, 60), rng.uniform(0, 60), 10});
  inc.track(targets);
  std::vector<Vec3> data;
  for (int i = 0; i < 40; ++i) {
    data.push_back({rng.uniform(0, 60), rng.uniform(0, 60), 10});
    inc.add(data.back());
    if (i == 5) inc.track(targets);  // re-tracking mid-stream rebuilds the state
  }
  const oracle::Conditioned o = oracle::condition(m, {}, data, std::vector<double>(data.size(), 0.0), targets);
  const Eigen::MatrixXd c = inc.conditional_covariance(targets);
  CHECK((c - o.cov).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((inc.tracked_variance() - o.cov.diagonal()).cwiseAbs().maxCoeff() < 1e-8);
}
