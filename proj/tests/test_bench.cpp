#include <doctest.h>

#include <cmath>

#include "zapsa/bench.hpp"
#include "zapsa/covariance.hpp"
#include "zapsa/test_support.hpp"

using namespace zapsa;
using bench::AlgoSpec;
using bench::TrialEnsemble;

namespace {

mdp::FiniteMDP trivial_mdp() {
  mdp::FiniteMDP m;
  m.n_states = 1;
  m.beta = 0.5;
  m.feasible_actions = {{0}};
  mdp::index_pairs(m);
  m.kernel = Matrix::Ones(1, 1);
  m.cost = Vector::Ones(1);
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("run_trials: distinct trajectories, reproducible ensembles") {
  const mdp::FiniteMDP six = mdp::build_six_state();
  const auto behavior = qlearn::BehaviorPolicy::uniform(six);
  const AlgoSpec algo = AlgoSpec::from_name("watkins");
  const std::vector<long> grid = {5, 10};

  const TrialEnsemble a =
      bench::run_trials(six, algo, behavior, 2, 10, grid, 42, {-100.0, 100.0});
  CHECK(a.n_trials() == 2);
  CHECK((a.snapshots[0][1] - a.snapshots[1][1]).norm() > 0.0);

  const TrialEnsemble b =
      bench::run_trials(six, algo, behavior, 2, 10, grid, 42, {-100.0, 100.0});
  for (int i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < grid.size(); ++j)
      CHECK((a.snapshots[i][j] - b.snapshots[i][j]).norm() == 0.0);
}

TEST_CASE("run_trials: degenerate deterministic environment collapses trials") {
  const mdp::FiniteMDP m = trivial_mdp();
  const auto behavior = qlearn::BehaviorPolicy::uniform(m);
  const TrialEnsemble e = bench::run_trials(m, AlgoSpec::from_name("watkins"), behavior, 3, 20,
                                            {10, 20}, 7, {2.0, 2.0});
  for (int i = 1; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK((e.snapshots[i][j] - e.snapshots[0][j]).norm() == 0.0);
}

TEST_CASE("run_trials: config validation") {
  const mdp::FiniteMDP m = trivial_mdp();
  const auto behavior = qlearn::BehaviorPolicy::uniform(m);
  CHECK_THROWS_AS(
      bench::run_trials(m, AlgoSpec::from_name("zap"), behavior, 1, 10, {10}, 1, {0, 1}),
      ConfigError);
  CHECK_THROWS_AS(
      bench::run_trials(m, AlgoSpec::from_name("zap"), behavior, 2, 10, {11}, 1, {0, 1}),
      ConfigError);
}

TEST_CASE("batch_means_W: identical trials give zero; N=2 closed form") {
  const mdp::FiniteMDP m = trivial_mdp();
  const auto behavior = qlearn::BehaviorPolicy::uniform(m);
  const TrialEnsemble degenerate = bench::run_trials(m, AlgoSpec::from_name("watkins"), behavior,
                                                     4, 20, {20}, 9, {1.0, 1.0});
  const auto bm0 = bench::batch_means_W(degenerate, 20);
  CHECK(bm0.w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(bm0.covariance.cwiseAbs().maxCoeff() == 0.0);

  TrialEnsemble two;
  two.snapshot_steps = {16};
  two.snapshots = {{Vector::Constant(2, 1.0)}, {Vector::Constant(2, 3.0)}};
  const auto bm = bench::batch_means_W(two, 16);
  // W_i = 4 (theta_i - 2): rows are -4 and +4; covariance = 2 * 16 = 32 per entry.
  CHECK(bm.w(0, 0) == doctest::Approx(-4.0));
  CHECK(bm.w(1, 0) == doctest::Approx(4.0));
  CHECK(bm.covariance(0, 0) == doctest::Approx(32.0));

  CHECK_THROWS_AS(bench::batch_means_W(two, 99), SnapshotMissing);
}

TEST_CASE("batch_means_W: recovers a known covariance from synthetic trials") {
  Rng rng(404);
  const long n = 400;
  const int trials = 1000;
  Matrix c(2, 2);
  c << 2.0, 0.6, 0.6, 1.0;
  const Matrix root = c.llt().matrixL();

  TrialEnsemble synthetic;
  synthetic.snapshot_steps = {n};
  synthetic.snapshots.resize(trials);
  const Vector center = Vector::Constant(2, 5.0);
  for (int i = 0; i < trials; ++i) {
    const Vector z = test::random_vector(2, rng);
    synthetic.snapshots[i] = {center + (root * z) / std::sqrt(static_cast<double>(n))};
  }
  const auto bm = bench::batch_means_W(synthetic, n);
  CHECK(std::abs(bm.covariance.trace() - c.trace()) / c.trace() < 0.15);

  // Common constant shifts cancel in the centered statistics.
  TrialEnsemble shifted = synthetic;
  for (auto& trial : shifted.snapshots) trial[0] += Vector::Constant(2, 123.0);
  const auto bm_shifted = bench::batch_means_W(shifted, n);
  CHECK((bm_shifted.covariance - bm.covariance).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("bellman_error_track: zero at the optimum, degenerate band for one trial") {
  const mdp::FiniteMDP six = mdp::build_six_state();
  const Vector q_star = mdp::solve_q_star(six, 1e-11);

  TrialEnsemble at_optimum;
  at_optimum.snapshot_steps = {10, 100};
  at_optimum.snapshots = {{q_star, q_star}, {q_star, q_star}};
  const auto bands = bench::bellman_error_track(at_optimum, six);
  CHECK(bands.mean.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(bands.half_width.cwiseAbs().maxCoeff() < 1e-8);

  TrialEnsemble single;
  single.snapshot_steps = {10};
  single.snapshots = {{Vector::Zero(six.d())}};
  const auto solo = bench::bellman_error_track(single, six);
  CHECK(solo.mean[0] == doctest::Approx(100.0));
  CHECK(solo.half_width[0] == 0.0);
}

TEST_CASE("histogram: shapes and counting") {
  const std::vector<double> one = {3.3};
  const auto h1 = bench::histogram(one, 5);
  long total = 0;
  int occupied = 0;
  for (long c : h1.counts) {
    total += c;
    occupied += c > 0;
  }
  CHECK(total == 1);
  CHECK(occupied == 1);

  std::vector<double> grid;
  for (int i = 0; i < 40; ++i) grid.push_back(i + 0.5);
  const auto h2 = bench::histogram(grid, 4, std::pair<double, double>{0.0, 40.0});
  for (long c : h2.counts) CHECK(c == 10);

  Rng rng(405);
  std::vector<double> gauss;
  for (int i = 0; i < 20000; ++i) gauss.push_back(rng.normal());
  const auto h3 = bench::histogram(gauss, 60);
  double weighted_mean = 0.0;
  long count_sum = 0;
  for (std::size_t b = 0; b < h3.counts.size(); ++b) {
    weighted_mean += 0.5 * (h3.edges[b] + h3.edges[b + 1]) * h3.counts[b];
    count_sum += h3.counts[b];
  }
  CHECK(count_sum == 20000);
  CHECK(std::abs(weighted_mean / 20000.0) < 0.05);
}

TEST_CASE("clt sanity: scalar Monte-Carlo average hits the predicted variance") {
  // 1-d linear model with unit gain: theta averages unit-variance noise, and
  // the asymptotic variance prediction is g^2 sigma^2/(2g-1) = 1.
  const long n = 10000;
  const int trials = 500;
  TrialEnsemble ensemble;
  ensemble.snapshot_steps = {n};
  ensemble.snapshots.resize(trials);
  const Rng master(606);
  for (int i = 0; i < trials; ++i) {
    Rng rng = master.split(i);
    double theta = rng.uniform(-1.0, 1.0);
    for (long k = 1; k <= n; ++k) theta += (1.0 / k) * (-theta + rng.normal());
    ensemble.snapshots[i] = {Vector::Constant(1, theta)};
  }
  const auto bm = bench::batch_means_W(ensemble, n);
  CHECK(bm.covariance(0, 0) > 0.7);
  CHECK(bm.covariance(0, 0) < 1.4);
}

TEST_CASE("run_trajectory: rpj reports the running average; zap reports diagnostics") {
  const mdp::FiniteMDP six = mdp::build_six_state();
  const auto behavior = qlearn::BehaviorPolicy::uniform(six);
  const std::vector<long> grid = {50, 100};
  const Vector varpi = cov::stationary_pair_pmf(six, behavior.as_policy());

  const auto rpj = bench::run_trajectory(six, AlgoSpec::from_name("rpj"), behavior,
                                         Vector::Zero(six.d()), 100, grid, Rng(1));
  CHECK(rpj.snapshots.size() == 2);
  CHECK(rpj.switch_accumulator.empty());

  const auto zap = bench::run_trajectory(six, AlgoSpec::from_name("zap"), behavior,
                                         Vector::Zero(six.d()), 100, grid, Rng(1), &varpi);
  CHECK(zap.snapshots.size() == 2);
  REQUIRE(zap.switch_accumulator.size() == 2);
  CHECK(zap.switch_accumulator[0] <= zap.switch_accumulator[1]);  // non-decreasing
  REQUIRE(zap.chat_gap.size() == 2);
  CHECK(std::isfinite(zap.chat_gap[1]));
}

TEST_CASE("run_trials: worker count never changes results") {
  const mdp::FiniteMDP six = mdp::build_six_state();
  const auto behavior = qlearn::BehaviorPolicy::uniform(six);
  const AlgoSpec algo = AlgoSpec::from_name("zap");
  const std::vector<long> grid = {50};

  setenv("ZAPSA_THREADS", "1", 1);
  const TrialEnsemble serial =
      bench::run_trials(six, algo, behavior, 6, 50, grid, 77, {-10.0, 10.0});
  setenv("ZAPSA_THREADS", "4", 1);
  const TrialEnsemble pooled =
      bench::run_trials(six, algo, behavior, 6, 50, grid, 77, {-10.0, 10.0});
  unsetenv("ZAPSA_THREADS");
  for (int i = 0; i < 6; ++i)
    CHECK((serial.snapshots[i][0] - pooled.snapshots[i][0]).norm() == 0.0);
}

TEST_CASE("run_trajectory: scaled Watkins with the projection box stays capped") {
  const mdp::FiniteMDP six = mdp::build_six_state();
  const auto behavior = qlearn::BehaviorPolicy::uniform(six);
  AlgoSpec algo = AlgoSpec::from_name("watkins_scaled");
  algo.g = 70.0;
  algo.reward_cap = 1000.0;
  const std::vector<long> grid = {100, 1000, 10000};
  const auto result = bench::run_trajectory(six, algo, behavior, Vector::Zero(six.d()), 10000,
                                            grid, Rng(3));
  for (const Vector& theta : result.snapshots) {
    CHECK(theta.allFinite());
    CHECK(theta.minCoeff() >= -1000.0);  // cost floor = -(reward cap)
  }
}
