#include "zapsa/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "zapsa/bench.hpp"
#include "zapsa/covariance.hpp"
#include "zapsa/csv.hpp"
#include "zapsa/mdp.hpp"
#include "zapsa/numerics.hpp"
#include "zapsa/qlearn.hpp"
#include "zapsa/stopping.hpp"
#include "zapsa/threads.hpp"
#include "zapsa/td.hpp"

namespace zapsa::cli {

namespace {

namespace fs = std::filesystem;
using config::RunConfig;
using nlohmann::json;

bool is_stopping_algo(const std::string& name) {
  return name == "q0" || name == "gq0" || name == "zap_stopping";
}

bool is_td_algo(const std::string& name) { return name == "td" || name == "lstd"; }

mdp::FiniteMDP make_env(const RunConfig& cfg) {
  if (cfg.env == "six_state") {
    mdp::SixStateConfig preset;
    preset.beta = cfg.beta;
    if (!cfg.edges.empty()) preset.edges = cfg.edges;
    return mdp::build_six_state(preset);
  }
  if (cfg.env == "scalar" || cfg.env == "stopping")
    throw ConfigError("env '" + cfg.env + "' has no finite MDP");
  return mdp::load_file(cfg.env);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

std::string hash_comment(const RunConfig& cfg) { return "config_hash=" + cfg.hash(); }

void write_manifest(const RunConfig& cfg, const std::vector<std::string>& outputs) {
  json j;
  j["config"] = json::parse(cfg.canonical_json());
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  j["outputs"] = outputs;
  std::ofstream out(out_path(cfg, "manifest.json"), std::ios::binary);
  out << j.dump(2) << "\n";
}

std::vector<long> snapshot_grid(const RunConfig& cfg) {
  std::vector<long> grid;
  for (long s : cfg.snapshots)
    if (s >= 1 && s <= cfg.steps) grid.push_back(s);
  if (grid.empty() || grid.back() != cfg.steps) grid.push_back(cfg.steps);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return rows;
}

// --- solve -------------------------------------------------------------------

int solve_impl(const RunConfig& cfg) {
  const mdp::FiniteMDP env = make_env(cfg);
  const cov::OptimalSolution opt = cov::solve_unique_optimal(env);
  const Vector h = mdp::value_of_policy(env, opt.policy);

  CsvWriter q_csv(out_path(cfg, "q_star.csv"), {"pair", "state", "action", "q_reward"},
                  hash_comment(cfg));
  for (Index k = 0; k < env.d(); ++k) {
    const auto [x, u] = env.pairs[k];
    q_csv.row({static_cast<double>(k), static_cast<double>(x), static_cast<double>(u),
               -opt.q_star[k]});
  }
  CsvWriter p_csv(out_path(cfg, "policy.csv"), {"state", "action", "h_reward"},
                  hash_comment(cfg));
  for (int x = 0; x < env.n_states; ++x)
    p_csv.row({static_cast<double>(x), static_cast<double>(opt.policy.actions[x]), -h[x]});
  write_manifest(cfg, {"q_star.csv", "policy.csv"});
  return kExitOk;
}

// --- cov ---------------------------------------------------------------------

int cov_impl(const RunConfig& cfg) {
  Matrix a, sigma_delta;
  json report;
  if (cfg.env == "scalar") {
    a = -Matrix::Identity(1, 1);
    sigma_delta = Matrix::Identity(1, 1);
  } else {
    const mdp::FiniteMDP env = make_env(cfg);
    const mdp::Policy behavior = mdp::Policy::uniform(env);
    a = cov::linearization_A(env, behavior);
    sigma_delta = cov::sigma_delta_tabular(env, behavior);
    const cov::PfCertificate cert = cov::pf_certificate(env, behavior);
    report["pf"] = {{"lambda_pf", cert.lambda_pf},
                    {"lambda_a", cert.lambda_a},
                    {"bound", cert.bound},
                    {"eigenvector_positive", cert.eigenvector_positive},
                    {"bound_satisfied", cert.bound_satisfied},
                    {"eigenvector",
                     std::vector<double>(cert.eigenvector.begin(), cert.eigenvector.end())}};
  }

  const cov::CovarianceReport best = cov::asymptotic_cov(a, sigma_delta, cov::GainSpec::optimal());
  const std::vector<double> grid = cfg.gain_grid_or_default();
  const cov::SweepResult sweep = cov::scalar_gain_sweep(a, sigma_delta, grid);

  report["config_hash"] = cfg.hash();
  report["A"] = matrix_json(a);
  report["sigma_delta"] = matrix_json(sigma_delta);
  json spectrum = json::array();
  for (const auto& z : num::eigenvalues(a)) spectrum.push_back({z.real(), z.imag()});
  report["spectrum_A"] = spectrum;
  report["g_star"] = sweep.g_star;
  report["sigma_star"] = matrix_json(*best.sigma_theta);
  report["trace_sigma_star"] = best.sigma_theta->trace();
  {
    std::ofstream out(out_path(cfg, "report.json"), std::ios::binary);
    out << report.dump(2) << "\n";
  }

  CsvWriter sweep_csv(out_path(cfg, "sweep.csv"), {"g", "trace", "verdict"}, hash_comment(cfg));
  for (const auto& row : sweep.rows) {
    const std::string trace =
        row.verdict == cov::Verdict::Finite ? format_double(row.trace) : std::string();
    sweep_csv.row_mixed({format_double(row.g), trace, cov::verdict_name(row.verdict)});
  }
  write_manifest(cfg, {"report.json", "sweep.csv"});
  return kExitOk;
}

// --- run (single trajectory) ---------------------------------------------------

void write_theta_csv(const RunConfig& cfg, const std::vector<long>& grid,
                     const std::vector<Vector>& snapshots, bool negate_to_reward) {
  std::vector<std::string> header = {"step"};
  if (!snapshots.empty())
    for (Index i = 0; i < snapshots.front().size(); ++i)
      header.push_back("theta" + std::to_string(i));
  CsvWriter csv(out_path(cfg, "theta.csv"), header, hash_comment(cfg));
  for (std::size_t j = 0; j < snapshots.size(); ++j) {
    std::vector<double> row = {static_cast<double>(grid[j])};
    for (Index i = 0; i < snapshots[j].size(); ++i)
      row.push_back(negate_to_reward ? -snapshots[j][i] : snapshots[j][i]);
    csv.row(row);
  }
}

int run_stopping_single(const RunConfig& cfg) {
  const stopping::StoppingBasis basis = stopping::StoppingBasis::synthetic(cfg.basis_dim);
  const stopping::GbmConfig gbm{cfg.sigma, cfg.drift, cfg.window};
  const Rng master(cfg.seed);
  stopping::GbmStream stream(master.split(0).next_u64(), gbm);

  Vector theta = Vector::Zero(basis.dim());
  stopping::GramState gram(basis.dim());
  num::TrackedInverse a_hat(Matrix::Zero(basis.dim(), basis.dim()), {});

  const std::vector<long> grid = snapshot_grid(cfg);
  std::vector<Vector> snapshots;
  std::size_t next_snap = 0;
  Vector x = stream.state();
  for (long n = 1; n <= cfg.steps; ++n) {
    stream.advance();
    const Vector x_next = stream.state();
    if (cfg.algorithm == "q0") {
      stopping::q0_stopping_step(basis, theta, x, x_next,
                                 std::min(1.0, cfg.gain_or_default() / n), cfg.beta);
    } else if (cfg.algorithm == "gq0") {
      stopping::gq0_stopping_step(basis, theta, gram, x, x_next, cfg.beta, cfg.gain_or_default(), cfg.b);
    } else {
      stopping::zap_stopping_step(basis, theta, a_hat, x, x_next, 1.0 / n,
                                  std::pow(static_cast<double>(n), -cfg.rho), cfg.beta);
    }
    x = x_next;
    while (next_snap < grid.size() && grid[next_snap] == n) {
      snapshots.push_back(theta);
      ++next_snap;
    }
  }
  write_theta_csv(cfg, grid, snapshots, /*negate_to_reward=*/false);
  write_manifest(cfg, {"theta.csv"});
  return kExitOk;
}

int run_td_single(const RunConfig& cfg) {
  const mdp::FiniteMDP env = make_env(cfg);
  const mdp::Policy behavior = mdp::Policy::uniform(env);
  const Matrix s = mdp::substitution_matrix(env, behavior);
  td::FiniteChain chain{s * env.kernel, s * env.cost, env.beta,
                        Matrix::Identity(env.n_states, env.n_states)};
  chain.validate();

  Rng rng = Rng(cfg.seed).split(0);
  int x = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(env.n_states)));
  td::TDState td_state = td::make_td_state(chain, Vector::Zero(chain.dim()), cfg.lambda, x);
  td::LstdAccumulator lstd(chain, cfg.lambda, x);

  const std::vector<long> grid = snapshot_grid(cfg);
  std::vector<Vector> snapshots;
  std::size_t next_snap = 0;
  for (long n = 1; n <= cfg.steps; ++n) {
    const int x_next = td::step_chain(chain, x, rng);
    if (cfg.algorithm == "td")
      td::td_lambda_step(td_state, chain, x, x_next, std::min(1.0, cfg.gain_or_default() / n));
    else
      lstd.observe(chain, x, x_next);
    x = x_next;
    while (next_snap < grid.size() && grid[next_snap] == n) {
      if (cfg.algorithm == "td") {
        snapshots.push_back(td_state.theta);
      } else {
        try {
          snapshots.push_back(lstd.solve());
        } catch (const SingularMatrix&) {
          snapshots.push_back(Vector::Zero(chain.dim()));
        }
      }
      ++next_snap;
    }
  }
  write_theta_csv(cfg, grid, snapshots, /*negate_to_reward=*/false);
  write_manifest(cfg, {"theta.csv"});
  return kExitOk;
}

int run_impl(const RunConfig& cfg) {
  if (is_stopping_algo(cfg.algorithm)) return run_stopping_single(cfg);
  if (is_td_algo(cfg.algorithm)) return run_td_single(cfg);

  const mdp::FiniteMDP env = make_env(cfg);
  const qlearn::BehaviorPolicy behavior = qlearn::BehaviorPolicy::uniform(env);
  bench::AlgoSpec algo = bench::AlgoSpec::from_name(cfg.algorithm);
  algo.g = cfg.gain_or_default();
  algo.rho = cfg.rho;
  algo.batch = cfg.batch;
  algo.lambda = cfg.lambda;
  algo.reward_cap = cfg.reward_cap;

  const Vector varpi = cov::stationary_pair_pmf(env, behavior.as_policy());
  const std::vector<long> grid = snapshot_grid(cfg);
  Rng rng = Rng(cfg.seed).split(0);
  Vector theta0(env.d());
  for (Index i = 0; i < theta0.size(); ++i)
    theta0[i] = rng.uniform(cfg.init_low_or_default(), cfg.init_high_or_default());

  const bench::TrajectoryResult result =
      bench::run_trajectory(env, algo, behavior, theta0, cfg.steps, grid, rng, &varpi);

  CsvWriter traj(out_path(cfg, "trajectory.csv"),
                 {"step", "bellman_max", "switch_accumulator", "chat_gap"}, hash_comment(cfg));
  for (std::size_t j = 0; j < result.snapshots.size(); ++j) {
    const double be = mdp::bellman_error(env, result.snapshots[j]).max_abs;
    const bool has_diag = j < result.switch_accumulator.size();
    traj.row_mixed({format_double(static_cast<double>(grid[j])), format_double(be),
                    has_diag ? format_double(result.switch_accumulator[j]) : std::string(),
                    j < result.chat_gap.size() ? format_double(result.chat_gap[j])
                                               : std::string()});
  }
  write_theta_csv(cfg, grid, result.snapshots, /*negate_to_reward=*/true);
  write_manifest(cfg, {"trajectory.csv", "theta.csv"});
  return kExitOk;
}

// --- bench --------------------------------------------------------------------

// One stopping training run; returns the final coefficient vector.
Vector train_stopping(const RunConfig& cfg, const stopping::StoppingBasis& basis,
                      std::uint64_t seed) {
  const stopping::GbmConfig gbm{cfg.sigma, cfg.drift, cfg.window};
  stopping::GbmStream stream(seed, gbm);
  Vector theta = Vector::Zero(basis.dim());
  stopping::GramState gram(basis.dim());
  num::TrackedInverse a_hat(Matrix::Zero(basis.dim(), basis.dim()), {});
  Vector x = stream.state();
  for (long n = 1; n <= cfg.steps; ++n) {
    stream.advance();
    const Vector x_next = stream.state();
    if (cfg.algorithm == "q0")
      stopping::q0_stopping_step(basis, theta, x, x_next,
                                 std::min(1.0, cfg.gain_or_default() / n), cfg.beta);
    else if (cfg.algorithm == "gq0")
      stopping::gq0_stopping_step(basis, theta, gram, x, x_next, cfg.beta,
                                  cfg.gain_or_default(), cfg.b);
    else
      stopping::zap_stopping_step(basis, theta, a_hat, x, x_next, 1.0 / n,
                                  std::pow(static_cast<double>(n), -cfg.rho), cfg.beta);
    x = x_next;
  }
  return theta;
}

// Covariance prediction for the stopping recursions, built from estimated
// quantities: A_hat and the Gram from a frozen-parameter stream, Sigma_Delta
// by batch means of the centered update direction.
cov::CovarianceReport stopping_theory(const RunConfig& cfg, const stopping::StoppingBasis& basis,
                                      const Vector& theta, std::uint64_t seed) {
  const stopping::GbmConfig gbm{cfg.sigma, cfg.drift, cfg.window};
  stopping::GbmStream stream(seed, gbm);
  const long samples = std::max<long>(20000, std::min<long>(cfg.steps, 100000));
  const Index dim = basis.dim();

  Matrix a_mean = Matrix::Zero(dim, dim);
  Matrix gram = Matrix::Zero(dim, dim);
  std::vector<Vector> drifts;
  drifts.reserve(samples);
  Vector drift_mean = Vector::Zero(dim);
  for (long n = 1; n <= samples; ++n) {
    const Vector x = stream.state();
    stream.advance();
    const Vector x_next = stream.state();
    const Vector psi = basis.evaluate(x);
    const Vector psi_next = basis.evaluate(x_next);
    const double r_next = stopping::exercise_reward(x_next);
    const double q_next = psi_next.dot(theta);

    Vector varphi = -psi;
    if (q_next >= r_next) varphi += cfg.beta * psi_next;
    a_mean += (psi * varphi.transpose() - a_mean) / static_cast<double>(n);
    gram += (psi * psi.transpose() - gram) / static_cast<double>(n);

    const Vector f = (cfg.beta * std::max(r_next, q_next) - psi.dot(theta)) * psi;
    drifts.push_back(f);
    drift_mean += (f - drift_mean) / static_cast<double>(n);
  }
  for (Vector& f : drifts) f -= drift_mean;
  const Matrix sigma_delta = cov::sigma_delta_batchmeans(drifts, 100);

  cov::GainSpec gain = cov::GainSpec::optimal();
  if (cfg.algorithm == "q0")
    gain = cov::GainSpec::scalar(cfg.gain_or_default());
  else if (cfg.algorithm == "gq0")
    gain = cov::GainSpec::matrix(
        cfg.gain_or_default() * num::projected_inverse(gram, num::default_projection_epsilon(gram)));
  return cov::asymptotic_cov(a_mean, sigma_delta, gain);
}

int bench_stopping_impl(const RunConfig& cfg) {
  const stopping::StoppingBasis basis = stopping::StoppingBasis::synthetic(cfg.basis_dim);
  const stopping::GbmConfig gbm{cfg.sigma, cfg.drift, cfg.window};
  const Rng master(cfg.seed);

  // Independent training trials feed the batch-means statistics; the
  // ensemble mean is the parameter whose exercise rule gets valued.
  std::vector<Vector> finals(cfg.trials);
  run_indexed(cfg.trials, [&](int trial) {
    finals[trial] = train_stopping(cfg, basis, master.split(2 + trial).next_u64());
  });
  bench::TrialEnsemble ensemble;
  ensemble.snapshot_steps = {cfg.steps};
  ensemble.seed = cfg.seed;
  for (Vector& theta : finals) ensemble.snapshots.push_back({std::move(theta)});
  const bench::BatchMeans bm = bench::batch_means_W(ensemble, cfg.steps);

  Vector theta = Vector::Zero(basis.dim());
  for (const auto& trial : ensemble.snapshots) theta += trial[0];
  theta /= static_cast<double>(cfg.trials);

  std::vector<std::string> w_header = {"trial"};
  for (Index i = 0; i < bm.w.cols(); ++i) w_header.push_back("w" + std::to_string(i));
  CsvWriter w_csv(out_path(cfg, "w_samples.csv"), w_header, hash_comment(cfg));
  for (Index i = 0; i < bm.w.rows(); ++i) {
    std::vector<double> row = {static_cast<double>(i)};
    for (Index k = 0; k < bm.w.cols(); ++k) row.push_back(bm.w(i, k));
    w_csv.row(row);
  }
  std::vector<std::string> c_header;
  for (Index i = 0; i < bm.covariance.cols(); ++i) c_header.push_back("c" + std::to_string(i));
  CsvWriter cov_csv(out_path(cfg, "w_cov.csv"), c_header, hash_comment(cfg));
  for (Index i = 0; i < bm.covariance.rows(); ++i)
    cov_csv.row(std::vector<double>(bm.covariance.row(i).begin(), bm.covariance.row(i).end()));

  const cov::CovarianceReport theory =
      stopping_theory(cfg, basis, theta, master.split(1).next_u64());
  CsvWriter theory_csv(out_path(cfg, "theory.csv"),
                       {"n", "trace_empirical", "trace_theory", "verdict"}, hash_comment(cfg));
  theory_csv.row_mixed({format_double(static_cast<double>(cfg.steps)),
                        format_double(bm.covariance.trace()),
                        theory.sigma_theta ? format_double(theory.sigma_theta->trace())
                                           : std::string(),
                        cov::verdict_name(theory.verdict)});

  const stopping::PolicyValue value = stopping::policy_value_mc(
      basis, theta, cfg.beta, gbm, cfg.n_paths, cfg.horizon, master.split(0).next_u64());

  const bench::Histogram hist = bench::histogram(value.payoffs, cfg.bins);
  CsvWriter hist_csv(out_path(cfg, "reward_hist.csv"), {"bin_lo", "bin_hi", "count"},
                     hash_comment(cfg));
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    hist_csv.row({hist.edges[i], hist.edges[i + 1], static_cast<double>(hist.counts[i])});

  CsvWriter outlier_csv(out_path(cfg, "outliers.csv"), {"threshold", "count"}, hash_comment(cfg));
  for (std::size_t i = 0; i < value.thresholds.size(); ++i)
    outlier_csv.row({value.thresholds[i], static_cast<double>(value.outlier_counts[i])});

  json j;
  j["config_hash"] = cfg.hash();
  j["mean_reward"] = value.mean;
  j["theta"] = std::vector<double>(theta.begin(), theta.end());
  std::ofstream out(out_path(cfg, "value.json"), std::ios::binary);
  out << j.dump(2) << "\n";

  write_manifest(cfg, {"w_samples.csv", "w_cov.csv", "theory.csv", "reward_hist.csv",
                       "outliers.csv", "value.json"});
  return kExitOk;
}

int bench_impl(const RunConfig& cfg) {
  if (cfg.env == "stopping" || is_stopping_algo(cfg.algorithm)) return bench_stopping_impl(cfg);

  const mdp::FiniteMDP env = make_env(cfg);
  const qlearn::BehaviorPolicy behavior = qlearn::BehaviorPolicy::uniform(env);
  bench::AlgoSpec algo = bench::AlgoSpec::from_name(cfg.algorithm);
  algo.g = cfg.gain_or_default();
  algo.rho = cfg.rho;
  algo.batch = cfg.batch;
  algo.lambda = cfg.lambda;
  algo.reward_cap = cfg.reward_cap;

  const std::vector<long> grid = snapshot_grid(cfg);
  const bench::InitBox init{cfg.init_low_or_default(), cfg.init_high_or_default()};
  const bench::TrialEnsemble ensemble =
      bench::run_trials(env, algo, behavior, cfg.trials, cfg.steps, grid, cfg.seed, init);

  const bench::ErrorBands bands = bench::bellman_error_track(ensemble, env);
  CsvWriter bands_csv(out_path(cfg, "bellman_bands.csv"), {"step", "mean", "lo", "hi"},
                      hash_comment(cfg));
  for (std::size_t j = 0; j < bands.steps.size(); ++j)
    bands_csv.row({static_cast<double>(bands.steps[j]), bands.mean[j],
                   bands.mean[j] - bands.half_width[j], bands.mean[j] + bands.half_width[j]});

  const long n_report = grid.back();
  const bench::BatchMeans bm = bench::batch_means_W(ensemble, n_report);

  std::vector<std::string> w_header = {"trial"};
  for (Index i = 0; i < bm.w.cols(); ++i) w_header.push_back("w" + std::to_string(i));
  CsvWriter w_csv(out_path(cfg, "w_samples.csv"), w_header, hash_comment(cfg));
  for (Index i = 0; i < bm.w.rows(); ++i) {
    std::vector<double> row = {static_cast<double>(i)};
    for (Index k = 0; k < bm.w.cols(); ++k) row.push_back(bm.w(i, k));
    w_csv.row(row);
  }

  std::vector<std::string> c_header;
  for (Index i = 0; i < bm.covariance.cols(); ++i) c_header.push_back("c" + std::to_string(i));
  CsvWriter cov_csv(out_path(cfg, "w_cov.csv"), c_header, hash_comment(cfg));
  for (Index i = 0; i < bm.covariance.rows(); ++i)
    cov_csv.row(std::vector<double>(bm.covariance.row(i).begin(), bm.covariance.row(i).end()));

  CsvWriter hist_csv(out_path(cfg, "w_hist.csv"), {"entry", "bin_lo", "bin_hi", "count"},
                     hash_comment(cfg));
  for (Index k = 0; k < bm.w.cols(); ++k) {
    std::vector<double> column(bm.w.rows());
    for (Index i = 0; i < bm.w.rows(); ++i) column[i] = bm.w(i, k);
    const bench::Histogram h = bench::histogram(column, cfg.bins);
    for (std::size_t bin = 0; bin < h.counts.size(); ++bin)
      hist_csv.row({static_cast<double>(k), h.edges[bin], h.edges[bin + 1],
                    static_cast<double>(h.counts[bin])});
  }

  // Theory column: the Lyapunov/optimal prediction where SA theory applies.
  std::string trace_theory, verdict = "none";
  if (algo.kind == bench::AlgoSpec::Kind::Zap || algo.kind == bench::AlgoSpec::Kind::ZapSingle ||
      algo.kind == bench::AlgoSpec::Kind::OdZap || algo.kind == bench::AlgoSpec::Kind::Watkins ||
      algo.kind == bench::AlgoSpec::Kind::WatkinsScaled) {
    const mdp::Policy uniform = behavior.as_policy();
    const Matrix a = cov::linearization_A(env, uniform);
    const Matrix sigma_delta = cov::sigma_delta_tabular(env, uniform);
    const bool optimal_gain = algo.kind != bench::AlgoSpec::Kind::Watkins &&
                              algo.kind != bench::AlgoSpec::Kind::WatkinsScaled;
    const cov::GainSpec gain = optimal_gain
                                   ? cov::GainSpec::optimal()
                                   : cov::GainSpec::scalar(
                                         algo.kind == bench::AlgoSpec::Kind::Watkins ? 1.0
                                                                                     : algo.g);
    const cov::CovarianceReport report = cov::asymptotic_cov(a, sigma_delta, gain);
    verdict = cov::verdict_name(report.verdict);
    if (report.sigma_theta) trace_theory = format_double(report.sigma_theta->trace());
  }
  CsvWriter theory_csv(out_path(cfg, "theory.csv"),
                       {"n", "trace_empirical", "trace_theory", "verdict"}, hash_comment(cfg));
  theory_csv.row_mixed({format_double(static_cast<double>(n_report)),
                        format_double(bm.covariance.trace()), trace_theory, verdict});

  write_manifest(cfg, {"bellman_bands.csv", "w_samples.csv", "w_cov.csv", "w_hist.csv",
                       "theory.csv"});
  return kExitOk;
}

}  // namespace

int run_solve(const config::RunConfig& cfg) { return solve_impl(cfg); }
int run_cov(const config::RunConfig& cfg) { return cov_impl(cfg); }
int run_single(const config::RunConfig& cfg) { return run_impl(cfg); }
int run_bench(const config::RunConfig& cfg) { return bench_impl(cfg); }

int main_entry(const std::vector<std::string>& args) {
  try {
    if (args.empty()) throw ConfigError("usage: zapsa <solve|cov|run|bench> [options]");
    const std::string command = args[0];

    config::RunConfig cfg;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
      const std::string& arg = args[i];
      if (arg.rfind("--", 0) != 0) throw ConfigError("unexpected argument: " + arg);
      std::string key, value;
      const auto eq = arg.find('=');
      if (eq != std::string::npos) {
        key = arg.substr(2, eq - 2);
        value = arg.substr(eq + 1);
      } else {
        key = arg.substr(2);
        if (i + 1 >= args.size()) throw ConfigError("flag --" + key + " needs a value");
        value = args[++i];
      }
      if (key == "config")
        config_path = value;
      else if (key == "out")
        overrides.emplace_back("out_dir", value);
      else if (key == "algo")
        overrides.emplace_back("algorithm", value);
      else if (key == "gain")
        overrides.emplace_back("g", value);
      else
        overrides.emplace_back(key, value);
    }
    if (!config_path.empty()) cfg = config::load_config_file(config_path);
    for (const auto& [key, value] : overrides) config::apply_override(cfg, key, value);
    config::validate(cfg);

    if (command == "solve") return run_solve(cfg);
    if (command == "cov") return run_cov(cfg);
    if (command == "run") return run_single(cfg);
    if (command == "bench") return run_bench(cfg);
    throw ConfigError("unknown command: " + command);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace zapsa::cli
