#include "zapsa/bench.hpp"

#include <algorithm>
#include <cmath>

#include "zapsa/threads.hpp"

namespace zapsa::bench {

AlgoSpec AlgoSpec::from_name(const std::string& name) {
  AlgoSpec spec;
  if (name == "watkins")
    spec.kind = Kind::Watkins;
  else if (name == "watkins_scaled")
    spec.kind = Kind::WatkinsScaled;
  else if (name == "watkins_poly")
    spec.kind = Kind::WatkinsPoly;
  else if (name == "rpj")
    spec.kind = Kind::Rpj;
  else if (name == "speedy")
    spec.kind = Kind::Speedy;
  else if (name == "zap")
    spec.kind = Kind::Zap;
  else if (name == "zap_single")
    spec.kind = Kind::ZapSingle;
  else if (name == "od_zap")
    spec.kind = Kind::OdZap;
  else
    throw ConfigError("unknown algorithm: " + name);
  return spec;
}

std::string AlgoSpec::name() const {
  switch (kind) {
    case Kind::Watkins: return "watkins";
    case Kind::WatkinsScaled: return "watkins_scaled";
    case Kind::WatkinsPoly: return "watkins_poly";
    case Kind::Rpj: return "rpj";
    case Kind::Speedy: return "speedy";
    case Kind::Zap: return "zap";
    case Kind::ZapSingle: return "zap_single";
    case Kind::OdZap: return "od_zap";
  }
  return "?";
}

namespace {

std::optional<qlearn::ProjectionBox> box_of(const AlgoSpec& algo) {
  if (!algo.reward_cap) return std::nullopt;
  return qlearn::ProjectionBox::reward_cap(*algo.reward_cap);
}

}  // namespace

TrajectoryResult run_trajectory(const mdp::FiniteMDP& m, const AlgoSpec& algo,
                                const qlearn::BehaviorPolicy& behavior, Vector theta0,
                                long steps, std::span<const long> snapshot_steps, Rng rng,
                                const Vector* varpi) {
  TrajectoryResult out;
  out.snapshots.reserve(snapshot_steps.size());

  const Matrix basis = Matrix::Identity(m.d(), m.d());
  const auto box = box_of(algo);
  const bool zap_kind = algo.kind == AlgoSpec::Kind::Zap ||
                        algo.kind == AlgoSpec::Kind::ZapSingle ||
                        algo.kind == AlgoSpec::Kind::OdZap;

  int x = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(m.n_states)));
  int u = behavior.sample_action(m, x, rng);

  Vector theta = std::move(theta0);
  qlearn::SpeedyState speedy = qlearn::make_speedy_state(m, theta);
  qlearn::RpjState rpj{theta, theta, 0};
  qlearn::ZapQState zap = qlearn::make_zap_q_state(m, basis, theta, x, u);

  std::vector<qlearn::Transition> batch;
  batch.reserve(static_cast<std::size_t>(std::max(algo.batch, 1)));
  long od_updates = 0;
  double od_gamma_keep = 1.0;

  std::size_t next_snap = 0;
  const auto record = [&](long n) {
    while (next_snap < snapshot_steps.size() && snapshot_steps[next_snap] == n) {
      const Vector& reported = algo.kind == AlgoSpec::Kind::Rpj ? rpj.theta_bar
                               : zap_kind                       ? zap.theta
                               : algo.kind == AlgoSpec::Kind::Speedy ? speedy.theta
                                                                     : theta;
      out.snapshots.push_back(reported);
      if (zap_kind) {
        out.switch_accumulator.push_back(zap.switch_accumulator);
        if (varpi) {
          const Vector chat = qlearn::c_hat(*varpi, zap.gain.matrix(), zap.theta);
          out.chat_gap.push_back((chat - m.cost).cwiseAbs().maxCoeff());
        }
      }
      ++next_snap;
    }
  };

  for (long n = 1; n <= steps; ++n) {
    const qlearn::Transition t = qlearn::sample_transition(m, behavior, x, u, rng);
    const double nd = static_cast<double>(n);
    switch (algo.kind) {
      case AlgoSpec::Kind::Watkins:
        qlearn::watkins_step(m, theta, t, std::min(1.0, 1.0 / nd), box);
        break;
      case AlgoSpec::Kind::WatkinsScaled:
        qlearn::watkins_step(m, theta, t, std::min(1.0, algo.g / nd), box);
        break;
      case AlgoSpec::Kind::WatkinsPoly:
        qlearn::watkins_step(m, theta, t, std::pow(nd, -0.6), box);
        break;
      case AlgoSpec::Kind::Rpj:
        qlearn::rpj_q_step(m, rpj, t, box);
        break;
      case AlgoSpec::Kind::Speedy:
        qlearn::speedy_q_step(m, speedy, t, box);
        break;
      case AlgoSpec::Kind::Zap:
        qlearn::zap_q_lambda_step(m, basis, zap, t, 1.0 / nd, std::pow(nd, -algo.rho),
                                  algo.lambda);
        break;
      case AlgoSpec::Kind::ZapSingle:
        qlearn::zap_q_lambda_step(m, basis, zap, t, 1.0 / nd, 1.0 / nd, algo.lambda);
        break;
      case AlgoSpec::Kind::OdZap: {
        batch.push_back(t);
        od_gamma_keep *= (1.0 - std::pow(nd, -algo.rho));
        if (static_cast<int>(batch.size()) == algo.batch || n == steps) {
          ++od_updates;
          qlearn::od_zap_q_step(m, basis, zap, batch, 1.0 / static_cast<double>(od_updates),
                                1.0 - od_gamma_keep);
          batch.clear();
          od_gamma_keep = 1.0;
        }
        break;
      }
    }
    record(n);
  }
  return out;
}

Index TrialEnsemble::grid_index(long n) const {
  const auto it = std::find(snapshot_steps.begin(), snapshot_steps.end(), n);
  if (it == snapshot_steps.end())
    throw SnapshotMissing("no snapshot recorded at step " + std::to_string(n));
  return static_cast<Index>(it - snapshot_steps.begin());
}

TrialEnsemble run_trials(const mdp::FiniteMDP& m, const AlgoSpec& algo,
                         const qlearn::BehaviorPolicy& behavior, int n_trials, long steps,
                         std::vector<long> snapshot_steps, std::uint64_t seed, InitBox init) {
  if (n_trials < 2) throw ConfigError("run_trials: need at least two trials");
  if (!(init.low <= init.high)) throw ConfigError("run_trials: empty initialization box");
  std::sort(snapshot_steps.begin(), snapshot_steps.end());
  for (long s : snapshot_steps)
    if (s < 1 || s > steps) throw ConfigError("run_trials: snapshot outside 1..steps");

  TrialEnsemble ensemble;
  ensemble.snapshot_steps = snapshot_steps;
  ensemble.snapshots.resize(n_trials);
  ensemble.seed = seed;

  const Rng master(seed);
  run_indexed(n_trials, [&](int trial) {
    Rng rng = master.split(static_cast<std::uint64_t>(trial));
    Vector theta0(m.d());
    for (Index i = 0; i < theta0.size(); ++i) theta0[i] = rng.uniform(init.low, init.high);
    ensemble.snapshots[trial] =
        run_trajectory(m, algo, behavior, std::move(theta0), steps, snapshot_steps, rng)
            .snapshots;
  });
  return ensemble;
}

BatchMeans batch_means_W(const TrialEnsemble& ensemble, long n) {
  const Index grid = ensemble.grid_index(n);
  const int trials = ensemble.n_trials();
  const Index d = ensemble.snapshots[0][grid].size();

  Vector mean = Vector::Zero(d);
  for (int i = 0; i < trials; ++i) mean += ensemble.snapshots[i][grid];
  mean /= static_cast<double>(trials);

  BatchMeans result;
  result.w.resize(trials, d);
  const double scale = std::sqrt(static_cast<double>(n));
  for (int i = 0; i < trials; ++i)
    result.w.row(i) = scale * (ensemble.snapshots[i][grid] - mean).transpose();
  result.covariance = result.w.transpose() * result.w / static_cast<double>(trials - 1);
  return result;
}

ErrorBands bellman_error_track(const TrialEnsemble& ensemble, const mdp::FiniteMDP& m) {
  const int trials = ensemble.n_trials();
  const Index grid = static_cast<Index>(ensemble.snapshot_steps.size());
  ErrorBands bands;
  bands.steps = ensemble.snapshot_steps;
  bands.per_trial.resize(trials, grid);
  for (int i = 0; i < trials; ++i)
    for (Index j = 0; j < grid; ++j)
      bands.per_trial(i, j) = mdp::bellman_error(m, ensemble.snapshots[i][j]).max_abs;

  bands.mean = bands.per_trial.colwise().mean();
  bands.half_width = Vector::Zero(grid);
  if (trials > 1) {
    for (Index j = 0; j < grid; ++j) {
      const double var =
          (bands.per_trial.col(j).array() - bands.mean[j]).square().sum() /
          static_cast<double>(trials - 1);
      bands.half_width[j] = 2.0 * std::sqrt(var);
    }
  }
  return bands;
}

Histogram histogram(std::span<const double> values, int bins,
                    std::optional<std::pair<double, double>> range) {
  if (values.empty()) throw InsufficientData("histogram: no values");
  if (bins < 1) throw ConfigError("histogram: need at least one bin");
  double lo, hi;
  if (range) {
    lo = range->first;
    hi = range->second;
  } else {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  if (!(hi > lo)) hi = lo + 1.0;

  Histogram h;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (double v : values) {
    int bin = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    bin = std::clamp(bin, 0, bins - 1);
    ++h.counts[bin];
  }
  return h;
}

}  // namespace zapsa::bench
