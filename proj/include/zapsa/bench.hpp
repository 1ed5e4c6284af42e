#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zapsa/common.hpp"
#include "zapsa/mdp.hpp"
#include "zapsa/qlearn.hpp"
#include "zapsa/rng.hpp"

namespace zapsa::bench {

struct AlgoSpec {
  enum class Kind { Watkins, WatkinsScaled, WatkinsPoly, Rpj, Speedy, Zap, ZapSingle, OdZap };
  Kind kind = Kind::Zap;
  double g = 1.0;          // scalar gain for watkins_scaled
  double rho = 0.85;       // gamma_n = n^-rho for the two-time-scale kinds
  int batch = 100;         // O(d) batch length
  double lambda = 0.0;
  std::optional<double> reward_cap;  // per-entry projection to (-inf, cap] in reward units

  static AlgoSpec from_name(const std::string& name);
  std::string name() const;
};

// Per-entry uniform initialization box for theta_0 (cost units; the default
// experiment boxes are symmetric so the sign convention does not matter).
struct InitBox {
  double low = -1e3;
  double high = 1e3;
};

struct TrajectoryResult {
  std::vector<Vector> snapshots;         // reported estimate at each grid point
  std::vector<double> switch_accumulator;  // zap kinds; empty otherwise
  std::vector<double> chat_gap;            // sup|C_hat - c| at grid; needs varpi
};

// Runs one seeded trajectory of `algo` under the behavior policy, recording
// the reported estimate at each snapshot step (RPJ reports the running
// average). `varpi` enables the C_hat diagnostic for the zap kinds.
TrajectoryResult run_trajectory(const mdp::FiniteMDP& m, const AlgoSpec& algo,
                                const qlearn::BehaviorPolicy& behavior, Vector theta0,
                                long steps, std::span<const long> snapshot_steps, Rng rng,
                                const Vector* varpi = nullptr);

struct TrialEnsemble {
  std::vector<long> snapshot_steps;
  std::vector<std::vector<Vector>> snapshots;  // [trial][grid index]
  std::uint64_t seed = 0;

  int n_trials() const { return static_cast<int>(snapshots.size()); }
  Index grid_index(long n) const;  // throws SnapshotMissing
};

// N independent trials with split seeds and i.i.d. uniform theta_0; trials
// run in a worker pool and land in trial-index order.
TrialEnsemble run_trials(const mdp::FiniteMDP& m, const AlgoSpec& algo,
                         const qlearn::BehaviorPolicy& behavior, int n_trials, long steps,
                         std::vector<long> snapshot_steps, std::uint64_t seed, InitBox init);

struct BatchMeans {
  Matrix w;           // N x d, rows sqrt(n) (theta_n^i - mean)
  Matrix covariance;  // d x d sample covariance (divisor N-1)
};
BatchMeans batch_means_W(const TrialEnsemble& ensemble, long n);

struct ErrorBands {
  std::vector<long> steps;
  Matrix per_trial;   // N x grid, max Bellman error
  Vector mean;        // per grid point
  Vector half_width;  // 2 sigma
};
ErrorBands bellman_error_track(const TrialEnsemble& ensemble, const mdp::FiniteMDP& m);

struct Histogram {
  Vector edges;               // bins+1
  std::vector<long> counts;   // bins; sums to the sample size
};
// Values outside an explicit range are folded into the end bins so counts
// always total the sample size.
Histogram histogram(std::span<const double> values, int bins,
                    std::optional<std::pair<double, double>> range = {});

}  // namespace zapsa::bench
