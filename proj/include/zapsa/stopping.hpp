#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zapsa/common.hpp"
#include "zapsa/numerics.hpp"
#include "zapsa/rng.hpp"

namespace zapsa::stopping {

struct GbmConfig {
  double sigma = 0.02;    // log-return volatility per step
  double drift = 0.0004;  // log-return drift per step
  int window = 100;
};

// Sliding window of price ratios driven by a geometric Brownian motion:
// state(i) = p_{n-w+i} / p_{n-w}, i = 1..w, so the last entry is the
// exercise reward r(x) = p_n / p_{n-w}.
class GbmStream {
 public:
  GbmStream(std::uint64_t seed, GbmConfig config = {});

  const GbmConfig& config() const { return config_; }
  Vector state() const;
  void advance();

 private:
  GbmConfig config_;
  Rng rng_;
  std::vector<double> log_prices_;  // ring buffer, window+1 entries
  std::size_t head_ = 0;            // index of the oldest price p_{n-w}
};

inline double exercise_reward(const Vector& state) { return state[state.size() - 1]; }

// Synthetic feature family on the ratio window (constant, terminal ratio and
// its square, window statistics). The first `dim` features of the family are
// used; dim <= 10.
class StoppingBasis {
 public:
  static StoppingBasis synthetic(int dim = 10);

  int dim() const { return dim_; }
  Vector evaluate(const Vector& state) const;
  std::vector<std::string> names() const;

  // Condition number of the empirical Gram E[psi psi^T] on a stream probe.
  static double gram_condition(const StoppingBasis& basis, GbmStream& stream, int samples);

 private:
  explicit StoppingBasis(int dim) : dim_(dim) {}
  int dim_ = 10;
};

// theta += alpha psi(x) [beta max(r(x'), Q(x')) - Q(x)].
void q0_stopping_step(const StoppingBasis& basis, Vector& theta, const Vector& x,
                      const Vector& x_next, double alpha, double beta);

struct GramState {
  Matrix sum;
  long n = 0;
  explicit GramState(int dim) : sum(Matrix::Zero(dim, dim)) {}
  Matrix mean() const { return sum / static_cast<double>(std::max<long>(n, 1)); }
};

// Matrix-gain variant: G_n = g [(1/n) sum psi psi^T]^-1 (projected inverse),
// alpha_n = 1/(b+n). Defaults g=100, b=1e4.
void gq0_stopping_step(const StoppingBasis& basis, Vector& theta, GramState& gram,
                       const Vector& x, const Vector& x_next, double beta, double g = 100.0,
                       double b = 1e4);

// Two-time-scale update with Jacobian samples
// A_{n+1} = psi(x) [beta psi(x') 1{Q(x') >= r(x')} - psi(x)]^T.
void zap_stopping_step(const StoppingBasis& basis, Vector& theta, num::TrackedInverse& a_hat,
                       const Vector& x, const Vector& x_next, double alpha, double gamma,
                       double beta);

struct PolicyValue {
  double mean;
  std::vector<double> payoffs;          // one per path
  std::vector<double> path_max_reward;  // sup of r along each path
  std::vector<double> thresholds;       // outlier cutoffs
  std::vector<long> outlier_counts;     // payoffs strictly below each cutoff
};

// Monte-Carlo value of the exercise rule tau = min{n : Q(x_n) <= r(x_n)}
// (exercise on ties), with payoff beta^tau r(x_tau); paths that never stop
// are truncated at the horizon with payoff beta^H r(x_H). Paths use split
// seeds and run in a worker pool keyed by path index.
PolicyValue policy_value_mc(const StoppingBasis& basis, const Vector& theta, double beta,
                            const GbmConfig& config, int n_paths, int horizon,
                            std::uint64_t seed,
                            std::vector<double> thresholds = {1.0, 0.95, 0.75, 0.5});

}  // namespace zapsa::stopping
