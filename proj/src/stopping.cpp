#include "zapsa/stopping.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <thread>

#include "zapsa/threads.hpp"

namespace zapsa::stopping {

GbmStream::GbmStream(std::uint64_t seed, GbmConfig config) : config_(config), rng_(seed) {
  if (!(config_.sigma > 0)) throw ConfigError("GbmStream: sigma must be positive");
  if (config_.window < 1) throw ConfigError("GbmStream: window must be >= 1");
  log_prices_.assign(static_cast<std::size_t>(config_.window) + 1, 0.0);
}

Vector GbmStream::state() const {
  const int w = config_.window;
  Vector x(w);
  const double base = log_prices_[head_];
  for (int i = 1; i <= w; ++i)
    x[i - 1] = std::exp(log_prices_[(head_ + i) % log_prices_.size()] - base);
  return x;
}

void GbmStream::advance() {
  const double latest = log_prices_[(head_ + config_.window) % log_prices_.size()];
  log_prices_[head_] = latest + config_.drift + config_.sigma * rng_.normal();
  head_ = (head_ + 1) % log_prices_.size();
}

StoppingBasis StoppingBasis::synthetic(int dim) {
  if (dim < 1 || dim > 10) throw ConfigError("StoppingBasis: dim must lie in [1,10]");
  return StoppingBasis(dim);
}

std::vector<std::string> StoppingBasis::names() const {
  static const std::vector<std::string> all = {
      "const", "terminal", "terminal_sq", "mid", "mean",
      "min",   "max",      "std",         "quarter", "mid_sq"};
  return {all.begin(), all.begin() + dim_};
}

Vector StoppingBasis::evaluate(const Vector& x) const {
  const Index w = x.size();
  const double terminal = x[w - 1];
  const double mid = x[std::max<Index>(w / 2, 1) - 1];
  const double quarter = x[std::max<Index>(w / 4, 1) - 1];
  const double mean = x.mean();
  Vector psi(dim_);
  for (int i = 0; i < dim_; ++i) {
    switch (i) {
      case 0: psi[i] = 1.0; break;
      case 1: psi[i] = terminal; break;
      case 2: psi[i] = terminal * terminal; break;
      case 3: psi[i] = mid; break;
      case 4: psi[i] = mean; break;
      case 5: psi[i] = x.minCoeff(); break;
      case 6: psi[i] = x.maxCoeff(); break;
      case 7: psi[i] = std::sqrt((x.array() - mean).square().sum() /
                                 static_cast<double>(std::max<Index>(w - 1, 1))); break;
      case 8: psi[i] = quarter; break;
      case 9: psi[i] = mid * mid; break;
    }
  }
  return psi;
}

double StoppingBasis::gram_condition(const StoppingBasis& basis, GbmStream& stream,
                                     int samples) {
  Matrix gram = Matrix::Zero(basis.dim(), basis.dim());
  for (int i = 0; i < samples; ++i) {
    stream.advance();
    const Vector psi = basis.evaluate(stream.state());
    gram += psi * psi.transpose();
  }
  gram /= static_cast<double>(samples);
  Eigen::JacobiSVD<Matrix> svd(gram);
  return svd.singularValues()[0] / svd.singularValues()[basis.dim() - 1];
}

namespace {

double q_of(const StoppingBasis& basis, const Vector& theta, const Vector& x) {
  return basis.evaluate(x).dot(theta);
}

}  // namespace

void q0_stopping_step(const StoppingBasis& basis, Vector& theta, const Vector& x,
                      const Vector& x_next, double alpha, double beta) {
  const Vector psi = basis.evaluate(x);
  const double target = beta * std::max(exercise_reward(x_next), q_of(basis, theta, x_next));
  theta += alpha * (target - psi.dot(theta)) * psi;
}

void gq0_stopping_step(const StoppingBasis& basis, Vector& theta, GramState& gram,
                       const Vector& x, const Vector& x_next, double beta, double g, double b) {
  const Vector psi = basis.evaluate(x);
  gram.sum += psi * psi.transpose();
  ++gram.n;
  const Matrix gram_mean = gram.mean();
  const Matrix gain =
      g * num::projected_inverse(gram_mean, num::default_projection_epsilon(gram_mean));
  const double alpha = 1.0 / (b + static_cast<double>(gram.n));
  const double target = beta * std::max(exercise_reward(x_next), q_of(basis, theta, x_next));
  theta += alpha * (target - psi.dot(theta)) * (gain * psi);
}

void zap_stopping_step(const StoppingBasis& basis, Vector& theta, num::TrackedInverse& a_hat,
                       const Vector& x, const Vector& x_next, double alpha, double gamma,
                       double beta) {
  const Vector psi = basis.evaluate(x);
  const Vector psi_next = basis.evaluate(x_next);
  const double q_next = psi_next.dot(theta);
  const double reward_next = exercise_reward(x_next);

  Vector varphi = -psi;
  if (q_next >= reward_next) varphi += beta * psi_next;
  a_hat.rank1_update(psi, varphi, gamma);

  const double d = beta * std::max(reward_next, q_next) - psi.dot(theta);
  theta -= alpha * d * (a_hat.inverse() * psi);
}

PolicyValue policy_value_mc(const StoppingBasis& basis, const Vector& theta, double beta,
                            const GbmConfig& config, int n_paths, int horizon,
                            std::uint64_t seed, std::vector<double> thresholds) {
  if (n_paths < 1) throw ConfigError("policy_value_mc: need at least one path");
  if (horizon < 0) throw ConfigError("policy_value_mc: horizon must be >= 0");

  PolicyValue result;
  result.payoffs.assign(n_paths, 0.0);
  result.path_max_reward.assign(n_paths, 0.0);
  result.thresholds = std::move(thresholds);

  const Rng master(seed);
  run_indexed(n_paths, [&](int p) {
    GbmStream stream(master.split(static_cast<std::uint64_t>(p)).next_u64(), config);
    double payoff = 0.0;
    double max_reward = 0.0;
    for (int n = 0;; ++n) {
      const Vector x = stream.state();
      const double r = exercise_reward(x);
      max_reward = std::max(max_reward, r);
      if (q_of(basis, theta, x) <= r || n == horizon) {
        payoff = std::pow(beta, n) * r;
        break;
      }
      stream.advance();
    }
    result.payoffs[p] = payoff;
    result.path_max_reward[p] = max_reward;
  });

  result.mean = 0.0;
  for (double v : result.payoffs) result.mean += v;
  result.mean /= static_cast<double>(n_paths);
  result.outlier_counts.assign(result.thresholds.size(), 0);
  for (double v : result.payoffs)
    for (std::size_t i = 0; i < result.thresholds.size(); ++i)
      if (v < result.thresholds[i]) ++result.outlier_counts[i];
  return result;
}

}  // namespace zapsa::stopping
