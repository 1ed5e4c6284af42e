#include "zapsa/td.hpp"

#include <cmath>

namespace zapsa::td {

void FiniteChain::validate() const {
  if (P.rows() != P.cols() || P.rows() < 1) throw ConfigError("FiniteChain: P must be square");
  if (cost.size() != P.rows() || basis.rows() != P.rows())
    throw ConfigError("FiniteChain: cost/basis size mismatch");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("FiniteChain: beta must lie in [0,1)");
  for (Index i = 0; i < P.rows(); ++i)
    if (std::abs(P.row(i).sum() - 1.0) > 1e-10)
      throw NotStochastic("FiniteChain: row " + std::to_string(i) + " does not sum to 1");
}

int step_chain(const FiniteChain& chain, int x, Rng& rng) {
  const double roll = rng.uniform();
  double acc = 0.0;
  for (Index y = 0; y < chain.n_states(); ++y) {
    acc += chain.P(x, y);
    if (roll < acc) return static_cast<int>(y);
  }
  return static_cast<int>(chain.n_states() - 1);
}

TDState make_td_state(const FiniteChain& chain, Vector theta0, double lambda, int x0) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("TDState: lambda must lie in [0,1]");
  return TDState{std::move(theta0), chain.basis.row(x0).transpose(), lambda};
}

void td_lambda_step(TDState& state, const FiniteChain& chain, int x, int x_next, double alpha) {
  const Vector psi = chain.basis.row(x).transpose();
  const Vector psi_next = chain.basis.row(x_next).transpose();
  const double d = chain.cost[x] + (chain.beta * psi_next - psi).dot(state.theta);
  state.theta += alpha * d * state.zeta;
  state.zeta = state.lambda * chain.beta * state.zeta + psi_next;
}

sa::LinearSample td_sample(const FiniteChain& chain, const Vector& zeta, int x, int x_next) {
  const Vector psi = chain.basis.row(x).transpose();
  const Vector psi_next = chain.basis.row(x_next).transpose();
  const Vector v = chain.beta * psi_next - psi;
  sa::LinearSample s;
  s.A = zeta * v.transpose();
  s.b = -chain.cost[x] * zeta;
  s.rank1 = std::make_pair(zeta, v);
  return s;
}

SnrTdState make_snr_td_state(const FiniteChain& chain, Vector theta0, double lambda, int x0,
                             Matrix a0, num::TrackedInverse::Options options) {
  return SnrTdState{make_td_state(chain, std::move(theta0), lambda, x0),
                    num::TrackedInverse(std::move(a0), options), 0};
}

void snr_td_step(SnrTdState& state, const FiniteChain& chain, int x, int x_next, double alpha) {
  const Vector psi = chain.basis.row(x).transpose();
  const Vector psi_next = chain.basis.row(x_next).transpose();
  const Vector v = chain.beta * psi_next - psi;
  const double d = chain.cost[x] + v.dot(state.td.theta);
  state.a_hat.rank1_update(state.td.zeta, v, alpha);
  state.td.theta -= alpha * d * (state.a_hat.inverse() * state.td.zeta);
  state.td.zeta = state.td.lambda * chain.beta * state.td.zeta + psi_next;
  ++state.n;
}

LstdAccumulator::LstdAccumulator(const FiniteChain& chain, double lambda, int x0)
    : zeta_(chain.basis.row(x0).transpose()),
      a_sum_(Matrix::Zero(chain.dim(), chain.dim())),
      b_sum_(Vector::Zero(chain.dim())) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ConfigError("LstdAccumulator: lambda must lie in [0,1]");
  lambda_beta_ = lambda * chain.beta;
}

void LstdAccumulator::observe(const FiniteChain& chain, int x, int x_next) {
  const Vector psi = chain.basis.row(x).transpose();
  const Vector psi_next = chain.basis.row(x_next).transpose();
  a_sum_ += zeta_ * (chain.beta * psi_next - psi).transpose();
  b_sum_ += chain.cost[x] * zeta_;
  zeta_ = lambda_beta_ * zeta_ + psi_next;
  ++n_;
}

Vector LstdAccumulator::solve() const {
  if (n_ < 1) throw InsufficientData("LstdAccumulator: no observations");
  Eigen::FullPivLU<Matrix> lu(a_mean());
  if (!lu.isInvertible()) throw SingularMatrix("LstdAccumulator: averaged matrix is singular");
  return lu.solve(-b_mean());
}

Matrix LstdAccumulator::a_mean() const { return a_sum_ / static_cast<double>(std::max<long>(n_, 1)); }

Vector LstdAccumulator::b_mean() const { return b_sum_ / static_cast<double>(std::max<long>(n_, 1)); }

}  // namespace zapsa::td
