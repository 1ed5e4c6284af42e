#pragma once

#include "zapsa/common.hpp"
#include "zapsa/numerics.hpp"
#include "zapsa/rng.hpp"
#include "zapsa/sa.hpp"

namespace zapsa::td {

// Uncontrolled finite chain with a linear function class: basis row x holds
// psi(x)^T.
struct FiniteChain {
  Matrix P;      // n x n, row stochastic
  Vector cost;   // per state
  double beta = 0.0;
  Matrix basis;  // n x d

  Index n_states() const { return P.rows(); }
  Index dim() const { return basis.cols(); }
  void validate() const;
};

int step_chain(const FiniteChain& chain, int x, Rng& rng);

struct TDState {
  Vector theta;
  Vector zeta;
  double lambda = 0.0;
};

// zeta_0 = psi(X_0).
TDState make_td_state(const FiniteChain& chain, Vector theta0, double lambda, int x0);

// d = c(x) + (beta psi(x') - psi(x))^T theta; theta += alpha zeta d;
// zeta <- lambda beta zeta + psi(x').
void td_lambda_step(TDState& state, const FiniteChain& chain, int x, int x_next, double alpha);

// TD(lambda) expressed as a linear-SA sample: A = zeta (beta psi' - psi)^T,
// b = -zeta c(x).
sa::LinearSample td_sample(const FiniteChain& chain, const Vector& zeta, int x, int x_next);

struct SnrTdState {
  TDState td;
  num::TrackedInverse a_hat;
  long n = 0;
};

SnrTdState make_snr_td_state(const FiniteChain& chain, Vector theta0, double lambda, int x0,
                             Matrix a0, num::TrackedInverse::Options options = num::TrackedInverse::Options());

// Matrix-gain TD: A_hat absorbs the sample first, then
// theta <- theta - alpha A_hat^-1 zeta d.
void snr_td_step(SnrTdState& state, const FiniteChain& chain, int x, int x_next, double alpha);

// Running least-squares estimates theta_n = M_n^-1 b_n with
// M_n = (1/n) sum zeta_{i-1} (psi(X_{i-1}) - beta psi(X_i))^T and
// b_n = (1/n) sum zeta_{i-1} c(X_{i-1}); inversion happens lazily at
// requested checkpoints.
class LstdAccumulator {
 public:
  LstdAccumulator(const FiniteChain& chain, double lambda, int x0);

  void observe(const FiniteChain& chain, int x, int x_next);

  // Throws SingularMatrix when the averaged matrix is not invertible.
  Vector solve() const;

  // Mean of the signed samples zeta (beta psi' - psi)^T, matching the
  // linear-SA convention.
  Matrix a_mean() const;
  Vector b_mean() const;  // mean of zeta c(x)
  long count() const { return n_; }
  const Vector& zeta() const { return zeta_; }

 private:
  Vector zeta_;
  Matrix a_sum_;
  Vector b_sum_;
  double lambda_beta_ = 0.0;
  long n_ = 0;
};

}  // namespace zapsa::td
