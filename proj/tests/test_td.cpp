#include <doctest.h>

#include <cmath>

#include "zapsa/td.hpp"
#include "zapsa/test_support.hpp"

using namespace zapsa;
using td::FiniteChain;

namespace {

FiniteChain three_state_chain(double beta, Rng& rng, double cost_scale = 1.0) {
  FiniteChain chain;
  chain.P.resize(3, 3);
  for (Index i = 0; i < 3; ++i) {
    double mass = 0.0;
    for (Index j = 0; j < 3; ++j) {
      chain.P(i, j) = 0.1 + rng.uniform();
      mass += chain.P(i, j);
    }
    chain.P.row(i) /= mass;
  }
  chain.cost = cost_scale * Vector::NullaryExpr(3, [&](Index) { return rng.uniform(); });
  chain.beta = beta;
  chain.basis = Matrix::Identity(3, 3);
  chain.validate();
  return chain;
}

Vector exact_value(const FiniteChain& chain) {
  return (Matrix::Identity(3, 3) - chain.beta * chain.P).partialPivLu().solve(chain.cost);
}

// Steady-state Galerkin coefficients by matrix algebra: with eligibility
// filtering (I - lambda beta P)^-1 and basis rows psi(x),
//   A = Psi^T D_pi F (beta P - I) Psi,  b = Psi^T D_pi F c,  F = (I-lb P)^-1,
// and theta* solves A theta + b = 0.
Vector galerkin_oracle(const FiniteChain& chain, double lambda) {
  const Vector pi = num::stationary_pmf(chain.P);
  const Index n = chain.n_states();
  const Matrix filter = (Matrix::Identity(n, n) - lambda * chain.beta * chain.P)
                            .partialPivLu()
                            .solve(Matrix::Identity(n, n));
  const Matrix d_pi = pi.asDiagonal();
  const Matrix a = chain.basis.transpose() * d_pi * filter *
                   (chain.beta * chain.P - Matrix::Identity(n, n)) * chain.basis;
  const Vector b = chain.basis.transpose() * d_pi * filter * chain.cost;
  return a.partialPivLu().solve(-b);
}

}  // namespace

TEST_CASE("td_lambda_step: lambda=0, beta=0 is per-state regression") {
  Rng rng(101);
  FiniteChain chain = three_state_chain(0.0, rng);
  td::TDState state = td::make_td_state(chain, Vector::Zero(3), 0.0, 0);
  const Vector before = state.theta;
  td::td_lambda_step(state, chain, 0, 1, 0.3);
  Vector expected = before;
  expected[0] += 0.3 * (chain.cost[0] - before[0]);
  CHECK((state.theta - expected).norm() == 0.0);
}

TEST_CASE("td_lambda_step: zero cost keeps theta at zero") {
  Rng rng(103);
  FiniteChain chain = three_state_chain(0.6, rng);
  chain.cost.setZero();
  td::TDState state = td::make_td_state(chain, Vector::Zero(3), 0.4, 2);
  int x = 2;
  for (long n = 1; n <= 1000; ++n) {
    const int x_next = td::step_chain(chain, x, rng);
    td::td_lambda_step(state, chain, x, x_next, 1.0 / n);
    x = x_next;
  }
  CHECK(state.theta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("td_lambda_step: complete basis converges to the exact value") {
  Rng rng(107);
  const FiniteChain chain = three_state_chain(0.5, rng, /*cost_scale=*/0.2);
  const Vector h = exact_value(chain);
  td::TDState state = td::make_td_state(chain, Vector::Zero(3), 0.0, 0);
  int x = 0;
  for (long n = 1; n <= 1000000; ++n) {
    const int x_next = td::step_chain(chain, x, rng);
    td::td_lambda_step(state, chain, x, x_next, std::min(1.0, 5.0 / n));
    x = x_next;
  }
  CHECK((state.theta - h).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("td stream adapter reproduces the step exactly") {
  Rng rng(109);
  const FiniteChain chain = three_state_chain(0.7, rng);
  td::TDState state = td::make_td_state(chain, Vector::Zero(3), 0.6, 1);
  Vector theta_sa = state.theta;
  Vector zeta = state.zeta;
  int x = 1;
  for (long n = 1; n <= 200; ++n) {
    const int x_next = td::step_chain(chain, x, rng);
    const sa::LinearSample s = td::td_sample(chain, zeta, x, x_next);
    sa::linear_sa_step(theta_sa, s, 1.0 / n);
    td::td_lambda_step(state, chain, x, x_next, 1.0 / n);
    zeta = 0.6 * chain.beta * zeta + chain.basis.row(x_next).transpose();
    CHECK((state.theta - theta_sa).cwiseAbs().maxCoeff() <=
          4e-15 * (1.0 + state.theta.cwiseAbs().maxCoeff()));
    CHECK((state.zeta - zeta).norm() == 0.0);
    x = x_next;
  }
}

TEST_CASE("snr_td_step: first step adopts the sample with alpha=1") {
  Rng rng(113);
  const FiniteChain chain = three_state_chain(0.7, rng);
  td::SnrTdState state =
      td::make_snr_td_state(chain, Vector::Zero(3), 0.0, 0, Matrix::Identity(3, 3));
  const int x_next = td::step_chain(chain, 0, rng);
  const Vector zeta0 = state.td.zeta;
  td::snr_td_step(state, chain, 0, x_next, 1.0);
  const Vector v =
      chain.beta * chain.basis.row(x_next).transpose() - chain.basis.row(0).transpose();
  CHECK((state.a_hat.matrix() - zeta0 * v.transpose()).norm() < 1e-14);
}

TEST_CASE("snr_td_step: constant single-state chain hits the fixed point") {
  FiniteChain chain;
  chain.P = Matrix::Ones(1, 1);
  chain.cost = Vector::Constant(1, 0.4);
  chain.beta = 0.7;
  chain.basis = Matrix::Ones(1, 1);
  td::SnrTdState state =
      td::make_snr_td_state(chain, Vector::Zero(1), 0.0, 0, Matrix::Zero(1, 1));
  td::snr_td_step(state, chain, 0, 0, 1.0);
  CHECK(state.td.theta[0] == doctest::Approx(0.4 / 0.3).epsilon(1e-12));
}

TEST_CASE("lstd_direct: one-observation closed form on a scalar chain") {
  FiniteChain chain;
  chain.P = Matrix::Ones(1, 1);
  chain.cost = Vector::Constant(1, 0.9);
  chain.beta = 0.6;
  chain.basis = Matrix::Ones(1, 1);
  td::LstdAccumulator lstd(chain, 0.0, 0);
  lstd.observe(chain, 0, 0);
  // A_1 = beta - 1, b_1 = c: theta = -c/(beta-1).
  CHECK(lstd.solve()[0] == doctest::Approx(0.9 / 0.4).epsilon(1e-12));
}

TEST_CASE("lstd_direct: singular before enough data") {
  Rng rng(127);
  const FiniteChain chain = three_state_chain(0.7, rng);
  td::LstdAccumulator lstd(chain, 0.0, 0);
  CHECK_THROWS_AS(lstd.solve(), InsufficientData);
  lstd.observe(chain, 0, td::step_chain(chain, 0, rng));
  CHECK_THROWS_AS(lstd.solve(), SingularMatrix);
}

TEST_CASE("snr-td tracks lstd with O(1/n) gap") {
  Rng rng(131);
  const FiniteChain chain = three_state_chain(0.7, rng);
  const Matrix a_ic = -0.01 * Matrix::Identity(3, 3);
  td::SnrTdState snr = td::make_snr_td_state(chain, Vector::Zero(3), 0.3, 0, a_ic);
  td::LstdAccumulator lstd(chain, 0.3, 0);

  int x = 0;
  double max_scaled_gap = 0.0;
  double e1_norm = 0.0;  // |A_IC - A_1|, fixed after the first step
  for (long n = 1; n <= 20000; ++n) {
    const int x_next = td::step_chain(chain, x, rng);
    if (n == 1) {
      const Vector v =
          chain.beta * chain.basis.row(x_next).transpose() - chain.basis.row(x).transpose();
      e1_norm = (a_ic - snr.td.zeta * v.transpose()).norm();
    }
    td::snr_td_step(snr, chain, x, x_next, 1.0 / (1.0 + n));
    lstd.observe(chain, x, x_next);
    x = x_next;
    if (n >= 100 && n % 100 == 0) {
      const double gap = (snr.td.theta - lstd.solve()).norm();
      max_scaled_gap = std::max(max_scaled_gap, gap * static_cast<double>(n));
    }
  }
  CHECK(max_scaled_gap <= 1000.0 * e1_norm);
}

TEST_CASE("lstd with complete basis and lambda=1 recovers the value function") {
  Rng rng(137);
  const FiniteChain chain = three_state_chain(0.7, rng);
  // The exact Galerkin solution coincides with h for a complete basis.
  const Vector oracle = galerkin_oracle(chain, 1.0);
  CHECK((oracle - exact_value(chain)).cwiseAbs().maxCoeff() < 1e-10);

  td::LstdAccumulator lstd(chain, 1.0, 0);
  int x = 0;
  for (long n = 1; n <= 100000; ++n) {
    const int x_next = td::step_chain(chain, x, rng);
    lstd.observe(chain, x, x_next);
    x = x_next;
  }
  const Vector estimate = lstd.solve();
  CHECK((estimate - oracle).cwiseAbs().maxCoeff() /
            std::max(1.0, oracle.cwiseAbs().maxCoeff()) <
        0.05);
}

TEST_CASE("basis scaling contracts the mean matrix quadratically") {
  Rng rng(139);
  FiniteChain chain = three_state_chain(0.8, rng);
  FiniteChain scaled = chain;
  const double eps = 0.1;
  scaled.basis = eps * chain.basis;

  td::LstdAccumulator acc(chain, 0.5, 0);
  td::LstdAccumulator acc_scaled(scaled, 0.5, 0);
  int x = 0;
  Rng walk(991);
  for (long n = 1; n <= 5000; ++n) {
    const int x_next = td::step_chain(chain, x, walk);
    acc.observe(chain, x, x_next);
    acc_scaled.observe(scaled, x, x_next);
    x = x_next;
  }
  const double base = num::max_real_part(num::eigenvalues(acc.a_mean()));
  const double contracted = num::max_real_part(num::eigenvalues(acc_scaled.a_mean()));
  CHECK(contracted == doctest::Approx(eps * eps * base).epsilon(1e-10));
}

TEST_CASE("eligibility vectors stay inside the geometric bound") {
  Rng rng(149);
  const double lambda = 0.9;
  const FiniteChain chain = three_state_chain(0.9, rng);
  td::TDState state = td::make_td_state(chain, Vector::Zero(3), lambda, 0);
  int x = 0;
  double sup_norm = 0.0;
  for (long n = 1; n <= 100000; ++n) {
    const int x_next = td::step_chain(chain, x, rng);
    td::td_lambda_step(state, chain, x, x_next, 1e-3);
    sup_norm = std::max(sup_norm, state.zeta.lpNorm<Eigen::Infinity>());
    x = x_next;
  }
  CHECK(sup_norm <= 1.0 / (1.0 - lambda * chain.beta) + 1e-9);
}
