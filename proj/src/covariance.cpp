#include "zapsa/covariance.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

#include "zapsa/numerics.hpp"

namespace zapsa::cov {

GainSpec GainSpec::scalar(double g) {
  GainSpec s;
  s.kind = Kind::Scalar;
  s.g = g;
  return s;
}

GainSpec GainSpec::matrix(Matrix G) {
  GainSpec s;
  s.kind = Kind::Matrix;
  s.G = std::move(G);
  return s;
}

GainSpec GainSpec::optimal() { return GainSpec{}; }

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Finite:
      return "finite";
    case Verdict::Infinite:
      return "infinite";
    case Verdict::Undetermined:
      return "undetermined";
  }
  return "?";
}

Vector stationary_pair_pmf(const mdp::FiniteMDP& m, const mdp::Policy& behavior) {
  return num::stationary_pmf(mdp::policy_matrices(m, behavior).pair_chain);
}

OptimalSolution solve_unique_optimal(const mdp::FiniteMDP& m) {
  Vector q_star = mdp::solve_q_star(m, 1e-11);
  double margin = std::numeric_limits<double>::infinity();
  for (int x = 0; x < m.n_states; ++x) {
    if (m.pair_index[x].size() < 2) continue;
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    for (Index k : m.pair_index[x]) {
      const double value = q_star[k];
      if (value < best) {
        second = best;
        best = value;
      } else if (value < second) {
        second = value;
      }
    }
    margin = std::min(margin, second - best);
  }
  if (margin < 1e-9)
    throw NonUniqueOptimalPolicy("optimal policy margin " + std::to_string(margin) +
                                 " below 1e-9");
  return {q_star, mdp::greedy_policy(m, q_star), margin};
}

Matrix linearization_A(const mdp::FiniteMDP& m, const mdp::Policy& behavior) {
  const OptimalSolution opt = solve_unique_optimal(m);
  const Vector varpi = stationary_pair_pmf(m, behavior);
  const Matrix ps = mdp::policy_matrices(m, opt.policy).pair_chain;
  return -(varpi.asDiagonal() * (Matrix::Identity(m.d(), m.d()) - m.beta * ps));
}

Matrix sigma_delta_tabular(const mdp::FiniteMDP& m, const mdp::Policy& behavior) {
  const OptimalSolution opt = solve_unique_optimal(m);
  const Vector h_star = mdp::min_over_actions(m, opt.q_star);
  const Vector varpi = stationary_pair_pmf(m, behavior);
  Vector diag(m.d());
  for (Index k = 0; k < m.d(); ++k) {
    const double mean = m.kernel.row(k).dot(h_star);
    const double mean_sq = m.kernel.row(k).dot(h_star.cwiseProduct(h_star).matrix());
    diag[k] = m.beta * m.beta * varpi[k] * std::max(0.0, mean_sq - mean * mean);
  }
  return diag.asDiagonal();
}

Matrix sigma_delta_batchmeans(const std::vector<Vector>& noise, int batch_length) {
  if (batch_length < 10)
    throw InsufficientData("sigma_delta_batchmeans: batch length must be >= 10");
  const long batches = static_cast<long>(noise.size()) / batch_length;
  if (batches < 1)
    throw InsufficientData("sigma_delta_batchmeans: fewer samples than one batch");
  const Index d = noise.front().size();
  Matrix sigma = Matrix::Zero(d, d);
  for (long b = 0; b < batches; ++b) {
    Vector s = Vector::Zero(d);
    for (int i = 0; i < batch_length; ++i) s += noise[b * batch_length + i];
    sigma += s * s.transpose();
  }
  return sigma / (static_cast<double>(batches) * batch_length);
}

namespace {

Matrix gain_matrix(const GainSpec& gain, const Matrix& A) {
  switch (gain.kind) {
    case GainSpec::Kind::Scalar:
      return gain.g * Matrix::Identity(A.rows(), A.cols());
    case GainSpec::Kind::Matrix:
      if (gain.G.rows() != A.rows() || gain.G.cols() != A.cols())
        throw DimensionMismatch("asymptotic_cov: gain dimension mismatch");
      return gain.G;
    case GainSpec::Kind::Optimal:
      return -A.partialPivLu().solve(Matrix::Identity(A.rows(), A.cols()));
  }
  return {};
}

}  // namespace

CovarianceReport asymptotic_cov(const Matrix& A, const Matrix& sigma_delta,
                                const GainSpec& gain) {
  CovarianceReport report;
  report.A = A;
  report.sigma_delta = sigma_delta;
  report.gain = gain;

  const Matrix G = gain_matrix(gain, A);
  const Matrix GA = G * A;
  Eigen::EigenSolver<Matrix> solver(GA);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("asymptotic_cov: eigen-solve failed");
  report.spectrum_ga.assign(solver.eigenvalues().begin(), solver.eigenvalues().end());

  bool all_fast = true;
  bool excited = false;
  const Matrix noise = G * sigma_delta * G.transpose();
  for (Index i = 0; i < GA.rows(); ++i) {
    if (solver.eigenvalues()[i].real() < -0.5) continue;
    all_fast = false;
    const Eigen::VectorXcd v = solver.eigenvectors().col(i);
    const double excitation = (v.adjoint() * noise.cast<std::complex<double>>() * v)(0).real();
    if (excitation > 1e-12 * std::max(1.0, noise.norm())) excited = true;
  }

  if (all_fast) {
    report.verdict = Verdict::Finite;
    if (gain.kind == GainSpec::Kind::Optimal) {
      // Sigma* = A^-1 Sigma_Delta A^-T; GA = -I makes the Lyapunov form
      // (GA + I/2) Sigma + Sigma (GA + I/2)^T + G Sigma_Delta G^T = 0 agree.
      const Matrix a_inv_s = A.partialPivLu().solve(sigma_delta);
      Matrix sigma = A.partialPivLu().solve(a_inv_s.transpose()).transpose();
      report.sigma_theta = 0.5 * (sigma + sigma.transpose());
    } else {
      const Matrix half = 0.5 * Matrix::Identity(GA.rows(), GA.cols());
      report.sigma_theta = num::solve_lyapunov(GA + half, noise);
    }
  } else {
    report.verdict = excited ? Verdict::Infinite : Verdict::Undetermined;
  }
  return report;
}

SweepResult scalar_gain_sweep(const Matrix& A, const Matrix& sigma_delta,
                              std::span<const double> grid) {
  const Spectrum spectrum = num::eigenvalues(A);
  if (num::max_real_part(spectrum) >= 0.0)
    throw NotHurwitz("scalar_gain_sweep: A must be Hurwitz");
  double g_star = 0.0;
  for (const auto& lambda : spectrum) g_star = std::max(g_star, -0.5 / lambda.real());

  SweepResult result;
  result.g_star = g_star;
  for (double g : grid) {
    if (!(g > 0)) throw ConfigError("scalar_gain_sweep: grid entries must be positive");
    const CovarianceReport report = asymptotic_cov(A, sigma_delta, GainSpec::scalar(g));
    SweepRow row{g, report.verdict, std::numeric_limits<double>::quiet_NaN()};
    if (report.sigma_theta) row.trace = report.sigma_theta->trace();
    result.rows.push_back(row);
  }
  return result;
}

PfCertificate pf_certificate(const mdp::FiniteMDP& m, const mdp::Policy& behavior) {
  if (!(m.beta > 0.0 && m.beta < 1.0))
    throw ConfigError("pf_certificate: beta must lie in (0,1)");
  const OptimalSolution opt = solve_unique_optimal(m);
  const Vector varpi = stationary_pair_pmf(m, behavior);
  const Matrix ps = mdp::policy_matrices(m, opt.policy).pair_chain;
  const Index d = m.d();

  // T = (1-beta) [I - beta P S_phi*]^-1 is a d x d transition matrix;
  // -A^-1 = (1-beta)^-1 T Pi^-1.
  const Matrix resolvent =
      (Matrix::Identity(d, d) - m.beta * ps).partialPivLu().solve(Matrix::Identity(d, d));
  const Matrix neg_a_inv = resolvent * varpi.cwiseInverse().asDiagonal();

  Vector v = Vector::Constant(d, 1.0 / static_cast<double>(d));
  double lambda = 0.0;
  bool converged = false;
  for (long it = 0; it < 1'000'000; ++it) {
    Vector next = neg_a_inv * v;
    lambda = next.lpNorm<1>();
    next /= lambda;
    const double residual = (neg_a_inv * next - lambda * next).lpNorm<Eigen::Infinity>();
    v = std::move(next);
    if (residual <= 1e-12 * lambda * v.lpNorm<Eigen::Infinity>()) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceFailure("pf_certificate: power iteration did not reach tolerance");

  PfCertificate cert;
  cert.lambda_pf = lambda;
  cert.eigenvector = v;
  cert.lambda_a = -1.0 / lambda;
  cert.bound = -(1.0 - m.beta) * varpi.maxCoeff();
  cert.eigenvector_positive = (v.array() > 0.0).all();
  cert.bound_satisfied = cert.lambda_a >= cert.bound - 1e-12 * std::abs(cert.bound);
  return cert;
}

}  // namespace zapsa::cov
