#include "zapsa/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace zapsa::num {

namespace {

void require_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionMismatch(std::string(name) + ": expected a nonempty square matrix");
}

}  // namespace

Matrix solve_lyapunov(const Matrix& F, const Matrix& S) {
  require_square(F, "solve_lyapunov F");
  require_square(S, "solve_lyapunov S");
  const Index d = F.rows();
  if (S.rows() != d) throw DimensionMismatch("solve_lyapunov: F and S dimensions differ");

  if (max_real_part(eigenvalues(F)) >= 0.0)
    throw NotHurwitz("solve_lyapunov: F has an eigenvalue with nonnegative real part");

  // vec(F*X) = (I (x) F) vec(X),  vec(X*F^T) = (F (x) I) vec(X), with
  // column-major vec. Assemble K = I (x) F + F (x) I and solve K x = -vec(S).
  Matrix K = Matrix::Zero(d * d, d * d);
  for (Index j = 0; j < d; ++j) K.block(j * d, j * d, d, d) = F;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index r = 0; r < d; ++r) K(j * d + r, i * d + r) += F(j, i);

  Vector rhs(d * d);
  for (Index j = 0; j < d; ++j) rhs.segment(j * d, d) = -S.col(j);

  Vector x = K.partialPivLu().solve(rhs);
  Matrix sigma(d, d);
  for (Index j = 0; j < d; ++j) sigma.col(j) = x.segment(j * d, d);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();

  const double scale = F.norm() * sigma.norm() + S.norm();
  const double residual = (F * sigma + sigma * F.transpose() + S).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10 * std::max(scale, 1.0)))
    throw NumericBreakdown("solve_lyapunov: residual " + std::to_string(residual) +
                           " exceeds tolerance");
  return sigma;
}

Spectrum eigenvalues(const Matrix& M) {
  require_square(M, "eigenvalues");
  if (!M.allFinite()) throw DimensionMismatch("eigenvalues: non-finite entries");
  Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("eigenvalues: Schur iteration did not converge");
  Spectrum out(M.rows());
  for (Index i = 0; i < M.rows(); ++i) out[i] = solver.eigenvalues()[i];
  return out;
}

double max_real_part(const Spectrum& spectrum) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& z : spectrum) m = std::max(m, z.real());
  return m;
}

Matrix rank1_inverse_update(const Matrix& M_inv, const Vector& u, const Vector& v,
                            double gamma) {
  require_square(M_inv, "rank1_inverse_update");
  const Index d = M_inv.rows();
  if (u.size() != d || v.size() != d)
    throw DimensionMismatch("rank1_inverse_update: vector sizes do not match matrix");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ConfigError("rank1_inverse_update: gamma must lie in [0,1)");
  if (gamma == 0.0) return M_inv;

  // M' = (1-g) M + g u v^T = (1-g) [M + c u v^T] with c = g/(1-g); apply
  // Sherman-Morrison to the bracket and rescale.
  const double c = gamma / (1.0 - gamma);
  const Vector Mi_u = M_inv * u;
  const Vector vT_Mi = M_inv.transpose() * v;
  const double denom = 1.0 + c * v.dot(Mi_u);
  if (std::abs(denom) < 1e-12)
    throw NumericBreakdown("rank1_inverse_update: Sherman-Morrison denominator " +
                           std::to_string(denom));
  Matrix out = M_inv - (c / denom) * (Mi_u * vT_Mi.transpose());
  out /= (1.0 - gamma);
  return out;
}

Matrix projected_inverse(const Matrix& A, double epsilon) {
  require_square(A, "projected_inverse");
  if (!(epsilon > 0.0)) throw ConfigError("projected_inverse: epsilon must be > 0");
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector inv_sv = svd.singularValues();
  for (Index i = 0; i < inv_sv.size(); ++i) inv_sv[i] = 1.0 / std::max(inv_sv[i], epsilon);
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

double default_projection_epsilon(const Matrix& A) {
  return 1e-8 * std::max(1.0, A.norm());
}

Vector stationary_pmf(const Matrix& P) {
  require_square(P, "stationary_pmf");
  const Index n = P.rows();
  if ((P.array() < -1e-14).any())
    throw NotStochastic("stationary_pmf: negative transition probability");
  for (Index i = 0; i < n; ++i)
    if (std::abs(P.row(i).sum() - 1.0) > 1e-10)
      throw NotStochastic("stationary_pmf: row " + std::to_string(i) + " does not sum to 1");

  // Left eigenvector for eigenvalue 1, then power-iteration refinement of
  // pi <- pi P until the residual clears 1e-12.
  Eigen::EigenSolver<Matrix> solver(P.transpose());
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("stationary_pmf: eigen-solve did not converge");
  Index best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double gap = std::abs(solver.eigenvalues()[i] - std::complex<double>(1.0, 0.0));
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  Vector pi = solver.eigenvectors().col(best).real();
  if (pi.sum() < 0) pi = -pi;
  pi = pi.cwiseMax(0.0);
  const double mass = pi.sum();
  if (mass <= 0) throw Reducible("stationary_pmf: degenerate fixed point");
  pi /= mass;

  for (int sweep = 0; sweep < 100000; ++sweep) {
    Vector next = P.transpose() * pi;
    next = next.cwiseMax(0.0);
    next /= next.sum();
    const double residual = (P.transpose() * next - next).cwiseAbs().maxCoeff();
    pi = next;
    if (residual <= 1e-12) break;
    if (sweep == 99999)
      throw ConvergenceFailure("stationary_pmf: power refinement stalled at residual " +
                               std::to_string(residual));
  }

  if ((pi.array() <= 1e-13).any())
    throw Reducible("stationary_pmf: fixed point has zero mass on some state");
  return pi;
}

TrackedInverse::TrackedInverse(Matrix initial, Options options)
    : a_(std::move(initial)), options_(options) {
  require_square(a_, "TrackedInverse");
  rebuild();
}

double TrackedInverse::epsilon() const {
  return options_.epsilon ? *options_.epsilon : default_projection_epsilon(a_);
}

void TrackedInverse::rebuild() {
  const double eps = epsilon();
  Eigen::JacobiSVD<Matrix> svd(a_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  exact_ = svd.singularValues().minCoeff() >= eps;
  Vector inv_sv = svd.singularValues();
  for (Index i = 0; i < inv_sv.size(); ++i) inv_sv[i] = 1.0 / std::max(inv_sv[i], eps);
  a_inv_ = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
  steps_since_rebuild_ = 0;
}

bool TrackedInverse::probe_ok() {
  const Index d = a_.rows();
  probe_column_ = (probe_column_ + 1) % d;
  Vector e = Vector::Zero(d);
  e[probe_column_] = 1.0;
  const double err = (a_ * (a_inv_ * e) - e).cwiseAbs().maxCoeff();
  return err <= options_.probe_tolerance * std::max(1.0, a_.norm() * a_inv_.norm());
}

void TrackedInverse::rank1_update(const Vector& u, const Vector& v, double gamma) {
  a_ = (1.0 - gamma) * a_ + gamma * (u * v.transpose());
  ++steps_since_rebuild_;
  if (exact_ && gamma < 1.0 && steps_since_rebuild_ < options_.refresh_interval) {
    try {
      Matrix candidate = rank1_inverse_update(a_inv_, u, v, gamma);
      // |M^-1|_F >= 1/sigma_min(M): the clamp stays inactive only while the
      // tracked inverse is safely below 1/epsilon.
      if (candidate.norm() * epsilon() < 0.5) {
        a_inv_ = std::move(candidate);
        if (probe_ok()) return;
      }
    } catch (const NumericBreakdown&) {
      // fall through to the full rebuild
    }
  }
  rebuild();
}

void TrackedInverse::dense_update(const Matrix& sample, double gamma) {
  a_ = (1.0 - gamma) * a_ + gamma * sample;
  rebuild();
}

}  // namespace zapsa::num
