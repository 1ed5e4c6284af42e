#pragma once

#include <optional>

#include "zapsa/common.hpp"

namespace zapsa::num {

// Solves F*Sigma + Sigma*F^T + S = 0 for Sigma, via the Kronecker
// vectorization (I (x) F + F (x) I) vec(Sigma) = -vec(S). Intended for the
// small systems used here (d <= 64).
//
// Requires every eigenvalue of F to have strictly negative real part and S
// symmetric PSD; the result is symmetrized and its residual is checked
// against 1e-10 * (|F||Sigma| + |S|).
Matrix solve_lyapunov(const Matrix& F, const Matrix& S);

// Eigenvalues of a general real square matrix (real Schur reduction;
// conjugate-closed output for real input).
Spectrum eigenvalues(const Matrix& M);

double max_real_part(const Spectrum& spectrum);

// Given M_inv = M^-1, returns the inverse of M' = (1-gamma)*M + gamma*u*v^T
// using the Sherman-Morrison identity on the scaled matrix. Throws
// NumericBreakdown when the Sherman-Morrison denominator has magnitude below
// 1e-12; the caller is expected to fall back to a full (projected) inversion.
Matrix rank1_inverse_update(const Matrix& M_inv, const Vector& u, const Vector& v,
                            double gamma);

// Inverse of [A], where [A] equals A if its smallest singular value is at
// least epsilon, and otherwise A with singular values clamped below by
// epsilon (signs carried by the singular vectors). Total function; the result
// norm is bounded by d/epsilon.
Matrix projected_inverse(const Matrix& A, double epsilon);

// Default clamp level used by the steppers: eps = 1e-8 * max(1, |A|).
double default_projection_epsilon(const Matrix& A);

// Unique invariant pmf of an irreducible aperiodic row-stochastic matrix:
// dense eigen-solve of P^T refined by power iteration to residual 1e-12.
// Throws NotStochastic for invalid input and Reducible when the fixed point
// has (numerically) zero entries.
Vector stationary_pmf(const Matrix& P);

// Maintains a matrix estimate together with its projected inverse across
// rank-one averaging updates A <- (1-gamma)*A + gamma*u*v^T. The inverse is
// tracked with Sherman-Morrison when the projection is inactive, verified
// against a rotating probe column each step, and rebuilt from scratch every
// refresh_interval steps (and whenever tracking is unsafe).
struct TrackedInverseOptions {
  std::optional<double> epsilon;  // fixed clamp level; default adapts to |A|
  int refresh_interval = 512;
  double probe_tolerance = 1e-10;
};

class TrackedInverse {
 public:
  using Options = TrackedInverseOptions;

  TrackedInverse(Matrix initial, Options options = Options());

  void rank1_update(const Vector& u, const Vector& v, double gamma);
  void dense_update(const Matrix& sample, double gamma);

  const Matrix& matrix() const { return a_; }
  const Matrix& inverse() const { return a_inv_; }
  // True when the projection is inactive, i.e. inverse() is the exact
  // inverse of matrix().
  bool exact() const { return exact_; }
  double epsilon() const;

 private:
  void rebuild();
  bool probe_ok();

  Matrix a_;
  Matrix a_inv_;
  Options options_;
  bool exact_ = false;
  long steps_since_rebuild_ = 0;
  Index probe_column_ = 0;
};

}  // namespace zapsa::num
