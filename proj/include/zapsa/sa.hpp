#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "zapsa/common.hpp"
#include "zapsa/numerics.hpp"
#include "zapsa/rng.hpp"

namespace zapsa::sa {

// Step-size sequences alpha_n for n >= 1. All kinds produce values in (0,1]:
// the scaled-harmonic kind caps g/n at 1 during the transient, which leaves
// the asymptotic gain (and hence the asymptotic covariance) unchanged.
struct StepSchedule {
  enum class Kind { ScaledHarmonic, Power, OffsetHarmonic, Constant };

  static StepSchedule scaled_harmonic(double g);   // min(1, g/n)
  static StepSchedule power(double rho);           // n^-rho, rho in (0.5, 1]
  static StepSchedule offset_harmonic(double b);   // 1/(b+n), b >= 0
  static StepSchedule constant(double value);      // value in (0, 1]

  double operator()(long n) const;

  // Decay exponent used to validate two-time-scale pairings.
  double exponent() const;

  Kind kind = Kind::ScaledHarmonic;
  double g = 1.0;
  double rho = 1.0;
  double b = 0.0;
  double value = 1.0;
};

// Validated (alpha, gamma) pair for the two-time-scale recursions: the
// matrix schedule gamma must decay strictly slower than alpha.
struct TwoTimeScale {
  TwoTimeScale(StepSchedule alpha_in, StepSchedule gamma_in);
  StepSchedule alpha;
  StepSchedule gamma;
};

struct LinearSample {
  Matrix A;
  Vector b;
  // Set when A = u v^T; enables the O(d^2) maintained-inverse path.
  std::optional<std::pair<Vector, Vector>> rank1;
};

class LinearSystemStream {
 public:
  virtual ~LinearSystemStream() = default;
  virtual LinearSample next() = 0;
  virtual Index dim() const = 0;
  // Steady-state means (A, b) when analytically known.
  virtual std::optional<std::pair<Matrix, Vector>> steady_means() const { return std::nullopt; }
};

// Constant deterministic stream.
class FixedLinearStream : public LinearSystemStream {
 public:
  FixedLinearStream(Matrix A, Vector b) : a_(std::move(A)), b_(std::move(b)) {}
  LinearSample next() override { return {a_, b_, std::nullopt}; }
  Index dim() const override { return a_.rows(); }
  std::optional<std::pair<Matrix, Vector>> steady_means() const override { return {{a_, b_}}; }

 private:
  Matrix a_;
  Vector b_;
};

// (A, b) plus i.i.d. Gaussian entry noise; declared means are the base pair.
class GaussianLinearStream : public LinearSystemStream {
 public:
  GaussianLinearStream(Matrix A, Vector b, double noise, std::uint64_t seed)
      : a_(std::move(A)), b_(std::move(b)), noise_(noise), rng_(seed) {}
  LinearSample next() override;
  Index dim() const override { return a_.rows(); }
  std::optional<std::pair<Matrix, Vector>> steady_means() const override { return {{a_, b_}}; }

 private:
  Matrix a_;
  Vector b_;
  double noise_;
  Rng rng_;
};

struct ZapState {
  Vector theta;
  num::TrackedInverse gain;  // running matrix estimate and projected inverse
  long n = 0;
};

// A_hat starts at zero (projection active until the estimate clears the
// clamp level).
ZapState make_zap_state(Vector theta0, num::TrackedInverse::Options options = num::TrackedInverse::Options());
ZapState make_zap_state(Vector theta0, Matrix a0, num::TrackedInverse::Options options = num::TrackedInverse::Options());

// theta <- theta + alpha (A theta - b)
void linear_sa_step(Vector& theta, const LinearSample& sample, double alpha);

// theta <- theta + alpha G (A theta - b)
void matrix_gain_step(Vector& theta, const LinearSample& sample, double alpha, const Matrix& G);

// Single-time-scale stochastic Newton-Raphson: the matrix estimate and the
// parameter share the step size.
void snr_step(ZapState& state, const LinearSample& sample, double alpha);

// Two-time-scale variant: A_hat <- A_hat + gamma (A_{n+1} - A_hat) followed by
// theta <- theta - alpha [A_hat]^-1 (A_{n+1} theta - b_{n+1}).
void zap_step(ZapState& state, const LinearSample& sample, double alpha, double gamma);

// General form with externally evaluated f and its Jacobian.
void zap_nonlinear_step(ZapState& state, const Vector& f_sample, const Matrix& gradf_sample,
                        double alpha, double gamma);

// Deterministic Newton-Raphson iteration, used as the ODE-matching oracle.
Vector newton_raphson(const std::function<Vector(const Vector&)>& f,
                      const std::function<Matrix(const Vector&)>& gradf, Vector theta0,
                      int steps);

// Uniform average of the last `window` snapshots (window = 0 averages all).
Vector prj_average(const std::vector<Vector>& snapshots, std::size_t window = 0);

// Batched matrix step size: 1 - prod_j (1 - gamma_j).
double gamma_hat(std::span<const double> gammas);

// One batched update: averages the (f, grad f) samples taken at frozen theta,
// then applies zap_nonlinear_step with (alpha, gamma_hat).
void od_zap_batch(ZapState& state, std::span<const std::pair<Vector, Matrix>> batch,
                  double alpha, double gamma_hat_value);

}  // namespace zapsa::sa
