#include "zapsa/sa.hpp"

#include <cmath>

namespace zapsa::sa {

StepSchedule StepSchedule::scaled_harmonic(double g) {
  if (!(g > 0)) throw ConfigError("StepSchedule: gain g must be positive");
  StepSchedule s;
  s.kind = Kind::ScaledHarmonic;
  s.g = g;
  return s;
}

StepSchedule StepSchedule::power(double rho) {
  if (!(rho > 0.5 && rho <= 1.0))
    throw ConfigError("StepSchedule: power exponent must lie in (0.5, 1]");
  StepSchedule s;
  s.kind = Kind::Power;
  s.rho = rho;
  return s;
}

StepSchedule StepSchedule::offset_harmonic(double b) {
  if (!(b >= 0)) throw ConfigError("StepSchedule: offset b must be >= 0");
  StepSchedule s;
  s.kind = Kind::OffsetHarmonic;
  s.b = b;
  return s;
}

StepSchedule StepSchedule::constant(double value) {
  if (!(value > 0 && value <= 1.0)) throw ConfigError("StepSchedule: constant must lie in (0,1]");
  StepSchedule s;
  s.kind = Kind::Constant;
  s.value = value;
  return s;
}

double StepSchedule::operator()(long n) const {
  if (n < 1) throw ConfigError("StepSchedule: step index starts at 1");
  switch (kind) {
    case Kind::ScaledHarmonic:
      return std::min(1.0, g / static_cast<double>(n));
    case Kind::Power:
      return std::pow(static_cast<double>(n), -rho);
    case Kind::OffsetHarmonic:
      return 1.0 / (b + static_cast<double>(n));
    case Kind::Constant:
      return value;
  }
  return 0.0;
}

double StepSchedule::exponent() const {
  switch (kind) {
    case Kind::ScaledHarmonic:
    case Kind::OffsetHarmonic:
      return 1.0;
    case Kind::Power:
      return rho;
    case Kind::Constant:
      return 0.0;
  }
  return 0.0;
}

TwoTimeScale::TwoTimeScale(StepSchedule alpha_in, StepSchedule gamma_in)
    : alpha(alpha_in), gamma(gamma_in) {
  if (!(alpha.exponent() > gamma.exponent()))
    throw ConfigError("TwoTimeScale: alpha_n/gamma_n must vanish; pick a slower gamma");
}

LinearSample GaussianLinearStream::next() {
  LinearSample s{a_, b_, std::nullopt};
  for (Index i = 0; i < s.A.rows(); ++i) {
    for (Index j = 0; j < s.A.cols(); ++j) s.A(i, j) += noise_ * rng_.normal();
    s.b[i] += noise_ * rng_.normal();
  }
  return s;
}

ZapState make_zap_state(Vector theta0, num::TrackedInverse::Options options) {
  const Index d = theta0.size();
  return ZapState{std::move(theta0), num::TrackedInverse(Matrix::Zero(d, d), options), 0};
}

ZapState make_zap_state(Vector theta0, Matrix a0, num::TrackedInverse::Options options) {
  return ZapState{std::move(theta0), num::TrackedInverse(std::move(a0), options), 0};
}

void linear_sa_step(Vector& theta, const LinearSample& sample, double alpha) {
  theta += alpha * (sample.A * theta - sample.b);
}

void matrix_gain_step(Vector& theta, const LinearSample& sample, double alpha, const Matrix& G) {
  theta += alpha * (G * (sample.A * theta - sample.b));
}

void zap_step(ZapState& state, const LinearSample& sample, double alpha, double gamma) {
  if (sample.rank1)
    state.gain.rank1_update(sample.rank1->first, sample.rank1->second, gamma);
  else
    state.gain.dense_update(sample.A, gamma);
  state.theta -= alpha * (state.gain.inverse() * (sample.A * state.theta - sample.b));
  ++state.n;
}

void snr_step(ZapState& state, const LinearSample& sample, double alpha) {
  zap_step(state, sample, alpha, alpha);
}

void zap_nonlinear_step(ZapState& state, const Vector& f_sample, const Matrix& gradf_sample,
                        double alpha, double gamma) {
  state.gain.dense_update(gradf_sample, gamma);
  state.theta -= alpha * (state.gain.inverse() * f_sample);
  ++state.n;
}

Vector newton_raphson(const std::function<Vector(const Vector&)>& f,
                      const std::function<Matrix(const Vector&)>& gradf, Vector theta0,
                      int steps) {
  Vector theta = std::move(theta0);
  for (int k = 0; k < steps; ++k) {
    const Matrix jac = gradf(theta);
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible())
      throw SingularJacobian("newton_raphson: singular Jacobian at step " + std::to_string(k));
    theta -= lu.solve(f(theta));
  }
  return theta;
}

Vector prj_average(const std::vector<Vector>& snapshots, std::size_t window) {
  if (snapshots.empty()) throw InsufficientData("prj_average: no snapshots");
  if (window == 0) window = snapshots.size();
  if (window > snapshots.size())
    throw InsufficientData("prj_average: window exceeds snapshot count");
  Vector sum = Vector::Zero(snapshots.front().size());
  for (std::size_t i = snapshots.size() - window; i < snapshots.size(); ++i) sum += snapshots[i];
  return sum / static_cast<double>(window);
}

double gamma_hat(std::span<const double> gammas) {
  double keep = 1.0;
  for (double g : gammas) {
    if (!(g >= 0.0 && g < 1.0)) throw ConfigError("gamma_hat: entries must lie in [0,1)");
    keep *= (1.0 - g);
  }
  return 1.0 - keep;
}

void od_zap_batch(ZapState& state, std::span<const std::pair<Vector, Matrix>> batch,
                  double alpha, double gamma_hat_value) {
  if (batch.empty()) throw InsufficientData("od_zap_batch: empty batch");
  Vector f_mean = Vector::Zero(state.theta.size());
  Matrix grad_mean = Matrix::Zero(state.theta.size(), state.theta.size());
  for (const auto& [f, grad] : batch) {
    f_mean += f;
    grad_mean += grad;
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  f_mean *= inv_n;
  grad_mean *= inv_n;
  zap_nonlinear_step(state, f_mean, grad_mean, alpha, gamma_hat_value);
}

}  // namespace zapsa::sa
