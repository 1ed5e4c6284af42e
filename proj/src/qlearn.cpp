#include "zapsa/qlearn.hpp"

#include <cmath>

namespace zapsa::qlearn {

namespace {

void check_tabular(const mdp::FiniteMDP& m, const Vector& theta, const char* who) {
  if (theta.size() != m.d())
    throw DimensionMismatch(std::string(who) + ": tabular parameter size mismatch");
}

double q_value(const Matrix& basis, const Vector& theta, Index pair) {
  return basis.row(pair).dot(theta);
}

// Greedy action id at a state, ties to the lowest action id.
int greedy_action(const mdp::FiniteMDP& m, const Matrix& basis, const Vector& theta, int x) {
  int best_action = m.feasible_actions[x][0];
  double best = q_value(basis, theta, m.pair_index[x][0]);
  for (std::size_t slot = 1; slot < m.pair_index[x].size(); ++slot) {
    const double value = q_value(basis, theta, m.pair_index[x][slot]);
    if (value < best) {
      best = value;
      best_action = m.feasible_actions[x][slot];
    }
  }
  return best_action;
}

std::vector<int> greedy_actions(const mdp::FiniteMDP& m, const Matrix& basis,
                                const Vector& theta) {
  std::vector<int> actions(m.n_states);
  for (int x = 0; x < m.n_states; ++x) actions[x] = greedy_action(m, basis, theta, x);
  return actions;
}

double min_q_at(const mdp::FiniteMDP& m, const Vector& theta, int x) {
  double best = theta[m.pair_index[x][0]];
  for (Index k : m.pair_index[x]) best = std::min(best, theta[k]);
  return best;
}

}  // namespace

BehaviorPolicy BehaviorPolicy::uniform(const mdp::FiniteMDP& m) {
  BehaviorPolicy b;
  b.pmfs.resize(m.n_states);
  for (int x = 0; x < m.n_states; ++x)
    b.pmfs[x].assign(m.feasible_actions[x].size(),
                     1.0 / static_cast<double>(m.feasible_actions[x].size()));
  return b;
}

int BehaviorPolicy::sample_action(const mdp::FiniteMDP& m, int x, Rng& rng) const {
  const auto& pmf = pmfs[x];
  const double roll = rng.uniform();
  double acc = 0.0;
  for (std::size_t slot = 0; slot < pmf.size(); ++slot) {
    acc += pmf[slot];
    if (roll < acc) return m.feasible_actions[x][slot];
  }
  return m.feasible_actions[x].back();
}

int sample_next_state(const mdp::FiniteMDP& m, int x, int u, Rng& rng) {
  const Index k = m.pair(x, u);
  const double roll = rng.uniform();
  double acc = 0.0;
  for (int y = 0; y < m.n_states; ++y) {
    acc += m.kernel(k, y);
    if (roll < acc) return y;
  }
  return m.n_states - 1;
}

Transition sample_transition(const mdp::FiniteMDP& m, const BehaviorPolicy& behavior, int& x,
                             int& u, Rng& rng) {
  const int x_next = sample_next_state(m, x, u, rng);
  const int u_next = behavior.sample_action(m, x_next, rng);
  const Transition t{x, u, x_next, u_next};
  x = x_next;
  u = u_next;
  return t;
}

void ProjectionBox::apply(Vector& theta) const {
  for (Index i = 0; i < theta.size(); ++i) theta[i] = std::clamp(theta[i], lower, upper);
}

void watkins_step(const mdp::FiniteMDP& m, Vector& theta, const Transition& t, double alpha,
                  const std::optional<ProjectionBox>& box) {
  check_tabular(m, theta, "watkins_step");
  const Index k = m.pair(t.x, t.u);
  theta[k] += alpha * (m.cost[k] + m.beta * min_q_at(m, theta, t.x_next) - theta[k]);
  if (box) box->apply(theta);
}

SpeedyState make_speedy_state(const mdp::FiniteMDP& m, Vector theta0) {
  SpeedyState state;
  state.prev_at_pair.assign(static_cast<std::size_t>(m.d()), theta0);
  state.visits.assign(static_cast<std::size_t>(m.d()), 0);
  state.theta = std::move(theta0);
  return state;
}

void speedy_q_step(const mdp::FiniteMDP& m, SpeedyState& state, const Transition& t,
                   const std::optional<ProjectionBox>& box) {
  check_tabular(m, state.theta, "speedy_q_step");
  const Index k = m.pair(t.x, t.u);
  const double alpha = 1.0 / (1.0 + static_cast<double>(state.visits[k]));
  const double t_prev = m.cost[k] + m.beta * min_q_at(m, state.prev_at_pair[k], t.x_next);
  const double t_curr = m.cost[k] + m.beta * min_q_at(m, state.theta, t.x_next);
  const double updated = state.theta[k] + alpha * (t_prev - state.theta[k]) +
                         (1.0 - alpha) * (t_curr - t_prev);
  state.prev_at_pair[k] = state.theta;
  state.theta[k] = updated;
  ++state.visits[k];
  if (box) box->apply(state.theta);
  ++state.n;
}

void rpj_q_step(const mdp::FiniteMDP& m, RpjState& state, const Transition& t,
                const std::optional<ProjectionBox>& box) {
  ++state.n;
  const double alpha = std::pow(static_cast<double>(state.n), -0.6);
  watkins_step(m, state.theta, t, alpha, box);
  state.theta_bar += (state.theta - state.theta_bar) / static_cast<double>(state.n);
}

GQState make_gq_state(const mdp::FiniteMDP& m, const Matrix& basis, Vector theta0, int x0,
                      int u0) {
  return GQState{std::move(theta0), basis.row(m.pair(x0, u0)).transpose(), 0};
}

void g_q_lambda_step(const mdp::FiniteMDP& m, const Matrix& basis, GQState& state,
                     const Transition& t, const Matrix& G, double alpha, double lambda) {
  const Index k = m.pair(t.x, t.u);
  const int greedy = greedy_action(m, basis, state.theta, t.x_next);
  const double d = m.cost[k] + m.beta * q_value(basis, state.theta, m.pair(t.x_next, greedy)) -
                   q_value(basis, state.theta, k);
  state.theta += alpha * d * (G * state.zeta);
  state.zeta = lambda * m.beta * state.zeta +
               basis.row(m.pair(t.x_next, t.u_next)).transpose();
  ++state.n;
}

ZapQState make_zap_q_state(const mdp::FiniteMDP& m, const Matrix& basis, Vector theta0, int x0,
                           int u0, num::TrackedInverse::Options options) {
  const Index dim = basis.cols();
  return make_zap_q_state(m, basis, std::move(theta0), x0, u0, Matrix::Zero(dim, dim), options);
}

ZapQState make_zap_q_state(const mdp::FiniteMDP& m, const Matrix& basis, Vector theta0, int x0,
                           int u0, Matrix a0, num::TrackedInverse::Options options) {
  ZapQState state{std::move(theta0),
                  basis.row(m.pair(x0, u0)).transpose(),
                  num::TrackedInverse(std::move(a0), options),
                  {},
                  0.0,
                  0,
                  std::nullopt};
  state.policy = greedy_actions(m, basis, state.theta);
  return state;
}

void zap_q_lambda_step(const mdp::FiniteMDP& m, const Matrix& basis, ZapQState& state,
                       const Transition& t, double alpha, double gamma, double lambda) {
  const Index k = m.pair(t.x, t.u);
  const int next_action = state.frozen_policy ? (*state.frozen_policy)[t.x_next]
                                              : greedy_action(m, basis, state.theta, t.x_next);
  const Index k_next = m.pair(t.x_next, next_action);

  const double d = m.cost[k] + m.beta * q_value(basis, state.theta, k_next) -
                   q_value(basis, state.theta, k);
  const Vector v = m.beta * basis.row(k_next).transpose() - basis.row(k).transpose();

  state.gain.rank1_update(state.zeta, v, gamma);
  state.theta -= alpha * d * (state.gain.inverse() * state.zeta);
  state.zeta = lambda * m.beta * state.zeta +
               basis.row(m.pair(t.x_next, t.u_next)).transpose();
  ++state.n;

  std::vector<int> next_policy = greedy_actions(m, basis, state.theta);
  if (next_policy != state.policy) state.switch_accumulator += gamma;
  state.policy = std::move(next_policy);
}

void od_zap_q_step(const mdp::FiniteMDP& m, const Matrix& basis, ZapQState& state,
                   std::span<const Transition> batch, double alpha, double gamma_hat_value) {
  if (batch.empty()) throw InsufficientData("od_zap_q_step: empty batch");
  const Index dim = basis.cols();
  // Both averages are taken at the frozen parameter and its greedy policy.
  const std::vector<int> frozen = state.frozen_policy ? *state.frozen_policy
                                                      : greedy_actions(m, basis, state.theta);
  Vector f_mean = Vector::Zero(dim);
  Matrix grad_mean = Matrix::Zero(dim, dim);
  for (const Transition& t : batch) {
    const Index k = m.pair(t.x, t.u);
    const Index k_next = m.pair(t.x_next, frozen[t.x_next]);
    const Vector psi = basis.row(k).transpose();
    const double d = m.cost[k] + m.beta * q_value(basis, state.theta, k_next) -
                     q_value(basis, state.theta, k);
    f_mean += d * psi;
    grad_mean += psi * (m.beta * basis.row(k_next).transpose() - psi).transpose();
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  f_mean *= inv_n;
  grad_mean *= inv_n;

  state.gain.dense_update(grad_mean, gamma_hat_value);
  state.theta -= alpha * (state.gain.inverse() * f_mean);
  ++state.n;

  std::vector<int> next_policy = greedy_actions(m, basis, state.theta);
  if (next_policy != state.policy) state.switch_accumulator += gamma_hat_value;
  state.policy = std::move(next_policy);
}

Vector c_hat(const Vector& varpi, const Matrix& a_hat, const Vector& theta) {
  if (varpi.size() != a_hat.rows() || theta.size() != a_hat.cols())
    throw DimensionMismatch("c_hat: size mismatch");
  if ((varpi.array() <= 0.0).any())
    throw ZeroStationaryMass("c_hat: stationary pmf must be strictly positive");
  return -(varpi.cwiseInverse().asDiagonal() * (a_hat * theta));
}

double q3_diagnostic(const ZapQState& state) { return state.switch_accumulator; }

}  // namespace zapsa::qlearn
