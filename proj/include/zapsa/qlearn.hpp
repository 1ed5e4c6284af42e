#pragma once

#include <optional>
#include <span>

#include "zapsa/common.hpp"
#include "zapsa/mdp.hpp"
#include "zapsa/numerics.hpp"
#include "zapsa/rng.hpp"
#include "zapsa/sa.hpp"

namespace zapsa::qlearn {

struct Transition {
  int x;
  int u;       // action id taken at x
  int x_next;
  int u_next;  // action id the behavior policy takes at x_next
};

// Off-policy sampling distribution: one pmf per state over feasible actions.
struct BehaviorPolicy {
  std::vector<std::vector<double>> pmfs;  // aligned with feasible_actions

  static BehaviorPolicy uniform(const mdp::FiniteMDP& m);
  mdp::Policy as_policy() const { return mdp::Policy::product(pmfs); }
  int sample_action(const mdp::FiniteMDP& m, int x, Rng& rng) const;
};

int sample_next_state(const mdp::FiniteMDP& m, int x, int u, Rng& rng);
Transition sample_transition(const mdp::FiniteMDP& m, const BehaviorPolicy& behavior, int& x,
                             int& u, Rng& rng);

// Entrywise clamp of the parameter (the scalar-gain experiments project each
// reward-unit entry to (-inf, cap], i.e. a floor of -cap in cost units).
struct ProjectionBox {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  static ProjectionBox reward_cap(double cap) { return {-cap, std::numeric_limits<double>::infinity()}; }
  void apply(Vector& theta) const;
};

// --- Tabular scalar-gain algorithms -----------------------------------------

// theta(x,u) += alpha (c(x,u) + beta min_u' theta(x',u') - theta(x,u)).
void watkins_step(const mdp::FiniteMDP& m, Vector& theta, const Transition& t, double alpha,
                  const std::optional<ProjectionBox>& box = {});

struct SpeedyState {
  Vector theta;
  std::vector<Vector> prev_at_pair;  // full parameter at the pair's previous visit
  std::vector<long> visits;
  long n = 0;
};

SpeedyState make_speedy_state(const mdp::FiniteMDP& m, Vector theta0);

// Asynchronous form of the speedy recursion from the cited baseline: each
// pair runs the synchronous update on its own visit clock k = visits(x,u),
// with the empirical Bellman operator T q = c + beta min_u' q(x',u') applied
// to the current parameter and to the snapshot from the pair's previous
// visit:
//   theta(x,u) += alpha_k (T theta_prev - theta)(x,u)
//                 + (1-alpha_k) (T theta - T theta_prev)(x,u),
// alpha_k = 1/(k+1). A global one-step-back parameter makes the second term
// vanish and collapses the method to Watkins; the per-visit snapshot keeps
// the Bellman-image averaging that gives the method its rate.
// External-baseline recursion; the surrounding theory does not cover it.
void speedy_q_step(const mdp::FiniteMDP& m, SpeedyState& state, const Transition& t,
                   const std::optional<ProjectionBox>& box = {});

struct RpjState {
  Vector theta;
  Vector theta_bar;  // running uniform average, the reported estimate
  long n = 0;
};

// Watkins with alpha_n = n^-0.6 plus Ruppert-Polyak-Juditsky averaging.
void rpj_q_step(const mdp::FiniteMDP& m, RpjState& state, const Transition& t,
                const std::optional<ProjectionBox>& box = {});

// --- Matrix-gain family ------------------------------------------------------

struct GQState {
  Vector theta;
  Vector zeta;
  long n = 0;
};

GQState make_gq_state(const mdp::FiniteMDP& m, const Matrix& basis, Vector theta0, int x0,
                      int u0);

// d = c + beta min_u' Q(x',u') - Q(x,u); theta += alpha G zeta d;
// zeta <- lambda beta zeta + psi(x',u').
void g_q_lambda_step(const mdp::FiniteMDP& m, const Matrix& basis, GQState& state,
                     const Transition& t, const Matrix& G, double alpha, double lambda);

struct ZapQState {
  Vector theta;
  Vector zeta;
  num::TrackedInverse gain;
  std::vector<int> policy;       // greedy actions for theta_n
  double switch_accumulator = 0;  // sum of gamma_n over policy changes
  long n = 0;
  // Evaluation mode for diagnostics: fixes the policy used in the temporal
  // difference and in A_{n+1} instead of the greedy one.
  std::optional<std::vector<int>> frozen_policy;
};

ZapQState make_zap_q_state(const mdp::FiniteMDP& m, const Matrix& basis, Vector theta0, int x0,
                           int u0, num::TrackedInverse::Options options = num::TrackedInverse::Options());
ZapQState make_zap_q_state(const mdp::FiniteMDP& m, const Matrix& basis, Vector theta0, int x0,
                           int u0, Matrix a0, num::TrackedInverse::Options options = num::TrackedInverse::Options());

// One pass of the two-time-scale update: greedy action at x_next, temporal
// difference, rank-one matrix sample zeta (beta psi' - psi)^T folded into the
// gain estimate, Newton-style parameter step, eligibility update.
void zap_q_lambda_step(const mdp::FiniteMDP& m, const Matrix& basis, ZapQState& state,
                       const Transition& t, double alpha, double gamma, double lambda);

// Batched variant (lambda = 0): averages the update direction and Jacobian
// samples at frozen theta, then applies a single gain/parameter update with
// (alpha_i, gamma_hat_i).
void od_zap_q_step(const mdp::FiniteMDP& m, const Matrix& basis, ZapQState& state,
                   std::span<const Transition> batch, double alpha, double gamma_hat_value);

// C_hat = -Pi^-1 A_hat theta for diagonal Pi = diag(varpi).
Vector c_hat(const Vector& varpi, const Matrix& a_hat, const Vector& theta);

// Accumulated sum gamma_n 1{phi_{n+1} != phi_n}; bounded accumulation is the
// plausibility check for the policy-switching assumption.
double q3_diagnostic(const ZapQState& state);

}  // namespace zapsa::qlearn
