#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "zapsa/common.hpp"

namespace zapsa::mdp {

// Finite controlled Markov model. Costs are stored internally with the
// minimization convention (cost = -reward); loaders and reports convert.
//
// State-action pairs are enumerated lexicographically (state index first,
// then action id); `kernel` row k is the transition law of pair k over
// states, and `cost[k]` its one-step cost.
struct FiniteMDP {
  int n_states = 0;
  std::vector<std::vector<int>> feasible_actions;  // per state, ascending action ids
  Matrix kernel;                                   // d x n_states
  Vector cost;                                     // d
  double beta = 0.0;

  std::vector<std::pair<int, int>> pairs;      // k -> (state, action id)
  std::vector<std::vector<Index>> pair_index;  // [state][slot] -> k

  // Optional graph metadata for presets built from an edge list (1-based
  // node labels); round-trips through the JSON format.
  std::vector<std::pair<int, int>> edges;

  Index d() const { return static_cast<Index>(pairs.size()); }
  Index pair(int state, int action) const;  // throws InfeasibleAction

  void validate() const;
};

// Builds pair bookkeeping from feasible_actions; call after filling fields.
void index_pairs(FiniteMDP& mdp);

struct Policy {
  enum class Kind { Deterministic, Randomized, Product };
  Kind kind = Kind::Deterministic;

  std::vector<int> actions;                             // Deterministic
  std::vector<std::pair<std::size_t, double>> mixture;  // Randomized: (policy index, weight)
  std::vector<std::vector<double>> state_pmfs;          // Product: aligned to feasible_actions

  static Policy deterministic(std::vector<int> actions);
  static Policy randomized(std::vector<std::pair<std::size_t, double>> mixture);
  static Policy product(std::vector<std::vector<double>> state_pmfs);
  static Policy uniform(const FiniteMDP& mdp);
};

// Deterministic policies enumerated lexicographically by per-state action
// slot (state 0 most significant).
std::size_t policy_count(const FiniteMDP& mdp);
Policy enumerate_policy(const FiniteMDP& mdp, std::size_t index);
std::size_t policy_index_of(const FiniteMDP& mdp, const Policy& deterministic);

// Substitution operator S_phi as an n_states x d matrix; randomized kinds
// average into a per-state pmf over pairs.
Matrix substitution_matrix(const FiniteMDP& mdp, const Policy& phi);

struct PolicyMatrices {
  Matrix state_chain;  // P_phi = S_phi P,  n_states x n_states
  Matrix pair_chain;   // P S_phi,          d x d
};
PolicyMatrices policy_matrices(const FiniteMDP& mdp, const Policy& phi);

// Fixed-policy value h_phi = (I - beta P_phi)^-1 S_phi c.
Vector value_of_policy(const FiniteMDP& mdp, const Policy& phi);

// Value iteration on the Q-function to fixed-point residual <= tol.
Vector solve_q_star(const FiniteMDP& mdp, double tol);

// Optimal Q-function for an arbitrary cost table (residual <= 1e-10).
Vector q_map(const FiniteMDP& mdp, const Vector& varsigma);

// Inverse of q_map: the cost table whose optimal Q-function is q.
Vector q_inverse(const FiniteMDP& mdp, const Vector& q);

// (sum_i mu(i) [I - beta P S_phi_i])^-1 for a pmf over deterministic-policy
// indices.
Matrix dq_mu(const FiniteMDP& mdp, const std::vector<std::pair<std::size_t, double>>& mu);

// Per-state argmin of q; ties resolved to the lowest action id.
Policy greedy_policy(const FiniteMDP& mdp, const Vector& q);

// Per-state minimum of q over feasible actions.
Vector min_over_actions(const FiniteMDP& mdp, const Vector& q);

struct BellmanError {
  Vector table;    // theta - c - betaP min theta (cost convention)
  double max_abs;  // identical in cost and reward units
};
BellmanError bellman_error(const FiniteMDP& mdp, const Vector& theta);

// Stochastic-shortest-path preset on an undirected 6-node graph. Actions are
// targets (self-loop plus each neighbor); a move reaches its target with
// probability `move_prob`, otherwise lands uniformly on a neighbor. Rewards:
// 0 on self-loops away from node 6, -100 entering 5 from 4, +100 entering 6,
// -5 otherwise; they are negated into costs.
struct SixStateConfig {
  std::vector<std::pair<int, int>> edges = {{1, 2}, {1, 3}, {2, 4}, {3, 6}, {4, 5}, {5, 6}};
  double move_prob = 0.8;
  double beta = 0.8;
};
FiniteMDP build_six_state(const SixStateConfig& config = {});

// JSON round trip (states, actions with kernel rows and rewards, beta,
// optional edge metadata).
std::string to_json(const FiniteMDP& mdp);
FiniteMDP from_json(const std::string& text);
FiniteMDP load_file(const std::string& path);
void save_file(const FiniteMDP& mdp, const std::string& path);

}  // namespace zapsa::mdp
