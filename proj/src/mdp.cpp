#include "zapsa/mdp.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace zapsa::mdp {

Index FiniteMDP::pair(int state, int action) const {
  if (state < 0 || state >= n_states)
    throw InfeasibleAction("pair: state " + std::to_string(state) + " out of range");
  const auto& feasible = feasible_actions[state];
  const auto it = std::lower_bound(feasible.begin(), feasible.end(), action);
  if (it == feasible.end() || *it != action)
    throw InfeasibleAction("pair: action " + std::to_string(action) +
                           " infeasible in state " + std::to_string(state));
  return pair_index[state][static_cast<std::size_t>(it - feasible.begin())];
}

void index_pairs(FiniteMDP& mdp) {
  mdp.pairs.clear();
  mdp.pair_index.assign(mdp.n_states, {});
  for (int x = 0; x < mdp.n_states; ++x) {
    for (int u : mdp.feasible_actions[x]) {
      mdp.pair_index[x].push_back(static_cast<Index>(mdp.pairs.size()));
      mdp.pairs.emplace_back(x, u);
    }
  }
}

void FiniteMDP::validate() const {
  if (n_states < 1) throw ConfigError("FiniteMDP: need at least one state");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("FiniteMDP: beta must lie in [0,1)");
  if (static_cast<int>(feasible_actions.size()) != n_states)
    throw ConfigError("FiniteMDP: feasible_actions size mismatch");
  for (int x = 0; x < n_states; ++x) {
    if (feasible_actions[x].empty())
      throw ConfigError("FiniteMDP: state " + std::to_string(x) + " has no actions");
    if (!std::is_sorted(feasible_actions[x].begin(), feasible_actions[x].end()))
      throw ConfigError("FiniteMDP: actions must be sorted ascending");
  }
  if (kernel.rows() != d() || kernel.cols() != n_states || cost.size() != d())
    throw ConfigError("FiniteMDP: kernel/cost dimensions inconsistent with pairs");
  for (Index k = 0; k < d(); ++k) {
    if ((kernel.row(k).array() < -1e-14).any())
      throw NotStochastic("FiniteMDP: negative kernel entry in row " + std::to_string(k));
    if (std::abs(kernel.row(k).sum() - 1.0) > 1e-10)
      throw NotStochastic("FiniteMDP: kernel row " + std::to_string(k) + " does not sum to 1");
  }
}

Policy Policy::deterministic(std::vector<int> actions) {
  Policy p;
  p.kind = Kind::Deterministic;
  p.actions = std::move(actions);
  return p;
}

Policy Policy::randomized(std::vector<std::pair<std::size_t, double>> mixture) {
  Policy p;
  p.kind = Kind::Randomized;
  p.mixture = std::move(mixture);
  double mass = 0.0;
  for (const auto& [idx, w] : p.mixture) {
    if (w < 0) throw ConfigError("Policy: negative mixture weight");
    mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-10) throw ConfigError("Policy: mixture weights must sum to 1");
  return p;
}

Policy Policy::product(std::vector<std::vector<double>> state_pmfs) {
  Policy p;
  p.kind = Kind::Product;
  p.state_pmfs = std::move(state_pmfs);
  for (const auto& pmf : p.state_pmfs) {
    double mass = 0.0;
    for (double w : pmf) {
      if (w < 0) throw ConfigError("Policy: negative pmf weight");
      mass += w;
    }
    if (std::abs(mass - 1.0) > 1e-10) throw ConfigError("Policy: state pmf must sum to 1");
  }
  return p;
}

Policy Policy::uniform(const FiniteMDP& mdp) {
  std::vector<std::vector<double>> pmfs(mdp.n_states);
  for (int x = 0; x < mdp.n_states; ++x)
    pmfs[x].assign(mdp.feasible_actions[x].size(),
                   1.0 / static_cast<double>(mdp.feasible_actions[x].size()));
  return Policy::product(std::move(pmfs));
}

std::size_t policy_count(const FiniteMDP& mdp) {
  std::size_t count = 1;
  for (const auto& feasible : mdp.feasible_actions) count *= feasible.size();
  return count;
}

Policy enumerate_policy(const FiniteMDP& mdp, std::size_t index) {
  if (index >= policy_count(mdp)) throw ConfigError("enumerate_policy: index out of range");
  std::vector<int> actions(mdp.n_states);
  for (int x = mdp.n_states - 1; x >= 0; --x) {
    const std::size_t radix = mdp.feasible_actions[x].size();
    actions[x] = mdp.feasible_actions[x][index % radix];
    index /= radix;
  }
  return Policy::deterministic(std::move(actions));
}

std::size_t policy_index_of(const FiniteMDP& mdp, const Policy& phi) {
  if (phi.kind != Policy::Kind::Deterministic)
    throw ConfigError("policy_index_of: deterministic policy required");
  std::size_t index = 0;
  for (int x = 0; x < mdp.n_states; ++x) {
    const auto& feasible = mdp.feasible_actions[x];
    const auto it = std::lower_bound(feasible.begin(), feasible.end(), phi.actions[x]);
    if (it == feasible.end() || *it != phi.actions[x])
      throw InfeasibleAction("policy_index_of: infeasible action");
    index = index * feasible.size() + static_cast<std::size_t>(it - feasible.begin());
  }
  return index;
}

Matrix substitution_matrix(const FiniteMDP& mdp, const Policy& phi) {
  Matrix s = Matrix::Zero(mdp.n_states, mdp.d());
  switch (phi.kind) {
    case Policy::Kind::Deterministic: {
      if (static_cast<int>(phi.actions.size()) != mdp.n_states)
        throw InfeasibleAction("substitution_matrix: policy size mismatch");
      for (int x = 0; x < mdp.n_states; ++x) s(x, mdp.pair(x, phi.actions[x])) = 1.0;
      break;
    }
    case Policy::Kind::Randomized: {
      for (const auto& [idx, w] : phi.mixture) {
        const Policy det = enumerate_policy(mdp, idx);
        for (int x = 0; x < mdp.n_states; ++x) s(x, mdp.pair(x, det.actions[x])) += w;
      }
      break;
    }
    case Policy::Kind::Product: {
      if (static_cast<int>(phi.state_pmfs.size()) != mdp.n_states)
        throw InfeasibleAction("substitution_matrix: pmf size mismatch");
      for (int x = 0; x < mdp.n_states; ++x) {
        const auto& pmf = phi.state_pmfs[x];
        if (pmf.size() != mdp.feasible_actions[x].size())
          throw InfeasibleAction("substitution_matrix: pmf not aligned with actions");
        for (std::size_t slot = 0; slot < pmf.size(); ++slot)
          s(x, mdp.pair_index[x][slot]) += pmf[slot];
      }
      break;
    }
  }
  return s;
}

PolicyMatrices policy_matrices(const FiniteMDP& mdp, const Policy& phi) {
  const Matrix s = substitution_matrix(mdp, phi);
  return {s * mdp.kernel, mdp.kernel * s};
}

Vector value_of_policy(const FiniteMDP& mdp, const Policy& phi) {
  const Matrix s = substitution_matrix(mdp, phi);
  const Matrix p_phi = s * mdp.kernel;
  const Matrix lhs = Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.beta * p_phi;
  return lhs.partialPivLu().solve(s * mdp.cost);
}

Vector min_over_actions(const FiniteMDP& mdp, const Vector& q) {
  Vector out(mdp.n_states);
  for (int x = 0; x < mdp.n_states; ++x) {
    double best = q[mdp.pair_index[x][0]];
    for (Index k : mdp.pair_index[x]) best = std::min(best, q[k]);
    out[x] = best;
  }
  return out;
}

namespace {

Vector bellman_operator(const FiniteMDP& mdp, const Vector& varsigma, const Vector& q) {
  return varsigma + mdp.beta * (mdp.kernel * min_over_actions(mdp, q));
}

Vector value_iterate(const FiniteMDP& mdp, const Vector& varsigma, double residual_tol) {
  Vector q = varsigma;
  if (mdp.beta == 0.0) return q;
  // Successive approximation is a beta-contraction: once the per-sweep change
  // is below tol*(1-beta)/(2 beta), the fixed-point residual is below tol.
  const double change_tol = residual_tol * (1.0 - mdp.beta) / (2.0 * mdp.beta);
  for (long sweep = 0; sweep < 20'000'000; ++sweep) {
    Vector next = bellman_operator(mdp, varsigma, q);
    const double change = (next - q).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (change <= change_tol) return q;
  }
  throw ConvergenceFailure("value_iterate: sweep budget exhausted");
}

}  // namespace

Vector solve_q_star(const FiniteMDP& mdp, double tol) {
  if (!(tol > 0)) throw ConfigError("solve_q_star: tol must be positive");
  return value_iterate(mdp, mdp.cost, tol);
}

Vector q_map(const FiniteMDP& mdp, const Vector& varsigma) {
  if (varsigma.size() != mdp.d()) throw DimensionMismatch("q_map: cost table size mismatch");
  return value_iterate(mdp, varsigma, 1e-10);
}

Vector q_inverse(const FiniteMDP& mdp, const Vector& q) {
  if (q.size() != mdp.d()) throw DimensionMismatch("q_inverse: table size mismatch");
  const Matrix ps = policy_matrices(mdp, greedy_policy(mdp, q)).pair_chain;
  return q - mdp.beta * (ps * q);
}

Matrix dq_mu(const FiniteMDP& mdp, const std::vector<std::pair<std::size_t, double>>& mu) {
  double mass = 0.0;
  Matrix m = Matrix::Zero(mdp.d(), mdp.d());
  for (const auto& [idx, w] : mu) {
    if (w < 0) throw ConfigError("dq_mu: negative weight");
    mass += w;
    const Matrix ps = policy_matrices(mdp, enumerate_policy(mdp, idx)).pair_chain;
    m += w * (Matrix::Identity(mdp.d(), mdp.d()) - mdp.beta * ps);
  }
  if (std::abs(mass - 1.0) > 1e-10) throw ConfigError("dq_mu: weights must sum to 1");
  return m.partialPivLu().solve(Matrix::Identity(mdp.d(), mdp.d()));
}

Policy greedy_policy(const FiniteMDP& mdp, const Vector& q) {
  if (q.size() != mdp.d()) throw DimensionMismatch("greedy_policy: table size mismatch");
  std::vector<int> actions(mdp.n_states);
  for (int x = 0; x < mdp.n_states; ++x) {
    int best_action = mdp.feasible_actions[x][0];
    double best = q[mdp.pair_index[x][0]];
    for (std::size_t slot = 1; slot < mdp.pair_index[x].size(); ++slot) {
      const double value = q[mdp.pair_index[x][slot]];
      if (value < best) {
        best = value;
        best_action = mdp.feasible_actions[x][slot];
      }
    }
    actions[x] = best_action;
  }
  return Policy::deterministic(std::move(actions));
}

BellmanError bellman_error(const FiniteMDP& mdp, const Vector& theta) {
  if (theta.size() != mdp.d()) throw DimensionMismatch("bellman_error: table size mismatch");
  Vector table = theta - bellman_operator(mdp, mdp.cost, theta);
  return {table, table.cwiseAbs().maxCoeff()};
}

FiniteMDP build_six_state(const SixStateConfig& config) {
  constexpr int n = 6;
  std::vector<std::set<int>> neighbors(n);
  for (const auto& [a, b] : config.edges) {
    if (a < 1 || a > n || b < 1 || b > n || a == b)
      throw ConfigError("build_six_state: invalid edge");
    neighbors[a - 1].insert(b - 1);
    neighbors[b - 1].insert(a - 1);
  }

  FiniteMDP mdp;
  mdp.n_states = n;
  mdp.beta = config.beta;
  mdp.edges = config.edges;
  mdp.feasible_actions.resize(n);
  for (int x = 0; x < n; ++x) {
    std::set<int> targets = neighbors[x];
    targets.insert(x);  // self-loop
    mdp.feasible_actions[x].assign(targets.begin(), targets.end());
  }
  index_pairs(mdp);

  mdp.kernel = Matrix::Zero(mdp.d(), n);
  mdp.cost = Vector::Zero(mdp.d());
  for (Index k = 0; k < mdp.d(); ++k) {
    const auto [x, target] = mdp.pairs[k];
    mdp.kernel(k, target) += config.move_prob;
    const double spill = (1.0 - config.move_prob) / static_cast<double>(neighbors[x].size());
    for (int y : neighbors[x]) mdp.kernel(k, y) += spill;

    double reward;
    if (target == x && x != 5)
      reward = 0.0;
    else if (x == 3 && target == 4)
      reward = -100.0;
    else if (target == 5)
      reward = 100.0;
    else
      reward = -5.0;
    mdp.cost[k] = -reward;
  }
  mdp.validate();
  return mdp;
}

std::string to_json(const FiniteMDP& mdp) {
  nlohmann::json j;
  j["n_states"] = mdp.n_states;
  j["beta"] = mdp.beta;
  if (!mdp.edges.empty()) {
    for (const auto& [a, b] : mdp.edges) j["edges"].push_back({a, b});
  }
  j["states"] = nlohmann::json::array();
  for (int x = 0; x < mdp.n_states; ++x) {
    nlohmann::json actions = nlohmann::json::array();
    for (std::size_t slot = 0; slot < mdp.feasible_actions[x].size(); ++slot) {
      const Index k = mdp.pair_index[x][slot];
      nlohmann::json a;
      a["id"] = mdp.feasible_actions[x][slot];
      a["reward"] = -mdp.cost[k];
      a["kernel"] = std::vector<double>(mdp.kernel.row(k).begin(), mdp.kernel.row(k).end());
      actions.push_back(std::move(a));
    }
    j["states"].push_back({{"actions", std::move(actions)}});
  }
  return j.dump(2);
}

FiniteMDP from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mdp json: ") + e.what());
  }
  FiniteMDP mdp;
  try {
    mdp.n_states = j.at("n_states").get<int>();
    mdp.beta = j.at("beta").get<double>();
    if (j.contains("edges"))
      for (const auto& e : j["edges"]) mdp.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    const auto& states = j.at("states");
    if (static_cast<int>(states.size()) != mdp.n_states)
      throw ConfigError("mdp json: states array size mismatch");
    mdp.feasible_actions.resize(mdp.n_states);
    std::vector<std::vector<double>> rows;
    std::vector<double> costs;
    for (int x = 0; x < mdp.n_states; ++x) {
      for (const auto& a : states[x].at("actions")) {
        mdp.feasible_actions[x].push_back(a.at("id").get<int>());
        costs.push_back(-a.at("reward").get<double>());
        rows.push_back(a.at("kernel").get<std::vector<double>>());
      }
      if (!std::is_sorted(mdp.feasible_actions[x].begin(), mdp.feasible_actions[x].end()))
        throw ConfigError("mdp json: action ids must be ascending");
    }
    index_pairs(mdp);
    mdp.kernel.resize(mdp.d(), mdp.n_states);
    mdp.cost.resize(mdp.d());
    for (Index k = 0; k < mdp.d(); ++k) {
      if (static_cast<int>(rows[k].size()) != mdp.n_states)
        throw ConfigError("mdp json: kernel row length mismatch");
      for (int y = 0; y < mdp.n_states; ++y) mdp.kernel(k, y) = rows[k][y];
      mdp.cost[k] = costs[k];
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mdp json: ") + e.what());
  }
  mdp.validate();
  return mdp;
}

FiniteMDP load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mdp file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

void save_file(const FiniteMDP& mdp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write mdp file: " + path);
  out << to_json(mdp) << "\n";
}

}  // namespace zapsa::mdp
