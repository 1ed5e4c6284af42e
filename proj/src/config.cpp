#include "zapsa/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace zapsa::config {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {
    "env",      "algorithm", "beta",   "g",        "rho",      "b",       "lambda",
    "steps",    "trials",    "seed",   "snapshots", "reward_cap", "batch", "bins",
    "init_low", "init_high", "edges",  "gains",    "sigma",    "drift",   "window",
    "basis_dim", "n_paths",  "horizon", "out_dir"};

json to_canonical(const RunConfig& c) {
  json j;
  j["env"] = c.env;
  j["algorithm"] = c.algorithm;
  j["beta"] = c.beta;
  j["g"] = c.gain_or_default();
  j["rho"] = c.rho;
  j["b"] = c.b;
  j["lambda"] = c.lambda;
  j["steps"] = c.steps;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["snapshots"] = c.snapshots;
  if (c.reward_cap)
    j["reward_cap"] = *c.reward_cap;
  else
    j["reward_cap"] = nullptr;
  j["batch"] = c.batch;
  j["bins"] = c.bins;
  j["init_low"] = c.init_low_or_default();
  j["init_high"] = c.init_high_or_default();
  j["edges"] = json::array();
  for (const auto& [a, b2] : c.edges) j["edges"].push_back({a, b2});
  j["gains"] = c.gains;
  j["sigma"] = c.sigma;
  j["drift"] = c.drift;
  j["window"] = c.window;
  j["basis_dim"] = c.basis_dim;
  j["n_paths"] = c.n_paths;
  j["horizon"] = c.horizon;
  // out_dir is deliberately not part of the canonical form: the hash
  // identifies the experiment, not where its files land.
  return j;
}

void assign_from_json(RunConfig& c, const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (!kKnownKeys.count(key)) throw ConfigError("unknown config key: " + key);
    try {
      if (key == "env") c.env = value.get<std::string>();
      else if (key == "algorithm") c.algorithm = value.get<std::string>();
      else if (key == "beta") c.beta = value.get<double>();
      else if (key == "g") c.g = value.get<double>();  // optional: keeps per-algorithm default
      else if (key == "rho") c.rho = value.get<double>();
      else if (key == "b") c.b = value.get<double>();
      else if (key == "lambda") c.lambda = value.get<double>();
      else if (key == "steps") c.steps = value.get<long>();
      else if (key == "trials") c.trials = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "snapshots") c.snapshots = value.get<std::vector<long>>();
      else if (key == "reward_cap") {
        if (value.is_null()) c.reward_cap.reset();
        else c.reward_cap = value.get<double>();
      } else if (key == "batch") c.batch = value.get<int>();
      else if (key == "bins") c.bins = value.get<int>();
      else if (key == "init_low") c.init_low = value.get<double>();
      else if (key == "init_high") c.init_high = value.get<double>();
      else if (key == "edges") {
        c.edges.clear();
        for (const auto& e : value) c.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      } else if (key == "gains") c.gains = value.get<std::vector<double>>();
      else if (key == "sigma") c.sigma = value.get<double>();
      else if (key == "drift") c.drift = value.get<double>();
      else if (key == "window") c.window = value.get<int>();
      else if (key == "basis_dim") c.basis_dim = value.get<int>();
      else if (key == "n_paths") c.n_paths = value.get<int>();
      else if (key == "horizon") c.horizon = value.get<int>();
      else if (key == "out_dir") c.out_dir = value.get<std::string>();
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

}  // namespace

double RunConfig::gain_or_default() const {
  if (g) return *g;
  return algorithm == "gq0" ? 100.0 : 1.0;
}

double RunConfig::init_low_or_default() const {
  if (init_low) return *init_low;
  return beta <= 0.9 ? -1e3 : -1e4;
}

double RunConfig::init_high_or_default() const {
  if (init_high) return *init_high;
  return beta <= 0.9 ? 1e3 : 1e4;
}

std::vector<double> RunConfig::gain_grid_or_default() const {
  if (!gains.empty()) return gains;
  return {0.6, 1,  2,   5,   10,  20,  30,  40,  45,  50,   60,   70,
          80,  90, 100, 150, 200, 300, 500, 700, 900, 1000, 1500, 2000};
}

std::string RunConfig::canonical_json() const { return to_canonical(*this).dump(); }

std::string RunConfig::hash() const {
  const std::string text = canonical_json();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

RunConfig from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  // A run manifest is accepted directly: its embedded config reproduces the
  // run that wrote it.
  if (j.contains("config_hash") && j.contains("config")) j = j.at("config");
  RunConfig c;
  assign_from_json(c, j);
  validate(c);
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  json j;
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;  // bare strings allowed unquoted on the command line
  }
  j[key] = parsed;
  assign_from_json(cfg, j);
}

void validate(const RunConfig& cfg) {
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) throw ConfigError("beta must lie in [0,1)");
  if (cfg.steps < 1) throw ConfigError("steps must be >= 1");
  if (cfg.trials < 2) throw ConfigError("trials must be >= 2");
  if (!(cfg.rho > 0.5 && cfg.rho <= 1.0)) throw ConfigError("rho must lie in (0.5,1]");
  if (cfg.g && !(*cfg.g > 0)) throw ConfigError("g must be positive");
  if (cfg.b < 0) throw ConfigError("b must be >= 0");
  if (!(cfg.lambda >= 0 && cfg.lambda <= 1)) throw ConfigError("lambda must lie in [0,1]");
  if (cfg.batch < 1) throw ConfigError("batch must be >= 1");
  if (cfg.bins < 1) throw ConfigError("bins must be >= 1");
  if (cfg.window < 1) throw ConfigError("window must be >= 1");
  if (cfg.basis_dim < 1 || cfg.basis_dim > 10) throw ConfigError("basis_dim must lie in [1,10]");
  if (cfg.n_paths < 1) throw ConfigError("n_paths must be >= 1");
  if (cfg.horizon < 0) throw ConfigError("horizon must be >= 0");
  if (!(cfg.sigma > 0)) throw ConfigError("sigma must be positive");
  if (cfg.init_low_or_default() > cfg.init_high_or_default())
    throw ConfigError("init box is empty");
}

}  // namespace zapsa::config
