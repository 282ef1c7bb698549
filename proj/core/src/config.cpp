#include "ibandit/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ibandit/csv.hpp"

namespace ib {

namespace {

const std::set<std::string> kPolicyNames = {"influence_cb", "linucb",  "lints",      "uniform",
                                            "design",       "sgd_explore", "sgd_exploit", "random",
                                            "similarity",   "ridge_linkpred"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  const std::string& str(const std::string& key) const {
    const auto it = raw_.find(key);
    if (it != raw_.end()) return it->second;
    return config_defaults().at(key);
  }

  double real(const std::string& key) const {
    const auto& v = str(key);
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
      throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    return out;
  }

  int integer(const std::string& key) const {
    const auto& v = str(key);
    int out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
      throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    return out;
  }

  std::uint64_t u64(const std::string& key) const {
    const auto& v = str(key);
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
      throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + v + "'");
    }
    return out;
  }

  bool flag(const std::string& key) const {
    const auto v = lower(str(key));
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + str(key) + "'");
  }

 private:
  const RawConfig& raw_;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

template <typename Fn>
auto keyed(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> defaults = {
      {"env.source", "synthetic"},  {"env.graph", "ba"},        {"env.n", "500"},
      {"env.graph_param", "10"},    {"env.d_node", "8"},        {"env.structural", "true"},
      {"env.truth", "linear"},      {"env.tau", "4"},           {"env.edges", ""},
      {"env.features", ""},         {"env.arms", "64"},         {"env.d", "8"},
      {"env.holdout", "500"},       {"env.pool", "network"},    {"env.pool_size", "500"},
      {"policy.name", "influence_cb"}, {"policy.beta", "0.25"}, {"policy.C", "3"},
      {"policy.objective", "regret"}, {"policy.c_min", "1"},    {"policy.c_max", "9"},
      {"policy.gamma", "1"},        {"policy.warmup", "10"},    {"policy.epsilon", "1e-8"},
      {"policy.alpha", "2"},        {"policy.lambda", "1"},     {"policy.inner", "comblinucb"},
      {"policy.sigma", "1"},        {"policy.lr", "0.1"},       {"policy.lambda_lp", "1"},
      {"run.T", "2000"},            {"run.k", "5"},             {"run.replications", "10"},
      {"run.seed", "0"},            {"run.snapshot_every", "0"}, {"run.timing", "false"},
  };
  return defaults;
}

RawConfig parse_config_text(std::string_view text, const std::string& origin) {
  RawConfig raw;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value, got '" + body + "'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!config_defaults().count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!raw.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return raw;
}

RawConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

std::string env_var_name(const std::string& key) {
  std::string out = "IB_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void apply_env_overrides(RawConfig& raw, const EnvLookup& lookup) {
  for (const auto& [key, fallback] : config_defaults()) {
    if (const char* value = lookup(env_var_name(key).c_str())) raw[key] = trim(value);
  }
}

std::string to_string(EnvSource source) {
  switch (source) {
    case EnvSource::Synthetic: return "synthetic";
    case EnvSource::External: return "external";
    case EnvSource::UnitArms: return "unit_arms";
  }
  return "?";
}

RunConfig resolve_config(const RawConfig& raw) {
  for (const auto& [key, value] : raw) {
    if (!config_defaults().count(key)) throw ConfigError("unknown key '" + key + "'");
  }
  const Reader r(raw);
  RunConfig c;

  // --- environment
  const std::string source = lower(r.str("env.source"));
  if (source == "synthetic") {
    c.env.source = EnvSource::Synthetic;
  } else if (source == "external") {
    c.env.source = EnvSource::External;
  } else if (source == "unit_arms") {
    c.env.source = EnvSource::UnitArms;
  } else {
    throw ConfigError("env.source: expected synthetic, external or unit_arms, got '" + source + "'");
  }
  auto& net = c.env.network;
  net.external = c.env.source == EnvSource::External;
  net.graph_kind = keyed("env.graph", [&] { return parse_graph_kind(r.str("env.graph")); });
  net.n = r.integer("env.n");
  net.graph_param = r.real("env.graph_param");
  net.d_node = r.integer("env.d_node");
  net.structural = r.flag("env.structural");
  net.truth = keyed("env.truth", [&] { return parse_truth_kind(r.str("env.truth")); });
  net.tau = r.real("env.tau");
  net.edges_path = r.str("env.edges");
  net.features_path = r.str("env.features");
  c.env.arms = r.integer("env.arms");
  c.env.arm_dim = r.integer("env.d");
  c.env.holdout = r.integer("env.holdout");
  c.env.pool = keyed("env.pool", [&] { return parse_pool_mode(r.str("env.pool")); });
  c.env.pool_size = r.integer("env.pool_size");

  require(net.n >= 2, "env.n", "must be >= 2");
  require(net.d_node >= 1, "env.d_node", "must be >= 1");
  require(net.tau > 0.0, "env.tau", "must be > 0");
  require(c.env.holdout >= 0, "env.holdout", "must be >= 0");
  require(c.env.pool_size >= 1, "env.pool_size", "must be >= 1");
  if (net.external) {
    require(!net.edges_path.empty(), "env.edges", "required when env.source=external");
    require(!net.features_path.empty(), "env.features", "required when env.source=external");
  }
  if (c.env.source == EnvSource::UnitArms) {
    require(c.env.arms >= 2, "env.arms", "must be >= 2");
    require(c.env.arm_dim >= 2, "env.d", "must be >= 2");
    require(c.env.pool != PoolMode::Neighbor, "env.pool", "neighbor pools need a graph; unit_arms has none");
  }

  // --- run
  c.T = r.integer("run.T");
  c.k = r.integer("run.k");
  c.replications = r.integer("run.replications");
  c.seed = r.u64("run.seed");
  c.snapshot_every = r.integer("run.snapshot_every");
  c.timing = r.flag("run.timing");
  require(c.T >= 0, "run.T", "must be >= 0");
  require(c.k >= 1, "run.k", "must be >= 1");
  require(c.replications >= 1, "run.replications", "must be >= 1");
  require(c.snapshot_every >= 0, "run.snapshot_every", "must be >= 0");
  if (c.env.pool == PoolMode::Network) {
    require(c.k <= c.env.pool_size, "run.k", "must not exceed env.pool_size");
  }
  if (c.env.source == EnvSource::UnitArms) {
    require(c.k <= c.env.arms, "run.k", "must not exceed env.arms");
  }

  // --- policy
  auto& p = c.policy;
  p.name = lower(r.str("policy.name"));
  require(kPolicyNames.count(p.name) > 0, "policy.name", "unknown policy '" + p.name + "'");
  p.beta = r.real("policy.beta");
  require(p.beta >= 0.0 && p.beta <= 1.0, "policy.beta", "must lie in [0, 1]");
  if (lower(r.str("policy.C")) == "adaptive") {
    p.c.reset();
  } else {
    p.c = r.real("policy.C");
    require(*p.c > 0.0, "policy.C", "must be > 0 (or 'adaptive')");
  }
  p.update_c.objective = keyed("policy.objective", [&] { return parse_objective(r.str("policy.objective")); });
  p.update_c.c_min = r.real("policy.c_min");
  p.update_c.c_max = r.real("policy.c_max");
  p.update_c.gamma = r.real("policy.gamma");
  p.update_c.warmup = r.integer("policy.warmup");
  p.update_c.epsilon = r.real("policy.epsilon");
  require(p.update_c.c_min > 0.0, "policy.c_min", "must be > 0");
  require(p.update_c.c_min < p.update_c.c_max, "policy.c_max", "must exceed policy.c_min");
  require(p.update_c.warmup >= 0, "policy.warmup", "must be >= 0");
  require(p.update_c.epsilon > 0.0, "policy.epsilon", "must be > 0");
  p.alpha = r.real("policy.alpha");
  p.lambda = r.real("policy.lambda");
  p.sigma = r.real("policy.sigma");
  p.lr = r.real("policy.lr");
  p.lambda_lp = r.real("policy.lambda_lp");
  require(p.alpha >= 0.0, "policy.alpha", "must be >= 0");
  require(p.lambda > 0.0, "policy.lambda", "must be > 0");
  require(p.sigma >= 0.0, "policy.sigma", "must be >= 0");
  require(p.lr > 0.0, "policy.lr", "must be > 0");
  require(p.lambda_lp >= 0.0, "policy.lambda_lp", "must be >= 0");
  const std::string inner = lower(r.str("policy.inner"));
  if (inner == "comblinucb" || inner == "linucb") {
    p.inner = InnerPolicy::CombLinUcb;
  } else if (inner == "lints" || inner == "combints") {
    p.inner = InnerPolicy::LinTs;
  } else {
    throw ConfigError("policy.inner: expected comblinucb or lints, got '" + inner + "'");
  }
  if (p.name == "design") {
    require(c.env.pool == PoolMode::Fixed, "policy.name", "design requires env.pool=fixed");
  }
  if (p.name == "similarity" || p.name == "ridge_linkpred") {
    require(c.env.source != EnvSource::UnitArms, "policy.name", p.name + " needs a graph; unit_arms has none");
  }
  return c;
}

std::string RunConfig::environment_key() const {
  std::ostringstream os;
  os << "env.source=" << to_string(env.source) << '\n';
  if (env.source == EnvSource::UnitArms) {
    os << "env.arms=" << env.arms << '\n' << "env.d=" << env.arm_dim << '\n';
  } else {
    os << "env.d_node=" << env.network.d_node << '\n';
    if (env.source == EnvSource::External) {
      os << "env.edges=" << env.network.edges_path.string() << '\n';
      os << "env.features=" << env.network.features_path.string() << '\n';
    } else {
      os << "env.graph=" << to_string(env.network.graph_kind) << '\n';
      os << "env.graph_param=" << csv::format_double(env.network.graph_param) << '\n';
      os << "env.n=" << env.network.n << '\n';
    }
    os << "env.structural=" << (env.network.structural ? "true" : "false") << '\n';
    os << "env.tau=" << csv::format_double(env.network.tau) << '\n';
    os << "env.truth=" << to_string(env.network.truth) << '\n';
  }
  os << "env.holdout=" << env.holdout << '\n';
  os << "env.pool=" << to_string(env.pool) << '\n';
  os << "env.pool_size=" << env.pool_size << '\n';
  os << "run.k=" << k << '\n';
  os << "run.seed=" << seed << '\n';
  return os.str();
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << environment_key();
  const auto& p = policy;
  os << "policy.name=" << p.name << '\n';
  os << "policy.beta=" << csv::format_double(p.beta) << '\n';
  os << "policy.C=" << c_or_objective() << '\n';
  if (!p.c) {
    os << "policy.c_min=" << csv::format_double(p.update_c.c_min) << '\n';
    os << "policy.c_max=" << csv::format_double(p.update_c.c_max) << '\n';
    os << "policy.gamma=" << csv::format_double(p.update_c.gamma) << '\n';
    os << "policy.warmup=" << p.update_c.warmup << '\n';
    os << "policy.epsilon=" << csv::format_double(p.update_c.epsilon) << '\n';
  }
  os << "policy.alpha=" << csv::format_double(p.alpha) << '\n';
  os << "policy.lambda=" << csv::format_double(p.lambda) << '\n';
  os << "policy.inner=" << (p.inner == InnerPolicy::CombLinUcb ? "comblinucb" : "lints") << '\n';
  os << "policy.sigma=" << csv::format_double(p.sigma) << '\n';
  os << "policy.lr=" << csv::format_double(p.lr) << '\n';
  os << "policy.lambda_lp=" << csv::format_double(p.lambda_lp) << '\n';
  os << "run.T=" << T << '\n';
  os << "run.snapshot_every=" << snapshot_every << '\n';
  return os.str();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

std::string RunConfig::c_or_objective() const {
  return policy.c ? csv::format_double(*policy.c) : to_string(policy.update_c.objective);
}

std::vector<RunConfig> expand_sweep(const RawConfig& raw) {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& [key, value] : raw) {
    std::vector<std::string> values;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) values.push_back(trim(item));
    if (value.empty()) values.assign(1, "");
    if (values.empty() || std::any_of(values.begin(), values.end(), [&](const std::string& v) {
          return v.empty() && !value.empty();
        })) {
      throw ConfigError(key + ": empty entry in value list '" + value + "'");
    }
    axes.emplace_back(key, std::move(values));
  }

  std::vector<RunConfig> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    RawConfig point;
    for (std::size_t a = 0; a < axes.size(); ++a) point[axes[a].first] = axes[a].second[idx[a]];
    out.push_back(resolve_config(point));
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

}  // namespace ib
