#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ibandit/envgen.hpp"
#include "ibandit/policies.hpp"
#include "ibandit/simcore.hpp"

namespace ib {

/// Flat `section.key = value` pairs as read from a config file.
using RawConfig = std::map<std::string, std::string>;

/// Parses key=value lines. `#` starts a comment; blank lines are ignored.
/// Unknown keys and duplicates raise ConfigError naming the key and line.
RawConfig parse_config_text(std::string_view text, const std::string& origin = "<config>");
RawConfig load_config_file(const std::filesystem::path& path);

/// Every key the runner understands, with its default value.
const std::map<std::string, std::string>& config_defaults();

/// `policy.beta` -> `IB_POLICY_BETA`.
std::string env_var_name(const std::string& key);

using EnvLookup = std::function<const char*(const char*)>;

/// Replaces values with any matching IB_* environment variables.
void apply_env_overrides(RawConfig& raw, const EnvLookup& lookup);

enum class EnvSource { Synthetic, External, UnitArms };

std::string to_string(EnvSource source);

struct EnvSpec {
  EnvSource source = EnvSource::Synthetic;
  NetworkSpec network;
  int arms = 64;      // unit_arms only
  int arm_dim = 8;    // unit_arms only
  int holdout = 500;
  PoolMode pool = PoolMode::Network;
  int pool_size = 500;
};

struct PolicySpec {
  std::string name = "influence_cb";
  double beta = 0.25;
  std::optional<double> c = 3.0;
  UpdateCParams update_c;  // used when c is empty
  double alpha = 2.0;
  double lambda = 1.0;
  InnerPolicy inner = InnerPolicy::CombLinUcb;
  double sigma = 1.0;
  double lr = 0.1;
  double lambda_lp = 1.0;
};

struct RunConfig {
  EnvSpec env;
  PolicySpec policy;
  int T = 2000;
  int k = 5;
  int replications = 10;
  std::uint64_t seed = 0;
  int snapshot_every = 0;
  bool timing = false;

  /// Sorted key=value listing of every resolved setting.
  std::string canonical() const;
  /// Same, restricted to the settings that determine the environment.
  std::string environment_key() const;
  /// FNV-1a of canonical(), 16 hex digits.
  std::string hash() const;
  /// Fixed C value or the adaptive objective name.
  std::string c_or_objective() const;
};

/// Merges `raw` over the defaults and validates everything that can be
/// checked before an environment exists.
RunConfig resolve_config(const RawConfig& raw);

/// Cartesian product over comma-separated values, in sorted key order with
/// the last key varying fastest. Each point is resolved and validated.
std::vector<RunConfig> expand_sweep(const RawConfig& raw);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace ib
