#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "gvae/baselines.hpp"
#include "gvae/bigraph.hpp"
#include "gvae/synth.hpp"
#include "gvae/train.hpp"

namespace gvae {

// Every tunable in one place, addressed by flat dotted keys. The root seed
// is split per purpose (init / split / noise / dropout) downstream.
struct AppConfig {
  std::uint64_t seed = 42;
  std::string data_path;  // empty = generate synthetic data in memory

  SyntheticSpec synth;
  SplitFractions split;
  TrainConfig train;
  BaselineHyper baseline;
  bool stable_timings = false;
};

struct ConfigKey {
  std::string key;
  std::string description;
  std::string default_value;
};

// The full key table, used for --help and unknown-key rejection.
const std::vector<ConfigKey>& config_keys();

// Parses a flat {"dotted.key": value} object; unknown keys are errors.
AppConfig config_from_json(const nlohmann::json& j);
AppConfig load_config_file(const std::filesystem::path& path);

// Applies a single key; value arrives as a JSON scalar.
void apply_config_key(AppConfig& config, const std::string& key,
                      const nlohmann::json& value);

nlohmann::json config_to_json(const AppConfig& config);

std::string loss_mode_to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& name);

// Seeds propagated from the root seed into sub-components.
void sync_seeds(AppConfig& config);

}  // namespace gvae
