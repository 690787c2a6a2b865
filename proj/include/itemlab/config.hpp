#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "itemlab/domain.hpp"

namespace itemlab {

inline constexpr const char* kToolVersion = "0.1.0";

// Shipped defaults; the config snapshot test pins these.
inline constexpr double kDefaultTemperature = 1.0;
inline constexpr int kDefaultMinProfiles = 10;

struct RunConfig {
  std::string provider = "mock";  // mock | http
  std::string endpoint;
  std::string model = "gpt-4o-2024-05-13";
  double temperature = kDefaultTemperature;
  int max_retries = 2;
  int concurrency = 1;
  std::string credential_env = "ITEMLAB_API_KEY";
  std::filesystem::path out_dir = "out";
  std::filesystem::path cache_dir;  // default: <out_dir>/cache
  std::filesystem::path templates_dir;
  std::filesystem::path mock_script;
  std::uint64_t seed = 0;
  bool keep_transcripts = true;
  bool cache_enabled = true;
  int min_profiles = kDefaultMinProfiles;
  std::map<Dimension, double> alpha_overrides;

  std::filesystem::path effective_cache_dir() const {
    return cache_dir.empty() ? out_dir / "cache" : cache_dir;
  }
  double alpha_for(Dimension d) const;
};

// Plain key-value config file: "key = value", '#' comments. Unknown keys
// are rejected.
RunConfig load_config_file(const std::filesystem::path& path);
void apply_config_line(RunConfig& config, const std::string& key, const std::string& value);

// Hash over the semantic run parameters (provider, model, temperature,
// seed, alphas, transcript mode, mock script). Output and cache locations
// and performance knobs stay out so relocated or resumed runs match.
std::string config_hash(const RunConfig& config);

}  // namespace itemlab
