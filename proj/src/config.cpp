#include "itemlab/config.hpp"

#include <cstdio>
#include <fstream>

#include "itemlab/error.hpp"
#include "itemlab/hash.hpp"
#include "itemlab/pair_builder.hpp"

namespace itemlab {

double RunConfig::alpha_for(Dimension d) const {
  auto it = alpha_overrides.find(d);
  return it == alpha_overrides.end() ? default_alpha(d) : it->second;
}

namespace {

std::string trim(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorCode::ConfigError, "config key '" + key + "' expects a boolean");
}

double parse_number(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "config key '" + key + "' expects a number");
  }
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

void apply_config_line(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "provider") {
    if (value != "mock" && value != "http") {
      throw Error(ErrorCode::ConfigError, "provider must be 'mock' or 'http'");
    }
    config.provider = value;
  } else if (key == "endpoint") {
    config.endpoint = value;
  } else if (key == "model") {
    config.model = value;
  } else if (key == "temperature") {
    config.temperature = parse_number(value, key);
  } else if (key == "max_retries") {
    config.max_retries = static_cast<int>(parse_number(value, key));
  } else if (key == "concurrency") {
    config.concurrency = static_cast<int>(parse_number(value, key));
  } else if (key == "credential_env") {
    config.credential_env = value;
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else if (key == "cache_dir") {
    config.cache_dir = value;
  } else if (key == "templates_dir") {
    config.templates_dir = value;
  } else if (key == "mock_script") {
    config.mock_script = value;
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_number(value, key));
  } else if (key == "transcripts") {
    config.keep_transcripts = parse_bool(value, key);
  } else if (key == "cache") {
    config.cache_enabled = parse_bool(value, key);
  } else if (key == "min_profiles") {
    config.min_profiles = static_cast<int>(parse_number(value, key));
  } else if (key == "alpha_tc") {
    config.alpha_overrides[Dimension::TC] = parse_number(value, key);
  } else if (key == "alpha_df") {
    config.alpha_overrides[Dimension::DF] = parse_number(value, key);
  } else if (key == "alpha_dc") {
    config.alpha_overrides[Dimension::DC] = parse_number(value, key);
  } else if (key == "alpha_de") {
    config.alpha_overrides[Dimension::DE] = parse_number(value, key);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  }
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "path not found: " + path.string());
  }
  RunConfig config;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError,
                  path.filename().string() + " line " + std::to_string(line_number) +
                      ": expected 'key = value'");
    }
    apply_config_line(config, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
  return config;
}

std::string config_hash(const RunConfig& config) {
  std::string canonical;
  canonical += "provider=" + config.provider + "\n";
  canonical += "endpoint=" + config.endpoint + "\n";
  canonical += "model=" + config.model + "\n";
  canonical += "temperature=" + format_double(config.temperature) + "\n";
  canonical += "seed=" + std::to_string(config.seed) + "\n";
  canonical += "transcripts=" + std::string(config.keep_transcripts ? "true" : "false") + "\n";
  canonical += "min_profiles=" + std::to_string(config.min_profiles) + "\n";
  canonical += "mock_script=" + config.mock_script.string() + "\n";
  for (Dimension d : {Dimension::TC, Dimension::DF, Dimension::DC, Dimension::DE}) {
    canonical += "alpha_" + to_string(d) + "=" + format_double(config.alpha_for(d)) + "\n";
  }
  return sha256_hex(canonical);
}

}  // namespace itemlab
