#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace itemlab {

// Insertion-ordered json keeps emitted files stable and human-diffable.
using json = nlohmann::ordered_json;

// First line of every emitted file; readers skip it.
struct FileHeader {
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;

  json to_json() const;
};

bool is_header_line(const json& value);

// Reads one JSON object per line, skipping blank lines and header objects.
// Returns objects paired with their 1-based line numbers.
std::vector<std::pair<json, int>> read_jsonl(const std::filesystem::path& path);

class JsonlWriter {
 public:
  JsonlWriter(const std::filesystem::path& path, const FileHeader& header,
              bool append = false);

  void write(const json& value);
  void flush();

 private:
  std::ofstream out_;
};

}  // namespace itemlab
