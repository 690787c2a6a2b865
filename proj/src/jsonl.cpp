#include "itemlab/jsonl.hpp"

#include "itemlab/error.hpp"

namespace itemlab {

json FileHeader::to_json() const {
  return json{{"_type", "header"},
              {"tool", "itemlab"},
              {"version", version},
              {"config_hash", config_hash},
              {"seed", seed}};
}

bool is_header_line(const json& value) {
  return value.is_object() && value.contains("_type") && value["_type"] == "header";
}

std::vector<std::pair<json, int>> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "path not found: " + path.string());
  }
  std::vector<std::pair<json, int>> records;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json value = json::parse(line, nullptr, false);
    if (value.is_discarded()) {
      throw Error(ErrorCode::MalformedRecord,
                  path.filename().string() + " line " + std::to_string(line_number) +
                      ": not valid JSON");
    }
    if (is_header_line(value)) continue;
    records.emplace_back(std::move(value), line_number);
  }
  return records;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, const FileHeader& header,
                         bool append) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  bool exists = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) {
    throw Error(ErrorCode::IoError, "cannot open for writing: " + path.string());
  }
  if (!append || !exists) {
    out_ << header.to_json().dump() << "\n";
  }
}

void JsonlWriter::write(const json& value) { out_ << value.dump() << "\n"; }

void JsonlWriter::flush() { out_.flush(); }

}  // namespace itemlab
