#include "itemlab/templates.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "itemlab/error.hpp"
#include "prompt_texts.hpp"

namespace itemlab {

namespace {

bool is_placeholder_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::string render_prompt(const std::string& template_text,
                          const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(template_text.size());
  std::size_t i = 0;
  while (i < template_text.size()) {
    char c = template_text[i];
    if (c != '{') {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < template_text.size() && is_placeholder_char(template_text[j])) ++j;
    if (j > i + 1 && j < template_text.size() && template_text[j] == '}') {
      std::string name = template_text.substr(i + 1, j - i - 1);
      auto it = bindings.find(name);
      if (it == bindings.end()) {
        throw Error(ErrorCode::UnboundPlaceholder, "no binding for {" + name + "}");
      }
      out += it->second;
      i = j + 1;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

TemplateStore TemplateStore::builtin() {
  TemplateStore store;
  store.templates_ = detail::builtin_templates();
  return store;
}

void TemplateStore::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::ConfigError, "template directory not found: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::ostringstream text;
    text << in.rdbuf();
    templates_[entry.path().stem().string()] = text.str();
  }
}

const std::string& TemplateStore::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error(ErrorCode::ConfigError, "unknown prompt template '" + name + "'");
  }
  return it->second;
}

std::vector<std::string> TemplateStore::names() const {
  std::vector<std::string> out;
  out.reserve(templates_.size());
  for (const auto& [name, _] : templates_) out.push_back(name);
  return out;
}

}  // namespace itemlab
