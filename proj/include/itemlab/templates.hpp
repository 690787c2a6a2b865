#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace itemlab {

// Substitutes {name} placeholders. A '{' followed by [A-Za-z0-9_]+ and '}'
// is a placeholder; substituted text is never re-scanned. Placeholders
// without a binding raise UnboundPlaceholder.
std::string render_prompt(const std::string& template_text,
                          const std::map<std::string, std::string>& bindings);

// Named prompt templates. Built-in defaults mirror the text files shipped
// under templates/; a directory of <name>.txt files can override them.
class TemplateStore {
 public:
  static TemplateStore builtin();

  void load_directory(const std::filesystem::path& dir);
  const std::string& get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::string> templates_;
};

}  // namespace itemlab
