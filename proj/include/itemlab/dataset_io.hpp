#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "itemlab/domain.hpp"
#include "itemlab/jsonl.hpp"

namespace itemlab {

// Loaders for the three JSONL dataset schemas. One object per line, UTF-8;
// unknown fields are ignored with a warning collected into `warnings` when
// given (otherwise routed to warn()).
std::vector<LearningMaterial> load_materials(const std::filesystem::path& path,
                                             std::vector<std::string>* warnings = nullptr);
std::vector<QuizItem> load_items(const std::filesystem::path& path,
                                 std::vector<std::string>* warnings = nullptr);
std::vector<ResponseRecord> load_responses(const std::filesystem::path& path,
                                           std::vector<std::string>* warnings = nullptr);

json to_json(const LearningMaterial& material);
json to_json(const QuizItem& item);
json to_json(const ResponseRecord& record);

LearningMaterial material_from_json(const json& value, int line = 0);
QuizItem item_from_json(const json& value, int line = 0,
                        std::vector<std::string>* warnings = nullptr);
ResponseRecord response_from_json(const json& value, int line = 0,
                                  std::vector<std::string>* warnings = nullptr);

void save_materials(const std::filesystem::path& path,
                    const std::vector<LearningMaterial>& materials,
                    const FileHeader& header);
void save_items(const std::filesystem::path& path, const std::vector<QuizItem>& items,
                const FileHeader& header);
void save_responses(const std::filesystem::path& path,
                    const std::vector<ResponseRecord>& responses, const FileHeader& header);

// Throws MalformedRecord when a response contradicts its item: the chosen
// option is unknown, marked correct but flagged incorrect, or vice versa.
void check_response_against_item(const ResponseRecord& record, const QuizItem& item);

struct ValidationIssue {
  enum class Kind {
    DanglingItemMaterial,
    DanglingItemSection,
    DanglingResponseItem,
    ChoiceContradictsCorrect,
    ChoiceNotAnOption,
    DuplicateResponse,
    ItemWithoutResponses,
    MaterialWithoutItems,
  };
  Kind kind;
  std::string subject;
  std::string detail;

  bool operator==(const ValidationIssue&) const = default;
};

const char* to_string(ValidationIssue::Kind kind);

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool clean() const noexcept { return issues.empty(); }
};

// Cross-reference checks over a loaded dataset. Report-based: an empty
// report means the dataset is internally consistent.
ValidationReport validate_dataset(const std::vector<LearningMaterial>& materials,
                                  const std::vector<QuizItem>& items,
                                  const std::vector<ResponseRecord>& responses);

}  // namespace itemlab
