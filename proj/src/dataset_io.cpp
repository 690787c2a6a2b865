#include "itemlab/dataset_io.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "itemlab/error.hpp"

namespace itemlab {

namespace {

[[noreturn]] void malformed(const std::string& where, int line, const std::string& why) {
  std::string location = where;
  if (line > 0) location += " line " + std::to_string(line);
  throw Error(ErrorCode::MalformedRecord, location + ": " + why);
}

std::string require_string(const json& value, const char* field, const std::string& where,
                           int line) {
  if (!value.contains(field) || !value[field].is_string()) {
    malformed(where, line, std::string("missing or non-string field '") + field + "'");
  }
  return value[field].get<std::string>();
}

std::string require_nonempty_string(const json& value, const char* field,
                                    const std::string& where, int line) {
  std::string s = require_string(value, field, where, line);
  if (s.empty()) {
    malformed(where, line, std::string("field '") + field + "' must be non-empty");
  }
  return s;
}

void warn_unknown_fields(const json& value, const std::set<std::string>& known,
                         const std::string& where, int line,
                         std::vector<std::string>* warnings) {
  for (const auto& [key, _] : value.items()) {
    if (known.count(key)) continue;
    std::string message = where + " line " + std::to_string(line) + ": ignoring unknown field '" +
                          key + "'";
    if (warnings) {
      warnings->push_back(message);
    } else {
      warn(message);
    }
  }
}

}  // namespace

LearningMaterial material_from_json(const json& value, int line) {
  const std::string where = "materials";
  if (!value.is_object()) malformed(where, line, "record is not an object");
  LearningMaterial material;
  material.material_id = require_nonempty_string(value, "material_id", where, line);
  material.title = require_string(value, "title", where, line);
  if (!value.contains("sections") || !value["sections"].is_array()) {
    malformed(where, line, "missing or non-array field 'sections'");
  }
  std::set<std::string> seen_sections;
  for (const json& s : value["sections"]) {
    Section section;
    section.section_id = require_nonempty_string(s, "section_id", where, line);
    section.body = require_nonempty_string(s, "body", where, line);
    if (!seen_sections.insert(section.section_id).second) {
      malformed(where, line, "duplicate section_id '" + section.section_id + "'");
    }
    material.sections.push_back(std::move(section));
  }
  return material;
}

QuizItem item_from_json(const json& value, int line, std::vector<std::string>* warnings) {
  const std::string where = "items";
  if (!value.is_object()) malformed(where, line, "record is not an object");
  QuizItem item;
  item.item_id = require_nonempty_string(value, "item_id", where, line);
  item.material_id = require_nonempty_string(value, "material_id", where, line);
  if (value.contains("section_id") && !value["section_id"].is_null()) {
    if (!value["section_id"].is_string()) malformed(where, line, "section_id must be a string");
    item.section_id = value["section_id"].get<std::string>();
  }
  item.stem = require_nonempty_string(value, "stem", where, line);

  if (value.contains("options") && !value["options"].is_null()) {
    if (!value["options"].is_array()) malformed(where, line, "options must be an array");
    std::set<std::string> seen;
    for (const json& o : value["options"]) {
      Option option;
      option.option_id = require_nonempty_string(o, "option_id", where, line);
      option.text = require_string(o, "text", where, line);
      if (!seen.insert(option.option_id).second) {
        malformed(where, line, "duplicate option_id '" + option.option_id + "'");
      }
      item.options.push_back(std::move(option));
    }
  }
  if (item.options.size() == 1) {
    malformed(where, line, "multiple-choice items need at least 2 options");
  }

  if (value.contains("correct_option_id") && !value["correct_option_id"].is_null()) {
    if (!value["correct_option_id"].is_string()) {
      malformed(where, line, "correct_option_id must be a string");
    }
    item.correct_option_id = value["correct_option_id"].get<std::string>();
  }
  if (item.is_multiple_choice()) {
    if (!item.correct_option_id) {
      malformed(where, line, "multiple-choice item lacks correct_option_id");
    }
    if (!item.has_option(*item.correct_option_id)) {
      malformed(where, line,
                "correct_option_id '" + *item.correct_option_id + "' is not one of the options");
    }
  } else if (item.correct_option_id) {
    malformed(where, line, "correct_option_id given but the item has no options");
  }

  if (value.contains("topics") && !value["topics"].is_null()) {
    if (!value["topics"].is_array()) malformed(where, line, "topics must be an array");
    for (const json& t : value["topics"]) {
      if (!t.is_string() || t.get<std::string>().empty()) {
        malformed(where, line, "topics must be non-empty strings");
      }
      item.topics.insert(t.get<std::string>());
    }
  }

  warn_unknown_fields(value,
                      {"item_id", "material_id", "section_id", "stem", "options",
                       "correct_option_id", "topics"},
                      where, line, warnings);
  return item;
}

ResponseRecord response_from_json(const json& value, int line,
                                  std::vector<std::string>* warnings) {
  const std::string where = "responses";
  if (!value.is_object()) malformed(where, line, "record is not an object");
  ResponseRecord record;
  record.student_id = require_nonempty_string(value, "student_id", where, line);
  record.item_id = require_nonempty_string(value, "item_id", where, line);
  if (!value.contains("correct") || !value["correct"].is_boolean()) {
    malformed(where, line, "missing or non-boolean field 'correct'");
  }
  record.correct = value["correct"].get<bool>();
  if (value.contains("chosen_option_id") && !value["chosen_option_id"].is_null()) {
    if (!value["chosen_option_id"].is_string()) {
      malformed(where, line, "chosen_option_id must be a string");
    }
    record.chosen_option_id = value["chosen_option_id"].get<std::string>();
  }
  warn_unknown_fields(value, {"student_id", "item_id", "correct", "chosen_option_id"}, where,
                      line, warnings);
  return record;
}

namespace {

template <typename T, typename Parse>
std::vector<T> load_records(const std::filesystem::path& path, const std::string& id_label,
                            Parse parse, std::set<std::string> (*key_of)(const T&)) {
  std::vector<T> out;
  std::set<std::string> seen;
  for (const auto& [value, line] : read_jsonl(path)) {
    T record = parse(value, line);
    if (key_of) {
      for (const std::string& key : key_of(record)) {
        if (!seen.insert(key).second) {
          throw Error(ErrorCode::DuplicateId,
                      path.filename().string() + " line " + std::to_string(line) +
                          ": duplicate " + id_label + " '" + key + "'");
        }
      }
    }
    out.push_back(std::move(record));
  }
  return out;
}

}  // namespace

std::vector<LearningMaterial> load_materials(const std::filesystem::path& path,
                                             std::vector<std::string>* warnings) {
  return load_records<LearningMaterial>(
      path, "material_id",
      [warnings](const json& v, int line) {
        LearningMaterial m = material_from_json(v, line);
        warn_unknown_fields(v, {"material_id", "title", "sections"}, "materials", line, warnings);
        return m;
      },
      +[](const LearningMaterial& m) { return std::set<std::string>{m.material_id}; });
}

std::vector<QuizItem> load_items(const std::filesystem::path& path,
                                 std::vector<std::string>* warnings) {
  return load_records<QuizItem>(
      path, "item_id",
      [warnings](const json& v, int line) { return item_from_json(v, line, warnings); },
      +[](const QuizItem& i) { return std::set<std::string>{i.item_id}; });
}

std::vector<ResponseRecord> load_responses(const std::filesystem::path& path,
                                           std::vector<std::string>* warnings) {
  // Duplicate (student, item) pairs are reported by validate_dataset and
  // rejected by build_response_matrix; loading stays record-local.
  return load_records<ResponseRecord>(
      path, "",
      [warnings](const json& v, int line) { return response_from_json(v, line, warnings); },
      nullptr);
}

json to_json(const LearningMaterial& material) {
  json sections = json::array();
  for (const Section& s : material.sections) {
    sections.push_back(json{{"section_id", s.section_id}, {"body", s.body}});
  }
  return json{{"material_id", material.material_id},
              {"title", material.title},
              {"sections", std::move(sections)}};
}

json to_json(const QuizItem& item) {
  json options = json::array();
  for (const Option& o : item.options) {
    options.push_back(json{{"option_id", o.option_id}, {"text", o.text}});
  }
  json value{{"item_id", item.item_id}, {"material_id", item.material_id}};
  value["section_id"] = item.section_id ? json(*item.section_id) : json(nullptr);
  value["stem"] = item.stem;
  value["options"] = std::move(options);
  value["correct_option_id"] =
      item.correct_option_id ? json(*item.correct_option_id) : json(nullptr);
  value["topics"] = json::array();
  for (const std::string& t : item.topics) value["topics"].push_back(t);
  return value;
}

json to_json(const ResponseRecord& record) {
  json value{{"student_id", record.student_id},
             {"item_id", record.item_id},
             {"correct", record.correct}};
  value["chosen_option_id"] =
      record.chosen_option_id ? json(*record.chosen_option_id) : json(nullptr);
  return value;
}

namespace {

template <typename T>
void save_records(const std::filesystem::path& path, const std::vector<T>& records,
                  const FileHeader& header) {
  JsonlWriter writer(path, header);
  for (const T& record : records) writer.write(to_json(record));
  writer.flush();
}

}  // namespace

void save_materials(const std::filesystem::path& path,
                    const std::vector<LearningMaterial>& materials, const FileHeader& header) {
  save_records(path, materials, header);
}

void save_items(const std::filesystem::path& path, const std::vector<QuizItem>& items,
                const FileHeader& header) {
  save_records(path, items, header);
}

void save_responses(const std::filesystem::path& path,
                    const std::vector<ResponseRecord>& responses, const FileHeader& header) {
  save_records(path, responses, header);
}

void check_response_against_item(const ResponseRecord& record, const QuizItem& item) {
  if (record.item_id != item.item_id) {
    throw Error(ErrorCode::InvalidParameters, "response does not belong to item");
  }
  if (!record.chosen_option_id) return;
  if (!item.is_multiple_choice()) {
    throw Error(ErrorCode::MalformedRecord,
                "response to free-response item '" + item.item_id + "' records a chosen option");
  }
  if (!item.has_option(*record.chosen_option_id)) {
    throw Error(ErrorCode::MalformedRecord,
                "chosen option '" + *record.chosen_option_id + "' is not an option of item '" +
                    item.item_id + "'");
  }
  bool chose_correct = *record.chosen_option_id == *item.correct_option_id;
  if (chose_correct && !record.correct) {
    throw Error(ErrorCode::MalformedRecord,
                "student '" + record.student_id + "' chose the keyed answer of '" +
                    item.item_id + "' but the record is marked incorrect");
  }
  if (!chose_correct && record.correct) {
    throw Error(ErrorCode::MalformedRecord,
                "student '" + record.student_id + "' chose a distractor of '" + item.item_id +
                    "' but the record is marked correct");
  }
}

const char* to_string(ValidationIssue::Kind kind) {
  using Kind = ValidationIssue::Kind;
  switch (kind) {
    case Kind::DanglingItemMaterial: return "dangling item->material reference";
    case Kind::DanglingItemSection: return "dangling item->section reference";
    case Kind::DanglingResponseItem: return "dangling response->item reference";
    case Kind::ChoiceContradictsCorrect: return "chosen option contradicts correct flag";
    case Kind::ChoiceNotAnOption: return "chosen option is not an option of the item";
    case Kind::DuplicateResponse: return "duplicate (student, item) response";
    case Kind::ItemWithoutResponses: return "no respondents";
    case Kind::MaterialWithoutItems: return "material has no items";
  }
  return "unknown issue";
}

ValidationReport validate_dataset(const std::vector<LearningMaterial>& materials,
                                  const std::vector<QuizItem>& items,
                                  const std::vector<ResponseRecord>& responses) {
  using Kind = ValidationIssue::Kind;
  ValidationReport report;

  std::map<std::string, const LearningMaterial*> material_index;
  for (const LearningMaterial& m : materials) material_index[m.material_id] = &m;
  std::map<std::string, const QuizItem*> item_index;
  for (const QuizItem& i : items) item_index[i.item_id] = &i;

  std::set<std::string> materials_with_items;
  for (const QuizItem& item : items) {
    auto mat = material_index.find(item.material_id);
    if (mat == material_index.end()) {
      report.issues.push_back({Kind::DanglingItemMaterial, item.item_id,
                               "references unknown material '" + item.material_id + "'"});
    } else {
      materials_with_items.insert(item.material_id);
      if (item.section_id) {
        const auto& sections = mat->second->sections;
        bool found = std::any_of(sections.begin(), sections.end(), [&](const Section& s) {
          return s.section_id == *item.section_id;
        });
        if (!found) {
          report.issues.push_back({Kind::DanglingItemSection, item.item_id,
                                   "references unknown section '" + *item.section_id + "'"});
        }
      }
    }
  }
  for (const LearningMaterial& m : materials) {
    if (!materials_with_items.count(m.material_id)) {
      report.issues.push_back({Kind::MaterialWithoutItems, m.material_id, "no items"});
    }
  }

  std::set<std::pair<std::string, std::string>> seen_cells;
  std::set<std::string> items_with_responses;
  for (const ResponseRecord& r : responses) {
    auto it = item_index.find(r.item_id);
    if (it == item_index.end()) {
      report.issues.push_back({Kind::DanglingResponseItem, r.student_id,
                               "references unknown item '" + r.item_id + "'"});
      continue;
    }
    items_with_responses.insert(r.item_id);
    if (!seen_cells.insert({r.student_id, r.item_id}).second) {
      report.issues.push_back({Kind::DuplicateResponse, r.student_id,
                               "answered item '" + r.item_id + "' more than once"});
    }
    try {
      check_response_against_item(r, *it->second);
    } catch (const Error& e) {
      Kind kind = Kind::ChoiceContradictsCorrect;
      if (std::string(e.what()).find("is not an option") != std::string::npos) {
        kind = Kind::ChoiceNotAnOption;
      }
      report.issues.push_back({kind, r.student_id, e.what()});
    }
  }
  for (const QuizItem& item : items) {
    if (!items_with_responses.count(item.item_id)) {
      report.issues.push_back({Kind::ItemWithoutResponses, item.item_id, "no respondents"});
    }
  }
  return report;
}

}  // namespace itemlab
