#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace itemlab {

struct Section {
  std::string section_id;
  std::string body;

  bool operator==(const Section&) const = default;
};

struct LearningMaterial {
  std::string material_id;
  std::string title;
  std::vector<Section> sections;

  bool operator==(const LearningMaterial&) const = default;
};

struct Option {
  std::string option_id;
  std::string text;

  bool operator==(const Option&) const = default;
};

struct QuizItem {
  std::string item_id;
  std::string material_id;
  std::optional<std::string> section_id;
  std::string stem;
  std::vector<Option> options;  // empty for free-response items
  std::optional<std::string> correct_option_id;
  std::set<std::string> topics;  // knowledge components

  bool is_multiple_choice() const { return !options.empty(); }
  // |O|: options other than the keyed answer.
  int distractor_count() const;
  bool has_option(const std::string& option_id) const;

  bool operator==(const QuizItem&) const = default;
};

struct ResponseRecord {
  std::string student_id;
  std::string item_id;
  bool correct = false;
  std::optional<std::string> chosen_option_id;

  bool operator==(const ResponseRecord&) const = default;
};

// One item's column of the response matrix, restricted to the students who
// attempted the item. `students` is sorted and aligned with `scores`.
struct ItemResponses {
  std::vector<std::string> students;
  std::vector<std::uint8_t> scores;  // 0/1
  std::map<std::string, int> distractor_picks;
  int incorrect_count = 0;
  int recorded_choice_count = 0;  // incorrect responses with a recorded choice

  int respondent_count() const { return static_cast<int>(students.size()); }
  int correct_count() const;

  bool operator==(const ItemResponses&) const = default;
};

struct ResponseMatrix {
  std::vector<std::string> students;  // all students, sorted
  std::map<std::string, ItemResponses> items;
  std::map<std::string, int> total_scores;  // correct count over answered items

  bool operator==(const ResponseMatrix&) const = default;
};

// Every response must reference an item in `items`; each (student, item)
// may appear at most once. Students who skipped an item are excluded from
// that item's column but keep their total over answered items.
ResponseMatrix build_response_matrix(const std::vector<QuizItem>& items,
                                     const std::vector<ResponseRecord>& responses);

enum class Dimension { TC, DF, DC, DE };

std::string to_string(Dimension d);
Dimension dimension_from_string(const std::string& text);

enum class Direction { PreferHigher, PreferLower };

struct Requirement {
  Dimension dimension = Dimension::DF;
  Direction direction = Direction::PreferHigher;
  std::optional<std::string> target_topic;  // TC only
  std::string rendered_text;
};

// Builds the requirement sentence used in prompts for the given dimension
// and direction. TC requires a target topic; the others reject one.
Requirement make_requirement(Dimension d, Direction direction = Direction::PreferHigher,
                             std::optional<std::string> target_topic = std::nullopt);

// Fixed explanatory sentence attached to the requirement in prompts.
std::string requirement_description(Dimension d);

}  // namespace itemlab
