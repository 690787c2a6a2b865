#include "itemlab/domain.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <utility>

#include "itemlab/error.hpp"

namespace itemlab {

int QuizItem::distractor_count() const {
  if (options.empty()) return 0;
  int n = static_cast<int>(options.size());
  return correct_option_id ? n - 1 : n;
}

bool QuizItem::has_option(const std::string& option_id) const {
  return std::any_of(options.begin(), options.end(),
                     [&](const Option& o) { return o.option_id == option_id; });
}

int ItemResponses::correct_count() const {
  return std::accumulate(scores.begin(), scores.end(), 0,
                         [](int acc, std::uint8_t s) { return acc + s; });
}

ResponseMatrix build_response_matrix(const std::vector<QuizItem>& items,
                                     const std::vector<ResponseRecord>& responses) {
  if (responses.empty()) {
    throw Error(ErrorCode::EmptyResponseSet, "no responses supplied");
  }

  std::map<std::string, const QuizItem*> item_index;
  for (const QuizItem& item : items) {
    item_index[item.item_id] = &item;
  }

  // (student, item) -> record, rejecting duplicates.
  std::map<std::pair<std::string, std::string>, const ResponseRecord*> cells;
  for (const ResponseRecord& r : responses) {
    auto it = item_index.find(r.item_id);
    if (it == item_index.end()) {
      throw Error(ErrorCode::UnknownItem,
                  "response for '" + r.item_id + "' references an item outside the item set");
    }
    auto [cell, inserted] = cells.emplace(std::make_pair(r.student_id, r.item_id), &r);
    if (!inserted) {
      throw Error(ErrorCode::DuplicateResponse,
                  "student '" + r.student_id + "' answered item '" + r.item_id + "' twice");
    }
  }

  ResponseMatrix matrix;
  std::set<std::string> student_set;
  for (const auto& [key, record] : cells) {
    student_set.insert(key.first);
    matrix.total_scores[key.first] += record->correct ? 1 : 0;

    ItemResponses& column = matrix.items[key.second];
    column.students.push_back(key.first);
    column.scores.push_back(record->correct ? 1 : 0);
    if (!record->correct) {
      column.incorrect_count += 1;
      if (record->chosen_option_id) {
        column.recorded_choice_count += 1;
        column.distractor_picks[*record->chosen_option_id] += 1;
      }
    }
  }
  matrix.students.assign(student_set.begin(), student_set.end());
  return matrix;
}

std::string to_string(Dimension d) {
  switch (d) {
    case Dimension::TC: return "TC";
    case Dimension::DF: return "DF";
    case Dimension::DC: return "DC";
    case Dimension::DE: return "DE";
  }
  return "DF";
}

Dimension dimension_from_string(const std::string& text) {
  std::string upper;
  upper.reserve(text.size());
  for (char c : text) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (upper == "TC") return Dimension::TC;
  if (upper == "DF") return Dimension::DF;
  if (upper == "DC") return Dimension::DC;
  if (upper == "DE") return Dimension::DE;
  throw Error(ErrorCode::UnknownDimension, "unrecognized dimension '" + text + "'");
}

Requirement make_requirement(Dimension d, Direction direction,
                             std::optional<std::string> target_topic) {
  if (d == Dimension::TC && !target_topic) {
    throw Error(ErrorCode::InvalidParameters, "TC requirement needs a target topic");
  }
  if (d != Dimension::TC && target_topic) {
    throw Error(ErrorCode::InvalidParameters,
                "target topic is only meaningful for the TC dimension");
  }

  Requirement req;
  req.dimension = d;
  req.direction = direction;
  req.target_topic = std::move(target_topic);
  bool higher = direction == Direction::PreferHigher;
  switch (d) {
    case Dimension::TC:
      req.rendered_text = "the question that covers the topic \"" + *req.target_topic + "\"";
      break;
    case Dimension::DF:
      req.rendered_text = higher ? "the question that is easier to answer"
                                 : "the question that is more difficult to answer";
      break;
    case Dimension::DC:
      req.rendered_text = higher
          ? "the question that is more effective at distinguishing between "
            "high-performing and low-performing students"
          : "the question that is less effective at distinguishing between "
            "high-performing and low-performing students";
      break;
    case Dimension::DE:
      req.rendered_text = higher
          ? "the question that has a higher number of effective distractors"
          : "the question that has a lower number of effective distractors";
      break;
  }
  return req;
}

std::string requirement_description(Dimension d) {
  switch (d) {
    case Dimension::TC:
      return "A question covers the topic if its content assesses knowledge of that topic.";
    case Dimension::DF:
      return "An easier question has a higher proportion of students with a correct answer.";
    case Dimension::DC:
      return "A question with higher discrimination is more effective at distinguishing "
             "between high-performing and low-performing students.";
    case Dimension::DE:
      return "An effective distractor is one that is chosen by at least 5% of the students "
             "taking the quiz.";
  }
  return "";
}

}  // namespace itemlab
