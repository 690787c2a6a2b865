#include "itemlab/item_stats.hpp"

#include <cmath>

#include "itemlab/error.hpp"

namespace itemlab {

namespace {

const ItemResponses* find_column(const ResponseMatrix& matrix, const std::string& item_id) {
  auto it = matrix.items.find(item_id);
  return it == matrix.items.end() ? nullptr : &it->second;
}

const ItemResponses& require_respondents(const ResponseMatrix& matrix,
                                         const std::string& item_id) {
  const ItemResponses* column = find_column(matrix, item_id);
  if (!column || column->students.empty()) {
    throw Error(ErrorCode::NoRespondents, "item '" + item_id + "' has no respondents");
  }
  return *column;
}

}  // namespace

double difficulty_index(const ResponseMatrix& matrix, const std::string& item_id) {
  const ItemResponses& column = require_respondents(matrix, item_id);
  return static_cast<double>(column.correct_count()) /
         static_cast<double>(column.respondent_count());
}

std::optional<double> discrimination_index(const ResponseMatrix& matrix,
                                           const std::string& item_id) {
  const ItemResponses& column = require_respondents(matrix, item_id);
  const std::size_t n = column.students.size();
  if (n < 2) {
    throw Error(ErrorCode::TooFewRespondents,
                "item '" + item_id + "' needs at least 2 respondents for DC");
  }

  double mean_x = 0.0, mean_t = 0.0;
  std::vector<double> totals(n);
  for (std::size_t i = 0; i < n; ++i) {
    totals[i] = static_cast<double>(matrix.total_scores.at(column.students[i]));
    mean_x += column.scores[i];
    mean_t += totals[i];
  }
  mean_x /= static_cast<double>(n);
  mean_t /= static_cast<double>(n);

  double cov = 0.0, var_x = 0.0, var_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = column.scores[i] - mean_x;
    double dt = totals[i] - mean_t;
    cov += dx * dt;
    var_x += dx * dx;
    var_t += dt * dt;
  }
  if (var_x == 0.0 || var_t == 0.0) {
    return std::nullopt;
  }
  return cov / std::sqrt(var_x * var_t);
}

int distractor_efficiency(const ResponseMatrix& matrix, const QuizItem& item) {
  if (!item.is_multiple_choice()) {
    throw Error(ErrorCode::NoDistractorData,
                "item '" + item.item_id + "' is not multiple-choice");
  }
  const ItemResponses& column = require_respondents(matrix, item.item_id);
  if (column.recorded_choice_count < column.incorrect_count) {
    throw Error(ErrorCode::NoDistractorData,
                "item '" + item.item_id + "' has incorrect responses without recorded choices");
  }

  const int n = column.respondent_count();
  int effective = 0;
  for (const Option& option : item.options) {
    if (option.option_id == *item.correct_option_id) continue;
    auto it = column.distractor_picks.find(option.option_id);
    int picks = it == column.distractor_picks.end() ? 0 : it->second;
    // picks/n >= 0.05 done in integers: 20*picks >= n (1/0.05 is exact).
    if (20 * picks >= n) ++effective;
  }
  return effective;
}

int topic_coverage(const QuizItem& item, const std::string& target_topic) {
  if (target_topic.empty()) {
    throw Error(ErrorCode::InvalidParameters, "target topic must be non-empty");
  }
  return item.topics.count(target_topic) ? 1 : 0;
}

std::vector<ItemStats> compute_all_stats(const ResponseMatrix& matrix,
                                         const std::vector<QuizItem>& items) {
  std::vector<ItemStats> out;
  out.reserve(items.size());
  for (const QuizItem& item : items) {
    ItemStats stats;
    stats.item_id = item.item_id;
    const ItemResponses* column = find_column(matrix, item.item_id);
    stats.respondents = column ? column->respondent_count() : 0;
    if (stats.respondents >= 1) {
      stats.df = difficulty_index(matrix, item.item_id);
    }
    if (stats.respondents >= 2) {
      stats.dc = discrimination_index(matrix, item.item_id);
    }
    if (stats.respondents >= 1 && item.is_multiple_choice()) {
      try {
        stats.de = distractor_efficiency(matrix, item);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoDistractorData) throw;
      }
    }
    out.push_back(std::move(stats));
  }
  return out;
}

}  // namespace itemlab
