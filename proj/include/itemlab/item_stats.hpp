#pragma once

#include <optional>
#include <string>
#include <vector>

#include "itemlab/domain.hpp"

namespace itemlab {

// Distractors counting toward DE must be picked by at least this fraction
// of the item's respondents. Inclusive threshold.
inline constexpr double kDistractorPickThreshold = 0.05;

struct ItemStats {
  std::string item_id;
  std::optional<double> df;  // in [0,1]
  std::optional<double> dc;  // in [-1,1]; absent when not computable
  std::optional<int> de;     // <= |O|; absent when distractor data unavailable
  int respondents = 0;

  bool operator==(const ItemStats&) const = default;
};

// Proportion of the item's respondents who answered correctly.
double difficulty_index(const ResponseMatrix& matrix, const std::string& item_id);

// Pearson correlation (population moments) between per-item correctness and
// total test score over the item's respondents. Empty when either side has
// zero variance.
std::optional<double> discrimination_index(const ResponseMatrix& matrix,
                                           const std::string& item_id);

// Number of distractors picked by at least 5% of the item's respondents.
// The denominator is all respondents, not only incorrect ones.
int distractor_efficiency(const ResponseMatrix& matrix, const QuizItem& item);

// 1 iff the item is tagged with the target topic.
int topic_coverage(const QuizItem& item, const std::string& target_topic);

// One record per item; indices that cannot be computed stay absent and are
// never silently zeroed.
std::vector<ItemStats> compute_all_stats(const ResponseMatrix& matrix,
                                         const std::vector<QuizItem>& items);

}  // namespace itemlab
