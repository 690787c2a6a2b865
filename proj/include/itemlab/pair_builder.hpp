#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "itemlab/domain.hpp"
#include "itemlab/item_stats.hpp"

namespace itemlab {

enum class PairLabel { Q1, Q2 };

const char* to_string(PairLabel label);
PairLabel pair_label_from_string(const std::string& text);

struct QuestionPair {
  std::string pair_id;
  std::string q1;
  std::string q2;
  std::string material_id;
  Dimension dimension = Dimension::DF;
  PairLabel label = PairLabel::Q1;
  double delta = 0.0;
  double alpha = 0.0;
  std::optional<std::string> target_topic;  // TC only
  double q1_value = 0.0;
  double q2_value = 0.0;

  const std::string& labeled_item() const { return label == PairLabel::Q1 ? q1 : q2; }
  const std::string& other_item() const { return label == PairLabel::Q1 ? q2 : q1; }

  bool operator==(const QuestionPair&) const = default;
};

// How TC candidates are scoped and how the target topic is chosen.
enum class DatasetProfile {
  // Items of the same material in different sections; the labeled item's
  // section becomes the target topic.
  SameMaterialDifferentSection,
  // Items whose topic sets share at least one component and each carry
  // exactly one component the other lacks; the labeled item's own
  // component becomes the target topic.
  SharedKnowledgeComponent,
};

enum class Grouping { ByMaterial, BySection };

double default_alpha(Dimension d);

// All unordered same-group candidate pairs whose index difference meets
// alpha, labeled toward the higher index. Items lacking the index are
// excluded (count logged). alpha = 0 emits every candidate pair; equal
// indices then label Q1 by convention.
std::vector<QuestionPair> build_stat_pairs(const std::vector<ItemStats>& stats,
                                           const std::vector<QuizItem>& items,
                                           Dimension dimension, double alpha,
                                           Grouping grouping = Grouping::ByMaterial);

// TC pairs under the given profile. The label is a seeded per-pair draw;
// delta is always 1 (TC of label minus TC of the other item).
std::vector<QuestionPair> build_tc_pairs(const std::vector<QuizItem>& items,
                                         const std::vector<LearningMaterial>& materials,
                                         DatasetProfile profile, std::uint64_t seed);

// The same pair relabeled under the requirement's direction. PreferLower
// flips the label; TC has no direction.
QuestionPair invert_requirement(const QuestionPair& pair, const Requirement& requirement);

// Pairs whose delta meets the (larger) threshold.
std::vector<QuestionPair> alpha_filter(const std::vector<QuestionPair>& pairs, double alpha);

}  // namespace itemlab
