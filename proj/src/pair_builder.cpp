#include "itemlab/pair_builder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "itemlab/error.hpp"
#include "itemlab/hash.hpp"

namespace itemlab {

const char* to_string(PairLabel label) { return label == PairLabel::Q1 ? "Q1" : "Q2"; }

PairLabel pair_label_from_string(const std::string& text) {
  if (text == "Q1") return PairLabel::Q1;
  if (text == "Q2") return PairLabel::Q2;
  throw Error(ErrorCode::MalformedRecord, "unrecognized pair label '" + text + "'");
}

double default_alpha(Dimension d) {
  switch (d) {
    case Dimension::TC: return 1.0;
    case Dimension::DE: return 2.0;
    case Dimension::DF: return 0.15;
    case Dimension::DC: return 0.15;
  }
  return 0.15;
}

namespace {

std::string lower(Dimension d) {
  std::string s = to_string(d);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string make_pair_id(Dimension d, const std::string& q1, const std::string& q2) {
  return lower(d) + ":" + q1 + ":" + q2;
}

std::optional<double> stat_value(const ItemStats& stats, Dimension d) {
  switch (d) {
    case Dimension::DF: return stats.df;
    case Dimension::DC: return stats.dc;
    case Dimension::DE:
      return stats.de ? std::optional<double>(static_cast<double>(*stats.de)) : std::nullopt;
    case Dimension::TC: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::vector<QuestionPair> build_stat_pairs(const std::vector<ItemStats>& stats,
                                           const std::vector<QuizItem>& items,
                                           Dimension dimension, double alpha,
                                           Grouping grouping) {
  if (dimension == Dimension::TC) {
    throw Error(ErrorCode::UnknownDimension,
                "TC pairs are built by build_tc_pairs, not from item statistics");
  }
  if (alpha < 0.0 || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidParameters, "alpha must be a non-negative number");
  }

  std::map<std::string, const QuizItem*> item_index;
  for (const QuizItem& item : items) item_index[item.item_id] = &item;

  struct Candidate {
    std::string item_id;
    std::string material_id;
    double value;
  };
  std::map<std::string, std::vector<Candidate>> groups;
  int excluded = 0;
  for (const ItemStats& s : stats) {
    auto it = item_index.find(s.item_id);
    if (it == item_index.end()) {
      throw Error(ErrorCode::UnknownItem, "statistics for unknown item '" + s.item_id + "'");
    }
    std::optional<double> value = stat_value(s, dimension);
    if (!value) {
      ++excluded;
      continue;
    }
    const QuizItem& item = *it->second;
    std::string key = item.material_id;
    if (grouping == Grouping::BySection) {
      key += "\x1f" + item.section_id.value_or("");
    }
    groups[key].push_back({s.item_id, item.material_id, *value});
  }
  if (excluded > 0) {
    warn(std::to_string(excluded) + " item(s) lack a " + to_string(dimension) +
         " index and were excluded from pair construction");
  }
  if (groups.empty()) {
    throw Error(ErrorCode::EmptyCandidateSet,
                "no items carry a " + std::string(to_string(dimension)) + " index");
  }

  std::vector<QuestionPair> pairs;
  for (auto& [key, candidates] : groups) {
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.item_id < b.item_id; });
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < candidates.size(); ++j) {
        const Candidate& a = candidates[i];
        const Candidate& b = candidates[j];
        double delta = std::abs(a.value - b.value);
        if (delta < alpha) continue;
        QuestionPair pair;
        pair.pair_id = make_pair_id(dimension, a.item_id, b.item_id);
        pair.q1 = a.item_id;
        pair.q2 = b.item_id;
        pair.material_id = a.material_id;
        pair.dimension = dimension;
        pair.label = b.value > a.value ? PairLabel::Q2 : PairLabel::Q1;
        pair.delta = delta;
        pair.alpha = alpha;
        pair.q1_value = a.value;
        pair.q2_value = b.value;
        pairs.push_back(std::move(pair));
      }
    }
  }
  return pairs;
}

std::vector<QuestionPair> build_tc_pairs(const std::vector<QuizItem>& items,
                                         const std::vector<LearningMaterial>& materials,
                                         DatasetProfile profile, std::uint64_t seed) {
  std::set<std::string> material_ids;
  for (const LearningMaterial& m : materials) material_ids.insert(m.material_id);

  std::map<std::string, std::vector<const QuizItem*>> by_material;
  bool any_annotated = false;
  for (const QuizItem& item : items) {
    bool annotated = profile == DatasetProfile::SameMaterialDifferentSection
                         ? item.section_id.has_value()
                         : !item.topics.empty();
    if (!annotated) continue;
    any_annotated = true;
    by_material[item.material_id].push_back(&item);
  }
  if (!any_annotated) {
    throw Error(ErrorCode::MissingTopicAnnotations,
                profile == DatasetProfile::SameMaterialDifferentSection
                    ? "no items carry a section_id"
                    : "no items carry topic annotations");
  }

  std::vector<QuestionPair> pairs;
  for (auto& [material_id, group] : by_material) {
    if (!material_ids.count(material_id)) continue;
    std::sort(group.begin(), group.end(),
              [](const QuizItem* a, const QuizItem* b) { return a->item_id < b->item_id; });
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        const QuizItem& a = *group[i];
        const QuizItem& b = *group[j];

        // Each side must own a topic the other lacks so the draw can fall
        // either way; topic_of(x) is what the pair targets when x wins.
        std::optional<std::string> topic_a;
        std::optional<std::string> topic_b;
        if (profile == DatasetProfile::SameMaterialDifferentSection) {
          if (*a.section_id == *b.section_id) continue;
          topic_a = *a.section_id;
          topic_b = *b.section_id;
        } else {
          std::vector<std::string> only_a, only_b, shared;
          std::set_difference(a.topics.begin(), a.topics.end(), b.topics.begin(),
                              b.topics.end(), std::back_inserter(only_a));
          std::set_difference(b.topics.begin(), b.topics.end(), a.topics.begin(),
                              a.topics.end(), std::back_inserter(only_b));
          std::set_intersection(a.topics.begin(), a.topics.end(), b.topics.begin(),
                                b.topics.end(), std::back_inserter(shared));
          if (only_a.size() != 1 || only_b.size() != 1 || shared.empty()) continue;
          topic_a = only_a.front();
          topic_b = only_b.front();
        }

        QuestionPair pair;
        pair.pair_id = make_pair_id(Dimension::TC, a.item_id, b.item_id);
        pair.q1 = a.item_id;
        pair.q2 = b.item_id;
        pair.material_id = material_id;
        pair.dimension = Dimension::TC;
        std::uint64_t draw =
            fnv1a64(std::to_string(seed) + ":" + a.item_id + ":" + b.item_id);
        pair.label = (draw & 1) ? PairLabel::Q2 : PairLabel::Q1;
        pair.target_topic = pair.label == PairLabel::Q1 ? topic_a : topic_b;
        pair.delta = 1.0;
        pair.alpha = default_alpha(Dimension::TC);
        pair.q1_value = pair.label == PairLabel::Q1 ? 1.0 : 0.0;
        pair.q2_value = pair.label == PairLabel::Q2 ? 1.0 : 0.0;
        pairs.push_back(std::move(pair));
      }
    }
  }
  return pairs;
}

QuestionPair invert_requirement(const QuestionPair& pair, const Requirement& requirement) {
  if (pair.dimension == Dimension::TC || requirement.dimension == Dimension::TC) {
    throw Error(ErrorCode::InvertUnsupported, "TC has no preference direction");
  }
  if (requirement.dimension != pair.dimension) {
    throw Error(ErrorCode::InvalidParameters,
                "requirement dimension does not match the pair");
  }
  if (requirement.direction == Direction::PreferHigher) return pair;
  QuestionPair flipped = pair;
  flipped.label = pair.label == PairLabel::Q1 ? PairLabel::Q2 : PairLabel::Q1;
  return flipped;
}

std::vector<QuestionPair> alpha_filter(const std::vector<QuestionPair>& pairs, double alpha) {
  std::vector<QuestionPair> out;
  std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(out),
               [alpha](const QuestionPair& p) { return p.delta >= alpha; });
  return out;
}

}  // namespace itemlab
