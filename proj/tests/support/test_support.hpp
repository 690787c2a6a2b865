#pragma once

// Shared test helpers: brute-force oracles kept deliberately independent of
// the library's implementation paths, plus small fixture builders.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "itemlab/domain.hpp"
#include "itemlab/evaluators.hpp"
#include "itemlab/pair_builder.hpp"

namespace testsupport {

inline std::filesystem::path make_temp_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("itemlab-" + tag + "-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

// ------------------------------------------------------------ raw-log oracles
//
// These loop over the raw response log with naive counting; they never touch
// ResponseMatrix.

inline int oracle_total_score(const std::vector<itemlab::ResponseRecord>& log,
                              const std::string& student) {
  int total = 0;
  for (const auto& r : log) {
    if (r.student_id == student && r.correct) ++total;
  }
  return total;
}

inline double oracle_df(const std::vector<itemlab::ResponseRecord>& log,
                        const std::string& item) {
  int attempts = 0, correct = 0;
  for (const auto& r : log) {
    if (r.item_id != item) continue;
    ++attempts;
    correct += r.correct;
  }
  return static_cast<double>(correct) / static_cast<double>(attempts);
}

// Pearson through the raw-moment identity, a different algebraic route than
// the two-pass implementation.
inline double oracle_pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    syy += ys[i] * ys[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// DC over the raw log: per-item correctness against whole-log totals.
inline double oracle_dc(const std::vector<itemlab::ResponseRecord>& log,
                        const std::string& item) {
  std::vector<double> xs, ts;
  std::set<std::string> seen;
  for (const auto& r : log) {
    if (r.item_id != item || seen.count(r.student_id)) continue;
    seen.insert(r.student_id);
    xs.push_back(r.correct ? 1.0 : 0.0);
    ts.push_back(static_cast<double>(oracle_total_score(log, r.student_id)));
  }
  return oracle_pearson(xs, ts);
}

inline int oracle_de(const std::vector<itemlab::ResponseRecord>& log,
                     const itemlab::QuizItem& item) {
  int attempts = 0;
  std::map<std::string, int> picks;
  for (const auto& r : log) {
    if (r.item_id != item.item_id) continue;
    ++attempts;
    if (!r.correct && r.chosen_option_id) picks[*r.chosen_option_id] += 1;
  }
  int effective = 0;
  for (const auto& option : item.options) {
    if (option.option_id == *item.correct_option_id) continue;
    double p = static_cast<double>(picks[option.option_id]) / attempts;
    if (p >= 0.05) ++effective;
  }
  return effective;
}

// --------------------------------------------------------- rank-based oracles

// O(n^2) average ranks by counting, not sorting.
inline std::vector<double> oracle_ranks(const std::vector<double>& values) {
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int less = 0, equal = 0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      less += values[j] < values[i];
      equal += values[j] == values[i];
    }
    ranks[i] = less + (equal + 1) / 2.0;
  }
  return ranks;
}

inline double oracle_spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  return oracle_pearson(oracle_ranks(xs), oracle_ranks(ys));
}

// tau-b by direct pairwise counting.
inline double oracle_kendall(const std::vector<double>& xs, const std::vector<double>& ys) {
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      double dx = xs[i] - xs[j];
      double dy = ys[i] - ys[j];
      if (dx == 0 && dy == 0) {
        ++ties_x;
        ++ties_y;
      } else if (dx == 0) {
        ++ties_x;
      } else if (dy == 0) {
        ++ties_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  long long n = static_cast<long long>(xs.size());
  long long total = n * (n - 1) / 2;
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(total - ties_x)) /
         std::sqrt(static_cast<double>(total - ties_y));
}

// Two-pass sum-of-squares ANOVA F, straight from the textbook formulas.
inline double oracle_anova_f(const std::vector<std::vector<double>>& groups) {
  double grand_sum = 0;
  long long n = 0;
  for (const auto& g : groups) {
    for (double v : g) grand_sum += v;
    n += static_cast<long long>(g.size());
  }
  double grand_mean = grand_sum / static_cast<double>(n);
  double ssb = 0, ssw = 0;
  for (const auto& g : groups) {
    double mean = 0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (mean - grand_mean) * (mean - grand_mean);
    for (double v : g) ssw += (v - mean) * (v - mean);
  }
  double k = static_cast<double>(groups.size());
  return (ssb / (k - 1)) / (ssw / (static_cast<double>(n) - k));
}

// Pooled two-sample t statistic, for the two-group F = t^2 identity.
inline double oracle_pooled_t(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
  };
  double ma = mean(a), mb = mean(b);
  double ssa = 0, ssb = 0;
  for (double x : a) ssa += (x - ma) * (x - ma);
  for (double x : b) ssb += (x - mb) * (x - mb);
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double pooled = (ssa + ssb) / (na + nb - 2.0);
  return (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
}

// --------------------------------------------------------- fixture builders

// Random response log over `n_items` four-option items; roughly 10% of
// (student, item) cells are skipped.
struct RandomDataset {
  std::vector<itemlab::QuizItem> items;
  std::vector<itemlab::ResponseRecord> responses;
};

inline RandomDataset make_random_dataset(std::mt19937_64& rng, int max_students = 20,
                                         int max_items = 10) {
  RandomDataset data;
  std::uniform_int_distribution<int> student_count(2, max_students);
  std::uniform_int_distribution<int> item_count(2, max_items);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  int n_students = student_count(rng);
  int n_items = item_count(rng);
  for (int i = 0; i < n_items; ++i) {
    itemlab::QuizItem item;
    item.item_id = "q" + std::to_string(i);
    item.material_id = "mat";
    item.stem = "stem " + std::to_string(i);
    for (char o : {'A', 'B', 'C', 'D'}) {
      item.options.push_back({std::string(1, o), "text"});
    }
    item.correct_option_id = "A";
    data.items.push_back(std::move(item));
  }
  for (int s = 0; s < n_students; ++s) {
    double ability = unit(rng);
    for (int i = 0; i < n_items; ++i) {
      if (unit(rng) < 0.1) continue;  // skipped
      bool correct = unit(rng) < 0.25 + ability / 2.0;
      itemlab::ResponseRecord record;
      record.student_id = "s" + std::to_string(s);
      record.item_id = "q" + std::to_string(i);
      record.correct = correct;
      if (!correct) {
        const char* choices[] = {"B", "C", "D"};
        record.chosen_option_id = choices[static_cast<int>(unit(rng) * 3) % 3];
      }
      data.responses.push_back(std::move(record));
    }
  }
  if (data.responses.empty()) {
    data.responses.push_back({"s0", "q0", true, std::nullopt});
  }
  return data;
}

inline itemlab::QuizItem make_item(const std::string& id, const std::string& material,
                                   const std::string& stem) {
  itemlab::QuizItem item;
  item.item_id = id;
  item.material_id = material;
  item.stem = stem;
  for (char o : {'A', 'B', 'C', 'D'}) {
    item.options.push_back({std::string(1, o), "option " + std::string(1, o) + " of " + id});
  }
  item.correct_option_id = "A";
  return item;
}

inline itemlab::LearningMaterial make_material(const std::string& id) {
  itemlab::LearningMaterial material;
  material.material_id = id;
  material.title = "Material " + id;
  material.sections.push_back({"sec1", "Body of the first section of " + id + "."});
  return material;
}

inline itemlab::QuestionPair make_pair(const std::string& q1, const std::string& q2,
                                       itemlab::Dimension d, itemlab::PairLabel label,
                                       double v1, double v2, double alpha) {
  itemlab::QuestionPair pair;
  pair.pair_id = std::string(itemlab::to_string(d)) + ":" + q1 + ":" + q2;
  pair.q1 = q1;
  pair.q2 = q2;
  pair.material_id = "mat";
  pair.dimension = d;
  pair.label = label;
  pair.q1_value = v1;
  pair.q2_value = v2;
  pair.delta = std::abs(v1 - v2);
  pair.alpha = alpha;
  return pair;
}

inline itemlab::EvaluationOutcome make_outcome(const std::string& pair_id,
                                               const std::string& strategy,
                                               itemlab::Order order,
                                               itemlab::PairVerdict verdict) {
  itemlab::EvaluationOutcome outcome;
  outcome.pair_id = pair_id;
  outcome.strategy = strategy;
  outcome.order = order;
  outcome.verdict = verdict;
  return outcome;
}

}  // namespace testsupport
