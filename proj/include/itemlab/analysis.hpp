#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "itemlab/evaluators.hpp"
#include "itemlab/pair_builder.hpp"

namespace itemlab {

// Strategies must beat this to count as significantly better than the
// baseline.
inline constexpr double kSignificanceLevel = 0.1;

struct AccuracyRow {
  std::string dimension;  // "TC"/"DF"/"DC"/"DE" or "overall"
  int pair_count = 0;
  double average_accuracy = 0.0;
  double consistent_accuracy = 0.0;

  bool operator==(const AccuracyRow&) const = default;
};

struct StrategyReport {
  std::string strategy;
  std::vector<AccuracyRow> per_dimension;
  AccuracyRow overall;
};

// Fraction of correct judgments over both presentation orders of every
// pair (2 x |pairs| judgments); a missing order counts as incorrect.
double average_accuracy(const std::vector<EvaluationOutcome>& outcomes,
                        const std::vector<QuestionPair>& pairs);

// Fraction of pairs judged correctly in both orders.
double consistent_accuracy(const std::vector<EvaluationOutcome>& outcomes,
                           const std::vector<QuestionPair>& pairs);

StrategyReport build_strategy_report(const std::string& strategy,
                                     const std::vector<EvaluationOutcome>& outcomes,
                                     const std::vector<QuestionPair>& pairs);

struct RankingEntry {
  double points = 0.0;
  int appearances = 0;

  double score() const { return appearances > 0 ? points / appearances : 0.0; }
  bool operator==(const RankingEntry&) const = default;
};

using RankingTable = std::map<std::string, RankingEntry>;

// Per item over an all-pairs pool: +1 when preferred in both orders of a
// pair, +0.5 when preferred in exactly one, normalized by the number of
// pairs the item appears in. Ambiguous orders earn nothing.
RankingTable ranking_scores(const std::vector<EvaluationOutcome>& outcomes,
                            const std::vector<QuestionPair>& pairs);

// Correlations. Pearson uses population moments; Spearman is Pearson on
// average ranks; Kendall is tau-b with tie corrections.
double pearson(std::span<const double> xs, std::span<const double> ys);
double spearman(std::span<const double> xs, std::span<const double> ys);
double kendall(std::span<const double> xs, std::span<const double> ys);

// Exact one-sided upper-tail binomial probability P(X >= k | n, p0),
// accumulated from log-domain terms.
double binomial_test_one_sided(long long k, long long n, double p0);

// One-sided exact test of the candidate's consistently-correct pair count
// against the baseline's consistent accuracy as the null proportion.
double significance_vs_baseline(const std::vector<EvaluationOutcome>& candidate,
                                const std::vector<EvaluationOutcome>& baseline,
                                const std::vector<QuestionPair>& pairs);

struct AnovaResult {
  double f_statistic = 0.0;
  double p_value = 1.0;
  long long df_between = 0;
  long long df_within = 0;
};

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

// Ablation: DF or DC computed directly from the simulated outcomes, the
// preferred question chosen by the requirement direction; ties are
// Ambiguous.
PairVerdict direct_index_verdict(const PerformancePrediction& prediction,
                                 const QuestionPair& pair, const Requirement& requirement);

struct RobustnessReport {
  struct Run {
    double q1_correct_fraction = 0.0;
    double q2_correct_fraction = 0.0;
    int profile_count = 0;
  };
  std::vector<Run> runs;
};

// Repeats profile generation and performance prediction with the cache
// bypassed, reporting the simulated correct fraction per question per run.
RobustnessReport profile_robustness_report(const EvalContext& ctx, const PairInputs& inputs,
                                           int runs);

}  // namespace itemlab
