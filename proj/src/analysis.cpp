#include "itemlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "itemlab/error.hpp"
#include "itemlab/item_stats.hpp"

namespace itemlab {

namespace {

struct JudgmentIndex {
  // (pair_id, order) -> verdict; later entries overwrite earlier ones so a
  // resumed log behaves like its final state.
  std::map<std::pair<std::string, int>, PairVerdict> verdicts;

  static JudgmentIndex build(const std::vector<EvaluationOutcome>& outcomes,
                             const std::set<std::string>& known_pairs,
                             ErrorCode unknown_code) {
    JudgmentIndex index;
    for (const EvaluationOutcome& outcome : outcomes) {
      if (!known_pairs.count(outcome.pair_id)) {
        throw Error(unknown_code,
                    "outcome references pair '" + outcome.pair_id + "' absent from the pair set");
      }
      index.verdicts[{outcome.pair_id, outcome.order == Order::Original ? 0 : 1}] =
          outcome.verdict;
    }
    return index;
  }

  bool correct(const QuestionPair& pair, Order order) const {
    auto it = verdicts.find({pair.pair_id, order == Order::Original ? 0 : 1});
    if (it == verdicts.end() || it->second == PairVerdict::Ambiguous) return false;
    return (it->second == PairVerdict::Q1) == (pair.label == PairLabel::Q1);
  }
};

std::set<std::string> pair_id_set(const std::vector<QuestionPair>& pairs) {
  std::set<std::string> ids;
  for (const QuestionPair& p : pairs) ids.insert(p.pair_id);
  return ids;
}

}  // namespace

double average_accuracy(const std::vector<EvaluationOutcome>& outcomes,
                        const std::vector<QuestionPair>& pairs) {
  if (pairs.empty()) {
    throw Error(ErrorCode::InvalidParameters, "no pairs to score");
  }
  JudgmentIndex index =
      JudgmentIndex::build(outcomes, pair_id_set(pairs), ErrorCode::UnknownPairReference);
  int correct = 0;
  for (const QuestionPair& pair : pairs) {
    correct += index.correct(pair, Order::Original);
    correct += index.correct(pair, Order::Swapped);
  }
  return static_cast<double>(correct) / (2.0 * static_cast<double>(pairs.size()));
}

double consistent_accuracy(const std::vector<EvaluationOutcome>& outcomes,
                           const std::vector<QuestionPair>& pairs) {
  if (pairs.empty()) {
    throw Error(ErrorCode::InvalidParameters, "no pairs to score");
  }
  JudgmentIndex index =
      JudgmentIndex::build(outcomes, pair_id_set(pairs), ErrorCode::UnknownPairReference);
  int consistent = 0;
  for (const QuestionPair& pair : pairs) {
    consistent += index.correct(pair, Order::Original) && index.correct(pair, Order::Swapped);
  }
  return static_cast<double>(consistent) / static_cast<double>(pairs.size());
}

StrategyReport build_strategy_report(const std::string& strategy,
                                     const std::vector<EvaluationOutcome>& outcomes,
                                     const std::vector<QuestionPair>& pairs) {
  StrategyReport report;
  report.strategy = strategy;

  std::vector<EvaluationOutcome> own;
  for (const EvaluationOutcome& o : outcomes) {
    if (o.strategy == strategy) own.push_back(o);
  }

  for (Dimension d : {Dimension::TC, Dimension::DF, Dimension::DC, Dimension::DE}) {
    std::vector<QuestionPair> subset;
    for (const QuestionPair& p : pairs) {
      if (p.dimension == d) subset.push_back(p);
    }
    if (subset.empty()) continue;
    std::set<std::string> ids = pair_id_set(subset);
    std::vector<EvaluationOutcome> relevant;
    for (const EvaluationOutcome& o : own) {
      if (ids.count(o.pair_id)) relevant.push_back(o);
    }
    AccuracyRow row;
    row.dimension = to_string(d);
    row.pair_count = static_cast<int>(subset.size());
    row.average_accuracy = average_accuracy(relevant, subset);
    row.consistent_accuracy = consistent_accuracy(relevant, subset);
    report.per_dimension.push_back(row);
  }

  report.overall.dimension = "overall";
  report.overall.pair_count = static_cast<int>(pairs.size());
  report.overall.average_accuracy = average_accuracy(own, pairs);
  report.overall.consistent_accuracy = consistent_accuracy(own, pairs);
  return report;
}

RankingTable ranking_scores(const std::vector<EvaluationOutcome>& outcomes,
                            const std::vector<QuestionPair>& pairs) {
  JudgmentIndex index =
      JudgmentIndex::build(outcomes, pair_id_set(pairs), ErrorCode::UnknownPairReference);

  RankingTable table;
  for (const QuestionPair& pair : pairs) {
    auto preferred = [&](Order order) -> const std::string* {
      auto it =
          index.verdicts.find({pair.pair_id, order == Order::Original ? 0 : 1});
      if (it == index.verdicts.end() || it->second == PairVerdict::Ambiguous) return nullptr;
      return it->second == PairVerdict::Q1 ? &pair.q1 : &pair.q2;
    };
    const std::string* first = preferred(Order::Original);
    const std::string* second = preferred(Order::Swapped);

    table[pair.q1].appearances += 1;
    table[pair.q2].appearances += 1;
    for (const std::string* item : {&pair.q1, &pair.q2}) {
      double points = 0.0;
      if (first && *first == *item) points += 0.5;
      if (second && *second == *item) points += 0.5;
      table[*item].points += points;
    }
  }
  return table;
}

namespace {

void check_correlation_inputs(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::InvalidParameters, "series lengths differ");
  }
  if (xs.size() < 2) {
    throw Error(ErrorCode::InvalidParameters, "need at least 2 observations");
  }
}

// Average ranks, 1-based, ties averaged.
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
  check_correlation_inputs(xs, ys);
  const std::size_t n = xs.size();
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mean_x;
    double dy = ys[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0) {
    throw Error(ErrorCode::NotComputable, "a series has zero variance");
  }
  return cov / std::sqrt(var_x * var_y);
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  check_correlation_inputs(xs, ys);
  std::vector<double> rx = average_ranks(xs);
  std::vector<double> ry = average_ranks(ys);
  return pearson(rx, ry);
}

double kendall(std::span<const double> xs, std::span<const double> ys) {
  check_correlation_inputs(xs, ys);
  const long long n = static_cast<long long>(xs.size());

  // Sort by x then y, count x-tie pairs and joint-tie pairs, then count
  // discordant pairs as merge-sort inversions over the y sequence.
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (xs[a] != xs[b]) return xs[a] < xs[b];
    return ys[a] < ys[b];
  });

  auto tie_pairs = [](long long run) { return run * (run - 1) / 2; };

  long long ties_x = 0, ties_joint = 0;
  {
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
      ties_x += tie_pairs(static_cast<long long>(j - i + 1));
      std::size_t a = i;
      while (a <= j) {
        std::size_t b = a;
        while (b + 1 <= j && ys[order[b + 1]] == ys[order[a]]) ++b;
        ties_joint += tie_pairs(static_cast<long long>(b - a + 1));
        a = b + 1;
      }
      i = j + 1;
    }
  }

  long long ties_y = 0;
  {
    std::vector<double> sorted_y(ys.begin(), ys.end());
    std::sort(sorted_y.begin(), sorted_y.end());
    std::size_t i = 0;
    while (i < sorted_y.size()) {
      std::size_t j = i;
      while (j + 1 < sorted_y.size() && sorted_y[j + 1] == sorted_y[i]) ++j;
      ties_y += tie_pairs(static_cast<long long>(j - i + 1));
      i = j + 1;
    }
  }

  // Inversions of the y sequence in x-order; pairs tied in x sort by y and
  // contribute no inversion, and joint ties contribute none either.
  std::vector<double> sequence(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) sequence[i] = ys[order[i]];
  long long discordant = 0;
  {
    std::vector<double> buffer(sequence.size());
    std::function<void(std::size_t, std::size_t)> sort_count = [&](std::size_t lo,
                                                                   std::size_t hi) {
      if (hi - lo < 2) return;
      std::size_t mid = lo + (hi - lo) / 2;
      sort_count(lo, mid);
      sort_count(mid, hi);
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (sequence[b] < sequence[a]) {
          discordant += static_cast<long long>(mid - a);
          buffer[out++] = sequence[b++];
        } else {
          buffer[out++] = sequence[a++];
        }
      }
      while (a < mid) buffer[out++] = sequence[a++];
      while (b < hi) buffer[out++] = sequence[b++];
      std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo),
                buffer.begin() + static_cast<std::ptrdiff_t>(hi),
                sequence.begin() + static_cast<std::ptrdiff_t>(lo));
    };
    sort_count(0, sequence.size());
  }

  const long long total = n * (n - 1) / 2;
  long long concordant = total - ties_x - ties_y + ties_joint - discordant;
  double denom = std::sqrt(static_cast<double>(total - ties_x)) *
                 std::sqrt(static_cast<double>(total - ties_y));
  if (denom == 0.0) {
    throw Error(ErrorCode::NotComputable, "a series is entirely tied");
  }
  return (static_cast<double>(concordant) - static_cast<double>(discordant)) / denom;
}

namespace {

double log_choose(long long n, long long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double binomial_test_one_sided(long long k, long long n, double p0) {
  if (k < 0 || n < 0 || k > n || !(p0 > 0.0) || !(p0 < 1.0)) {
    throw Error(ErrorCode::InvalidParameters, "need 0 <= k <= n and 0 < p0 < 1");
  }
  if (k == 0) return 1.0;

  const double log_p = std::log(p0);
  const double log_q = std::log1p(-p0);
  // Kahan-compensated sum from the smallest terms (i = n) down to i = k.
  double sum = 0.0, compensation = 0.0;
  for (long long i = n; i >= k; --i) {
    double term = std::exp(log_choose(n, i) + static_cast<double>(i) * log_p +
                           static_cast<double>(n - i) * log_q);
    double y = term - compensation;
    double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
  }
  return std::min(sum, 1.0);
}

double significance_vs_baseline(const std::vector<EvaluationOutcome>& candidate,
                                const std::vector<EvaluationOutcome>& baseline,
                                const std::vector<QuestionPair>& pairs) {
  if (pairs.empty()) {
    throw Error(ErrorCode::InvalidParameters, "no pairs to test on");
  }
  std::set<std::string> ids = pair_id_set(pairs);
  JudgmentIndex candidate_index =
      JudgmentIndex::build(candidate, ids, ErrorCode::MismatchedPairSets);
  JudgmentIndex baseline_index =
      JudgmentIndex::build(baseline, ids, ErrorCode::MismatchedPairSets);

  long long n = static_cast<long long>(pairs.size());
  long long candidate_consistent = 0, baseline_consistent = 0;
  for (const QuestionPair& pair : pairs) {
    candidate_consistent += candidate_index.correct(pair, Order::Original) &&
                            candidate_index.correct(pair, Order::Swapped);
    baseline_consistent += baseline_index.correct(pair, Order::Original) &&
                           baseline_index.correct(pair, Order::Swapped);
  }
  double p0 = static_cast<double>(baseline_consistent) / static_cast<double>(n);
  if (p0 <= 0.0) return candidate_consistent == 0 ? 1.0 : 0.0;
  if (p0 >= 1.0) return 1.0;
  return binomial_test_one_sided(candidate_consistent, n, p0);
}

namespace {

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 300;
  constexpr double kEpsilon = 3.0e-14;
  constexpr double kTiny = 1.0e-300;

  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) break;
  }
  return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                  b * std::log1p(-x);
  double bt = std::exp(log_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - bt * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) {
    throw Error(ErrorCode::DegenerateGroups, "need at least 2 groups");
  }
  long long total_count = 0;
  for (const auto& group : groups) {
    if (group.empty()) {
      throw Error(ErrorCode::DegenerateGroups, "a group is empty");
    }
    total_count += static_cast<long long>(group.size());
  }
  const long long k = static_cast<long long>(groups.size());
  if (total_count < k + 1) {
    throw Error(ErrorCode::DegenerateGroups, "not enough observations for within-group df");
  }

  double grand_sum = 0.0;
  for (const auto& group : groups) {
    for (double v : group) grand_sum += v;
  }
  double grand_mean = grand_sum / static_cast<double>(total_count);

  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& group : groups) {
    double mean = std::accumulate(group.begin(), group.end(), 0.0) /
                  static_cast<double>(group.size());
    double dm = mean - grand_mean;
    ss_between += static_cast<double>(group.size()) * dm * dm;
    for (double v : group) {
      ss_within += (v - mean) * (v - mean);
    }
  }
  if (ss_within == 0.0) {
    throw Error(ErrorCode::DegenerateGroups, "within-group variance is zero");
  }

  AnovaResult result;
  result.df_between = k - 1;
  result.df_within = total_count - k;
  double ms_between = ss_between / static_cast<double>(result.df_between);
  double ms_within = ss_within / static_cast<double>(result.df_within);
  result.f_statistic = ms_between / ms_within;

  double d1 = static_cast<double>(result.df_between);
  double d2 = static_cast<double>(result.df_within);
  result.p_value =
      regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * result.f_statistic));
  return result;
}

PairVerdict direct_index_verdict(const PerformancePrediction& prediction,
                                 const QuestionPair& pair, const Requirement& requirement) {
  if (requirement.dimension != Dimension::DF && requirement.dimension != Dimension::DC) {
    throw Error(ErrorCode::UnknownDimension,
                "direct index comparison supports DF and DC only");
  }

  std::vector<QuizItem> items(2);
  items[0].item_id = pair.q1;
  items[0].material_id = pair.material_id;
  items[0].stem = pair.q1;
  items[1].item_id = pair.q2;
  items[1].material_id = pair.material_id;
  items[1].stem = pair.q2;

  std::vector<ResponseRecord> responses;
  for (const auto& row : prediction.rows) {
    if (row.q1.kind != SlotOutcomeKind::Unpredicted) {
      responses.push_back({row.student, pair.q1, row.q1.kind == SlotOutcomeKind::Correct, {}});
    }
    if (row.q2.kind != SlotOutcomeKind::Unpredicted) {
      responses.push_back({row.student, pair.q2, row.q2.kind == SlotOutcomeKind::Correct, {}});
    }
  }
  ResponseMatrix matrix = build_response_matrix(items, responses);

  double value_q1 = 0.0, value_q2 = 0.0;
  if (requirement.dimension == Dimension::DF) {
    value_q1 = difficulty_index(matrix, pair.q1);
    value_q2 = difficulty_index(matrix, pair.q2);
  } else {
    std::optional<double> dc1 = discrimination_index(matrix, pair.q1);
    std::optional<double> dc2 = discrimination_index(matrix, pair.q2);
    if (!dc1 || !dc2) {
      throw Error(ErrorCode::NotComputable,
                  "simulated discrimination is undefined for pair '" + pair.pair_id + "'");
    }
    value_q1 = *dc1;
    value_q2 = *dc2;
  }

  if (value_q1 == value_q2) return PairVerdict::Ambiguous;
  bool q1_wins = value_q1 > value_q2;
  if (requirement.direction == Direction::PreferLower) q1_wins = !q1_wins;
  return q1_wins ? PairVerdict::Q1 : PairVerdict::Q2;
}

RobustnessReport profile_robustness_report(const EvalContext& ctx, const PairInputs& inputs,
                                           int runs) {
  if (runs < 2) {
    throw Error(ErrorCode::InvalidParameters, "need at least 2 runs to compare");
  }
  RobustnessReport report;
  for (int r = 0; r < runs; ++r) {
    std::vector<StudentProfile> profiles =
        qgsms_generate_profiles(ctx, inputs.material, nullptr, /*bypass_cache=*/true);
    PerformancePrediction prediction = qgsms_predict_performance(
        ctx, inputs.material, profiles, inputs, nullptr, /*bypass_cache=*/true);

    auto fraction = [&](bool first_slot) {
      int predicted = 0, correct = 0;
      for (const auto& row : prediction.rows) {
        const SlotOutcome& slot = first_slot ? row.q1 : row.q2;
        if (slot.kind == SlotOutcomeKind::Unpredicted) continue;
        ++predicted;
        correct += slot.kind == SlotOutcomeKind::Correct;
      }
      if (predicted == 0) {
        throw Error(ErrorCode::NotComputable, "a run produced no predictions for a question");
      }
      return static_cast<double>(correct) / static_cast<double>(predicted);
    };
    report.runs.push_back(
        {fraction(true), fraction(false), static_cast<int>(profiles.size())});
  }
  return report;
}

}  // namespace itemlab
