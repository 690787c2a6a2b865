#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "itemlab/domain.hpp"
#include "itemlab/gateway.hpp"
#include "itemlab/pair_builder.hpp"
#include "itemlab/templates.hpp"

namespace itemlab {

struct StudentProfile {
  std::string name;
  std::string understanding;

  bool operator==(const StudentProfile&) const = default;
};

enum class SlotOutcomeKind { Correct, Incorrect, Unpredicted };

struct SlotOutcome {
  SlotOutcomeKind kind = SlotOutcomeKind::Unpredicted;
  std::string distractor;  // for Incorrect; may be empty when unspecified

  bool operator==(const SlotOutcome&) const = default;
};

// Per-student predicted outcomes for both questions of a pair, in pair
// space (q1/q2 regardless of presentation order).
struct PerformancePrediction {
  struct Row {
    std::string student;
    SlotOutcome q1;
    SlotOutcome q2;

    bool operator==(const Row&) const = default;
  };
  std::vector<Row> rows;

  int predicted_count() const;
  bool operator==(const PerformancePrediction&) const = default;
};

enum class Order { Original, Swapped };

const char* to_string(Order order);
Order order_from_string(const std::string& text);

// Judgment expressed in pair space; Ambiguous means the evaluator failed
// to commit even after one re-ask and counts as incorrect downstream.
enum class PairVerdict { Q1, Q2, Ambiguous };

const char* to_string(PairVerdict verdict);
PairVerdict pair_verdict_from_string(const std::string& text);

// Raw parse of one judge response: which presented slot was preferred.
enum class Verdict { PreferA, PreferB };

// Case-insensitive scan for "output (a)" / "output (b)"; the final
// occurrence wins when both appear.
Verdict parse_verdict(const std::string& response);

struct TranscriptEntry {
  std::string prompt;
  std::string response;

  bool operator==(const TranscriptEntry&) const = default;
};

struct EvaluationOutcome {
  std::string pair_id;
  std::string strategy;
  Order order = Order::Original;
  PairVerdict verdict = PairVerdict::Ambiguous;
  std::vector<TranscriptEntry> transcript;
  std::optional<std::string> profile_set_id;

  bool operator==(const EvaluationOutcome&) const = default;
};

enum class Strategy { Vanilla, CoT, Metrics, Reference, Swap, QgSms, QgSmsDirect };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& text);
std::vector<Strategy> all_strategies();

struct EvalContext {
  Gateway& gateway;
  const TemplateStore& templates;
  std::string model;
  double temperature = 1.0;
  int min_profiles = 10;
};

struct PairInputs {
  const QuestionPair& pair;
  const QuizItem& q1;
  const QuizItem& q2;
  const LearningMaterial& material;
};

std::string format_question(const QuizItem& item);
std::string format_material(const LearningMaterial& material);
std::string format_profiles(const std::vector<StudentProfile>& profiles);
// Serialized for the judge with pair slots relabeled to the presented
// Output (a)/(b) positions.
std::string serialize_performance(const PerformancePrediction& prediction, Order order);

EvaluationOutcome run_vanilla(const EvalContext& ctx, const PairInputs& inputs,
                              const Requirement& requirement, Order order);
EvaluationOutcome run_cot(const EvalContext& ctx, const PairInputs& inputs,
                          const Requirement& requirement, Order order);
EvaluationOutcome run_metrics(const EvalContext& ctx, const PairInputs& inputs,
                              const Requirement& requirement, Order order);
EvaluationOutcome run_reference(const EvalContext& ctx, const PairInputs& inputs,
                                const Requirement& requirement, Order order);

// CoT in both orders; contradictions settled by one synthesis call whose
// verdict is recorded for both orders.
std::pair<EvaluationOutcome, EvaluationOutcome> run_swap(const EvalContext& ctx,
                                                         const PairInputs& inputs,
                                                         const Requirement& requirement);

std::vector<StudentProfile> qgsms_generate_profiles(
    const EvalContext& ctx, const LearningMaterial& material,
    std::vector<TranscriptEntry>* transcript = nullptr, bool bypass_cache = false);

PerformancePrediction qgsms_predict_performance(
    const EvalContext& ctx, const LearningMaterial& material,
    const std::vector<StudentProfile>& profiles, const PairInputs& inputs,
    std::vector<TranscriptEntry>* transcript = nullptr, bool bypass_cache = false);

EvaluationOutcome qgsms_judge(const EvalContext& ctx, const PairInputs& inputs,
                              const Requirement& requirement,
                              const PerformancePrediction& prediction, Order order,
                              const std::string& profile_set_id = {},
                              const std::vector<TranscriptEntry>& pipeline_transcript = {});

struct QgsmsRun {
  EvaluationOutcome original;
  EvaluationOutcome swapped;
  std::vector<StudentProfile> profiles;
  PerformancePrediction prediction;
  std::string profile_set_id;
};

// Full three-step pipeline: one profile generation, one prediction, and a
// judge call per presentation order sharing the same simulated cohort.
QgsmsRun run_qgsms(const EvalContext& ctx, const PairInputs& inputs, const Requirement& requirement);

std::string profile_set_hash(const std::vector<StudentProfile>& profiles);

struct GeneratedQuestion {
  QuizItem item;
  std::string quality_tag;  // intended level, not trusted as ground truth

  bool operator==(const GeneratedQuestion&) const = default;
};

// How many questions the controlled generation prompt for a dimension
// demands (2 per quality level).
int expected_generated_count(Dimension d);

std::vector<GeneratedQuestion> generate_controlled_questions(const EvalContext& ctx,
                                                             const LearningMaterial& material,
                                                             Dimension dimension);

struct StrategyRunResult {
  std::vector<EvaluationOutcome> outcomes;  // original then swapped
  std::optional<QgsmsRun> simulation;       // present for the qg-sms strategies
};

// Runs a strategy over both presentation orders of a pair.
StrategyRunResult run_strategy(const EvalContext& ctx, Strategy strategy, const PairInputs& inputs,
                               const Requirement& requirement);

}  // namespace itemlab
