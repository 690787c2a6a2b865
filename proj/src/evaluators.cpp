#include "itemlab/evaluators.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "itemlab/analysis.hpp"
#include "itemlab/error.hpp"
#include "itemlab/hash.hpp"

namespace itemlab {

namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view text) {
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return "";
  std::size_t end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// Drops "1.", "2)", "-", "*" style list markers.
std::string strip_list_marker(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  std::size_t digits = i;
  while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) {
    ++digits;
  }
  if (digits > i && digits < line.size() && (line[digits] == '.' || line[digits] == ')')) {
    return trim(line.substr(digits + 1));
  }
  if (i < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == '+')) {
    return trim(line.substr(i + 1));
  }
  return trim(line.substr(i));
}

}  // namespace

int PerformancePrediction::predicted_count() const {
  int count = 0;
  for (const Row& row : rows) {
    count += row.q1.kind != SlotOutcomeKind::Unpredicted;
    count += row.q2.kind != SlotOutcomeKind::Unpredicted;
  }
  return count;
}

const char* to_string(Order order) {
  return order == Order::Original ? "original" : "swapped";
}

Order order_from_string(const std::string& text) {
  if (text == "original") return Order::Original;
  if (text == "swapped") return Order::Swapped;
  throw Error(ErrorCode::MalformedRecord, "unrecognized order '" + text + "'");
}

const char* to_string(PairVerdict verdict) {
  switch (verdict) {
    case PairVerdict::Q1: return "Q1";
    case PairVerdict::Q2: return "Q2";
    case PairVerdict::Ambiguous: return "Ambiguous";
  }
  return "Ambiguous";
}

PairVerdict pair_verdict_from_string(const std::string& text) {
  if (text == "Q1") return PairVerdict::Q1;
  if (text == "Q2") return PairVerdict::Q2;
  if (text == "Ambiguous") return PairVerdict::Ambiguous;
  throw Error(ErrorCode::MalformedRecord, "unrecognized verdict '" + text + "'");
}

Verdict parse_verdict(const std::string& response) {
  std::string lc = lowercase(response);
  std::size_t last_a = lc.rfind("output (a)");
  std::size_t last_b = lc.rfind("output (b)");
  if (last_a == std::string::npos && last_b == std::string::npos) {
    throw Error(ErrorCode::AmbiguousVerdict, "response names neither Output (a) nor Output (b)");
  }
  if (last_a == std::string::npos) return Verdict::PreferB;
  if (last_b == std::string::npos) return Verdict::PreferA;
  return last_a > last_b ? Verdict::PreferA : Verdict::PreferB;
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Vanilla: return "vanilla";
    case Strategy::CoT: return "cot";
    case Strategy::Metrics: return "metrics";
    case Strategy::Reference: return "reference";
    case Strategy::Swap: return "swap";
    case Strategy::QgSms: return "qg-sms";
    case Strategy::QgSmsDirect: return "qg-sms-direct";
  }
  return "vanilla";
}

Strategy strategy_from_string(const std::string& text) {
  for (Strategy s : all_strategies()) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::ConfigError, "unknown strategy '" + text + "'");
}

std::vector<Strategy> all_strategies() {
  return {Strategy::Vanilla, Strategy::CoT,   Strategy::Metrics,    Strategy::Reference,
          Strategy::Swap,    Strategy::QgSms, Strategy::QgSmsDirect};
}

std::string format_question(const QuizItem& item) {
  std::string out = item.stem;
  for (const Option& option : item.options) {
    out += "\n" + option.option_id + ") " + option.text;
  }
  return out;
}

std::string format_material(const LearningMaterial& material) {
  std::string out = material.title;
  for (const Section& section : material.sections) {
    out += "\n\n[" + section.section_id + "] " + section.body;
  }
  return out;
}

std::string format_profiles(const std::vector<StudentProfile>& profiles) {
  std::string out;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    out += std::to_string(i + 1) + ". " + profiles[i].name + ": " + profiles[i].understanding;
    if (i + 1 < profiles.size()) out += "\n";
  }
  return out;
}

namespace {

std::string slot_text(const SlotOutcome& outcome) {
  switch (outcome.kind) {
    case SlotOutcomeKind::Correct: return "Correct";
    case SlotOutcomeKind::Incorrect:
      return outcome.distractor.empty() ? "Incorrect"
                                        : "Incorrect (confused by " + outcome.distractor + ")";
    case SlotOutcomeKind::Unpredicted: return "No prediction";
  }
  return "No prediction";
}

}  // namespace

std::string serialize_performance(const PerformancePrediction& prediction, Order order) {
  std::string out;
  for (std::size_t i = 0; i < prediction.rows.size(); ++i) {
    const auto& row = prediction.rows[i];
    const SlotOutcome& first = order == Order::Original ? row.q1 : row.q2;
    const SlotOutcome& second = order == Order::Original ? row.q2 : row.q1;
    out += row.student + " | Output (a): " + slot_text(first) +
           " | Output (b): " + slot_text(second);
    if (i + 1 < prediction.rows.size()) out += "\n";
  }
  return out;
}

namespace {

PromptRequest make_request(const EvalContext& ctx, const std::string& tag,
                           std::vector<Message> messages, bool bypass_cache = false) {
  PromptRequest request;
  request.model = ctx.model;
  request.temperature = ctx.temperature;
  request.messages = std::move(messages);
  request.request_tag = tag;
  request.bypass_cache = bypass_cache;
  return request;
}

// One user turn; appends (prompt, response) to the transcript.
std::string ask(const EvalContext& ctx, const std::string& tag, const std::string& prompt,
                std::vector<TranscriptEntry>& transcript, bool bypass_cache = false) {
  CompletionResult result =
      ctx.gateway.complete(make_request(ctx, tag, {{"user", prompt}}, bypass_cache));
  transcript.push_back({prompt, result.content});
  return result.content;
}

// Follow-up turn carrying the earlier exchange, so the retry request is
// cache-distinct from the original.
std::string ask_followup(const EvalContext& ctx, const std::string& tag, const std::string& prompt,
                         const std::string& previous_response,
                         const std::string& clarification,
                         std::vector<TranscriptEntry>& transcript, bool bypass_cache = false) {
  CompletionResult result = ctx.gateway.complete(make_request(
      ctx, tag,
      {{"user", prompt}, {"assistant", previous_response}, {"user", clarification}},
      bypass_cache));
  transcript.push_back({clarification, result.content});
  return result.content;
}

constexpr const char* kVerdictClarification =
    "Answer with exactly \"Output (a)\" or \"Output (b)\".";

// Judge call with one re-ask on an ambiguous answer; nullopt = still
// ambiguous (fails closed).
std::optional<Verdict> judged_call(const EvalContext& ctx, const std::string& tag,
                                   const std::string& prompt,
                                   std::vector<TranscriptEntry>& transcript) {
  std::string response = ask(ctx, tag, prompt, transcript);
  try {
    return parse_verdict(response);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AmbiguousVerdict) throw;
  }
  std::string retry =
      ask_followup(ctx, tag + "/retry", prompt, response, kVerdictClarification, transcript);
  try {
    return parse_verdict(retry);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AmbiguousVerdict) throw;
    return std::nullopt;
  }
}

PairVerdict deswap(Verdict verdict, Order order) {
  bool prefer_first = verdict == Verdict::PreferA;
  if (order == Order::Swapped) prefer_first = !prefer_first;
  return prefer_first ? PairVerdict::Q1 : PairVerdict::Q2;
}

PairVerdict deswap(std::optional<Verdict> verdict, Order order) {
  return verdict ? deswap(*verdict, order) : PairVerdict::Ambiguous;
}

struct PresentedPair {
  std::string first;   // Output (a)
  std::string second;  // Output (b)
};

PresentedPair presented_questions(const PairInputs& inputs, Order order) {
  std::string q1 = format_question(inputs.q1);
  std::string q2 = format_question(inputs.q2);
  return order == Order::Original ? PresentedPair{q1, q2} : PresentedPair{q2, q1};
}

std::map<std::string, std::string> judge_bindings(const PairInputs& inputs,
                                                  const Requirement& requirement, Order order) {
  PresentedPair presented = presented_questions(inputs, order);
  return {{"L", format_material(inputs.material)},
          {"requirement", requirement.rendered_text},
          {"requirement_description", requirement_description(requirement.dimension)},
          {"Q1", presented.first},
          {"Q2", presented.second}};
}

EvaluationOutcome single_prompt_judgment(const EvalContext& ctx, const PairInputs& inputs,
                                         const Requirement& requirement, Order order,
                                         Strategy strategy, const std::string& template_name) {
  std::string prompt =
      render_prompt(ctx.templates.get(template_name), judge_bindings(inputs, requirement, order));
  EvaluationOutcome outcome;
  outcome.pair_id = inputs.pair.pair_id;
  outcome.strategy = to_string(strategy);
  outcome.order = order;
  std::string tag =
      to_string(strategy) + std::string("/judge/") + inputs.pair.pair_id + "/" + to_string(order);
  outcome.verdict = deswap(judged_call(ctx, tag, prompt, outcome.transcript), order);
  return outcome;
}

EvaluationOutcome staged_judgment(const EvalContext& ctx, const PairInputs& inputs,
                                  const Requirement& requirement, Order order, Strategy strategy,
                                  const std::string& generate_template,
                                  const std::string& judge_template,
                                  const std::string& binding_name) {
  EvaluationOutcome outcome;
  outcome.pair_id = inputs.pair.pair_id;
  outcome.strategy = to_string(strategy);
  outcome.order = order;

  // Order-independent stage; identical across both orders so the cache
  // serves the second one.
  std::map<std::string, std::string> stage_bindings = {
      {"L", format_material(inputs.material)},
      {"requirement", requirement.rendered_text},
      {"requirement_description", requirement_description(requirement.dimension)}};
  std::string stage_prompt = render_prompt(ctx.templates.get(generate_template), stage_bindings);
  std::string stage_tag =
      to_string(strategy) + std::string("/generate/") + inputs.pair.pair_id;
  std::string stage_response = ask(ctx, stage_tag, stage_prompt, outcome.transcript);
  if (trim(stage_response).empty()) {
    warn(to_string(strategy) + std::string(" stage returned no text for ") +
         inputs.pair.pair_id + "; judging without it");
  }

  auto bindings = judge_bindings(inputs, requirement, order);
  bindings[binding_name] = stage_response;
  std::string prompt = render_prompt(ctx.templates.get(judge_template), bindings);
  std::string tag =
      to_string(strategy) + std::string("/judge/") + inputs.pair.pair_id + "/" + to_string(order);
  outcome.verdict = deswap(judged_call(ctx, tag, prompt, outcome.transcript), order);
  return outcome;
}

}  // namespace

EvaluationOutcome run_vanilla(const EvalContext& ctx, const PairInputs& inputs,
                              const Requirement& requirement, Order order) {
  return single_prompt_judgment(ctx, inputs, requirement, order, Strategy::Vanilla, "vanilla");
}

EvaluationOutcome run_cot(const EvalContext& ctx, const PairInputs& inputs,
                          const Requirement& requirement, Order order) {
  return single_prompt_judgment(ctx, inputs, requirement, order, Strategy::CoT, "cot");
}

EvaluationOutcome run_metrics(const EvalContext& ctx, const PairInputs& inputs,
                              const Requirement& requirement, Order order) {
  return staged_judgment(ctx, inputs, requirement, order, Strategy::Metrics,
                         "metrics_generate", "metrics_judge", "metrics");
}

EvaluationOutcome run_reference(const EvalContext& ctx, const PairInputs& inputs,
                                const Requirement& requirement, Order order) {
  return staged_judgment(ctx, inputs, requirement, order, Strategy::Reference,
                         "reference_generate", "reference_judge", "reference");
}

std::pair<EvaluationOutcome, EvaluationOutcome> run_swap(const EvalContext& ctx,
                                                         const PairInputs& inputs,
                                                         const Requirement& requirement) {
  EvaluationOutcome original =
      single_prompt_judgment(ctx, inputs, requirement, Order::Original, Strategy::Swap, "cot");
  EvaluationOutcome swapped =
      single_prompt_judgment(ctx, inputs, requirement, Order::Swapped, Strategy::Swap, "cot");

  bool agree = original.verdict == swapped.verdict &&
               original.verdict != PairVerdict::Ambiguous;
  if (agree) return {std::move(original), std::move(swapped)};

  auto bindings = judge_bindings(inputs, requirement, Order::Original);
  bindings["response_original"] = original.transcript.front().response;
  bindings["response_swapped"] = swapped.transcript.front().response;
  std::string prompt = render_prompt(ctx.templates.get("swap_synthesize"), bindings);
  std::string tag = std::string("swap/synthesize/") + inputs.pair.pair_id;

  std::vector<TranscriptEntry> synthesis;
  // The synthesis prompt presents the questions in original framing, so its
  // verdict is de-swapped as an original-order judgment.
  PairVerdict final_verdict =
      deswap(judged_call(ctx, tag, prompt, synthesis), Order::Original);
  for (EvaluationOutcome* outcome : {&original, &swapped}) {
    outcome->verdict = final_verdict;
    outcome->transcript.insert(outcome->transcript.end(), synthesis.begin(), synthesis.end());
  }
  return {std::move(original), std::move(swapped)};
}

namespace {

std::vector<StudentProfile> parse_profiles(const std::string& text) {
  std::vector<StudentProfile> profiles;
  for (const std::string& raw : split_lines(text)) {
    std::string line = strip_list_marker(raw);
    if (line.empty()) continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) {
      if (!profiles.empty()) {
        profiles.back().understanding += " " + trim(line);
      }
      continue;
    }
    std::string name = trim(line.substr(0, colon));
    std::string understanding = trim(line.substr(colon + 1));
    if (name.empty() || understanding.empty()) continue;
    profiles.push_back({std::move(name), std::move(understanding)});
  }
  return profiles;
}

// Scans a fragment for Correct / Incorrect (+ confusing distractor).
SlotOutcome parse_slot_outcome(const std::string& fragment) {
  SlotOutcome outcome;
  std::string lc = lowercase(fragment);
  std::size_t incorrect = lc.find("incorrect");
  if (incorrect != std::string::npos) {
    outcome.kind = SlotOutcomeKind::Incorrect;
    for (const char* marker : {"confused by", "distracted by", "distractor"}) {
      std::size_t at = lc.find(marker);
      if (at == std::string::npos) continue;
      std::string rest = fragment.substr(at + std::string(marker).size());
      std::size_t stop = rest.find_first_of("),;|\n");
      if (stop != std::string::npos) rest = rest.substr(0, stop);
      rest = trim(rest);
      if (!rest.empty() && rest.front() == ':') rest = trim(rest.substr(1));
      if (lowercase(rest).rfind("option ", 0) == 0) rest = trim(rest.substr(7));
      outcome.distractor = rest;
      break;
    }
    return outcome;
  }
  // "incorrect" was ruled out above, so any "correct" here is affirmative.
  if (lc.find("correct") != std::string::npos) {
    outcome.kind = SlotOutcomeKind::Correct;
  }
  return outcome;
}

// Positions within `lc` where a question slot is referenced.
std::vector<std::pair<std::size_t, int>> find_slot_mentions(const std::string& lc) {
  std::vector<std::pair<std::size_t, int>> mentions;
  auto scan = [&](const char* needle, int slot) {
    std::size_t at = 0;
    while ((at = lc.find(needle, at)) != std::string::npos) {
      mentions.emplace_back(at, slot);
      at += 1;
    }
  };
  scan("question 1", 1);
  scan("q1", 1);
  scan("output (a)", 1);
  scan("question 2", 2);
  scan("q2", 2);
  scan("output (b)", 2);
  std::sort(mentions.begin(), mentions.end());
  return mentions;
}

void apply_slot(PerformancePrediction::Row& row, int slot, const SlotOutcome& outcome) {
  if (outcome.kind == SlotOutcomeKind::Unpredicted) return;
  SlotOutcome& target = slot == 1 ? row.q1 : row.q2;
  if (target.kind == SlotOutcomeKind::Unpredicted) target = outcome;
}

void parse_performance_text(const std::string& text, PerformancePrediction& prediction) {
  std::map<std::string, std::size_t> row_index;
  for (std::size_t i = 0; i < prediction.rows.size(); ++i) {
    row_index[lowercase(prediction.rows[i].student)] = i;
  }

  for (const std::string& raw : split_lines(text)) {
    std::string line = strip_list_marker(raw);
    if (line.empty()) continue;

    std::vector<std::string> cells;
    if (line.find('|') != std::string::npos) {
      std::size_t start = 0;
      while (true) {
        std::size_t bar = line.find('|', start);
        cells.push_back(trim(line.substr(start, bar - start)));
        if (bar == std::string::npos) break;
        start = bar + 1;
      }
    } else {
      std::size_t colon = line.find(':');
      if (colon == std::string::npos) continue;
      cells.push_back(trim(line.substr(0, colon)));
      cells.push_back(trim(line.substr(colon + 1)));
    }
    if (cells.size() < 2) continue;

    auto row_it = row_index.find(lowercase(cells.front()));
    if (row_it == row_index.end()) continue;
    PerformancePrediction::Row& row = prediction.rows[row_it->second];

    int positional_slot = 1;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      std::string lc = lowercase(cell);
      auto mentions = find_slot_mentions(lc);
      if (mentions.empty()) {
        if (positional_slot <= 2) {
          apply_slot(row, positional_slot, parse_slot_outcome(cell));
          ++positional_slot;
        }
        continue;
      }
      for (std::size_t m = 0; m < mentions.size(); ++m) {
        std::size_t begin = mentions[m].first;
        std::size_t end = m + 1 < mentions.size() ? mentions[m + 1].first : cell.size();
        apply_slot(row, mentions[m].second, parse_slot_outcome(cell.substr(begin, end - begin)));
      }
      positional_slot = mentions.back().second + 1;
    }
  }
}

std::vector<std::string> missing_students(const PerformancePrediction& prediction) {
  std::vector<std::string> missing;
  for (const auto& row : prediction.rows) {
    if (row.q1.kind == SlotOutcomeKind::Unpredicted ||
        row.q2.kind == SlotOutcomeKind::Unpredicted) {
      missing.push_back(row.student);
    }
  }
  return missing;
}

}  // namespace

std::string profile_set_hash(const std::vector<StudentProfile>& profiles) {
  std::string joined;
  for (const StudentProfile& p : profiles) {
    joined += p.name + "\x1f" + p.understanding + "\x1e";
  }
  return sha256_hex(joined).substr(0, 16);
}

std::vector<StudentProfile> qgsms_generate_profiles(const EvalContext& ctx,
                                                    const LearningMaterial& material,
                                                    std::vector<TranscriptEntry>* transcript,
                                                    bool bypass_cache) {
  std::vector<TranscriptEntry> local;
  std::vector<TranscriptEntry>& entries = transcript ? *transcript : local;
  std::string prompt = render_prompt(ctx.templates.get("qgsms_step1"),
                                     {{"L", format_material(material)}});
  std::string tag = "qg-sms/step1/" + material.material_id;
  std::string response = ask(ctx, tag, prompt, entries, bypass_cache);
  std::vector<StudentProfile> profiles = parse_profiles(response);
  if (static_cast<int>(profiles.size()) >= ctx.min_profiles) return profiles;

  std::string clarification =
      "Your list contained fewer than " + std::to_string(ctx.min_profiles) +
      " students. Provide the complete list again, with at least " +
      std::to_string(ctx.min_profiles) +
      " students, one per line in the format: <number>. <name>: <description>";
  std::string retry = ask_followup(ctx, tag + "/retry", prompt, response, clarification,
                                   entries, bypass_cache);
  profiles = parse_profiles(retry);
  if (static_cast<int>(profiles.size()) >= ctx.min_profiles) return profiles;
  throw Error(ErrorCode::TooFewProfiles,
              "got " + std::to_string(profiles.size()) + " profiles for material '" +
                  material.material_id + "', need " + std::to_string(ctx.min_profiles));
}

PerformancePrediction qgsms_predict_performance(const EvalContext& ctx,
                                                const LearningMaterial& material,
                                                const std::vector<StudentProfile>& profiles,
                                                const PairInputs& inputs,
                                                std::vector<TranscriptEntry>* transcript,
                                                bool bypass_cache) {
  if (profiles.empty()) {
    throw Error(ErrorCode::InvalidParameters, "no student profiles supplied");
  }
  std::vector<TranscriptEntry> local;
  std::vector<TranscriptEntry>& entries = transcript ? *transcript : local;

  PerformancePrediction prediction;
  for (const StudentProfile& p : profiles) {
    prediction.rows.push_back({p.name, {}, {}});
  }

  std::string prompt = render_prompt(ctx.templates.get("qgsms_step2"),
                                     {{"L", format_material(material)},
                                      {"profiles", format_profiles(profiles)},
                                      {"Q1", format_question(inputs.q1)},
                                      {"Q2", format_question(inputs.q2)}});
  std::string tag = "qg-sms/step2/" + inputs.pair.pair_id;
  std::string response = ask(ctx, tag, prompt, entries, bypass_cache);
  parse_performance_text(response, prediction);

  std::vector<std::string> missing = missing_students(prediction);
  if (!missing.empty()) {
    std::string listed;
    for (std::size_t i = 0; i < missing.size(); ++i) {
      listed += (i ? ", " : "") + missing[i];
    }
    std::string clarification =
        "Predictions are missing or unreadable for: " + listed +
        ". Provide the complete table again, one line per student in the format: "
        "<name> | Question 1: Correct or Incorrect (confused by <distractor>) | "
        "Question 2: Correct or Incorrect (confused by <distractor>)";
    std::string retry = ask_followup(ctx, tag + "/retry", prompt, response, clarification,
                                     entries, bypass_cache);
    parse_performance_text(retry, prediction);
  }

  if (prediction.predicted_count() == 0) {
    throw Error(ErrorCode::ParseFailure,
                "no performance predictions could be parsed for pair '" +
                    inputs.pair.pair_id + "'");
  }
  for (const std::string& still_missing : missing_students(prediction)) {
    warn("no prediction for student '" + still_missing + "' on pair '" + inputs.pair.pair_id +
         "'; recorded as unpredicted");
  }
  return prediction;
}

EvaluationOutcome qgsms_judge(const EvalContext& ctx, const PairInputs& inputs,
                              const Requirement& requirement,
                              const PerformancePrediction& prediction, Order order,
                              const std::string& profile_set_id,
                              const std::vector<TranscriptEntry>& pipeline_transcript) {
  if (prediction.rows.empty() || prediction.predicted_count() == 0) {
    throw Error(ErrorCode::InvalidParameters, "performance prediction is empty");
  }
  auto bindings = judge_bindings(inputs, requirement, order);
  bindings["performance"] = serialize_performance(prediction, order);
  std::string prompt = render_prompt(ctx.templates.get("qgsms_step3"), bindings);

  EvaluationOutcome outcome;
  outcome.pair_id = inputs.pair.pair_id;
  outcome.strategy = to_string(Strategy::QgSms);
  outcome.order = order;
  if (!profile_set_id.empty()) outcome.profile_set_id = profile_set_id;
  outcome.transcript = pipeline_transcript;
  std::string tag = "qg-sms/step3/" + inputs.pair.pair_id + "/" + to_string(order);
  outcome.verdict = deswap(judged_call(ctx, tag, prompt, outcome.transcript), order);
  return outcome;
}

QgsmsRun run_qgsms(const EvalContext& ctx, const PairInputs& inputs, const Requirement& requirement) {
  QgsmsRun run;
  std::vector<TranscriptEntry> pipeline;
  run.profiles = qgsms_generate_profiles(ctx, inputs.material, &pipeline);
  run.profile_set_id = profile_set_hash(run.profiles);
  run.prediction =
      qgsms_predict_performance(ctx, inputs.material, run.profiles, inputs, &pipeline);
  run.original = qgsms_judge(ctx, inputs, requirement, run.prediction, Order::Original,
                             run.profile_set_id, pipeline);
  run.swapped = qgsms_judge(ctx, inputs, requirement, run.prediction, Order::Swapped,
                            run.profile_set_id, pipeline);
  return run;
}

int expected_generated_count(Dimension d) {
  switch (d) {
    case Dimension::DF: return 6;
    case Dimension::DC: return 6;
    case Dimension::DE: return 8;  // 2 each for 0..3 effective distractors
    case Dimension::TC: break;
  }
  throw Error(ErrorCode::UnknownDimension, "no controlled generation prompt for TC");
}

std::vector<GeneratedQuestion> generate_controlled_questions(const EvalContext& ctx,
                                                             const LearningMaterial& material,
                                                             Dimension dimension) {
  if (dimension == Dimension::TC) {
    throw Error(ErrorCode::UnknownDimension, "no controlled generation prompt for TC");
  }
  std::string template_name = "qgen_";
  {
    std::string d = to_string(dimension);
    for (char c : d) {
      template_name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  std::string prompt =
      render_prompt(ctx.templates.get(template_name), {{"L", format_material(material)}});
  std::vector<TranscriptEntry> transcript;
  std::string tag = "qgen/" + template_name + "/" + material.material_id;
  std::string response = ask(ctx, tag, prompt, transcript);

  std::vector<GeneratedQuestion> questions;
  std::vector<std::string> lines = split_lines(response);
  std::size_t i = 0;
  int block = 0;
  while (i < lines.size()) {
    std::string line = trim(lines[i]);
    if (lowercase(line).rfind("question", 0) != 0 || line.find(':') == std::string::npos) {
      ++i;
      continue;
    }
    ++block;
    std::size_t colon = line.find(':');
    std::string head = line.substr(0, colon);
    std::string stem = trim(line.substr(colon + 1));

    std::string tag_text;
    std::size_t open = head.find('(');
    std::size_t close = head.rfind(')');
    if (open != std::string::npos && close != std::string::npos && close > open) {
      tag_text = trim(head.substr(open + 1, close - open - 1));
    }

    ++i;
    // Stem may wrap onto following lines until the first option.
    auto option_letter = [](const std::string& l) -> char {
      if (l.size() >= 2 && l[0] >= 'A' && l[0] <= 'D' &&
          (l[1] == ')' || l[1] == '.' || l[1] == ':')) {
        return l[0];
      }
      return '\0';
    };
    while (i < lines.size()) {
      std::string next = trim(lines[i]);
      if (next.empty() || option_letter(next) != '\0') break;
      stem += " " + next;
      ++i;
    }

    QuizItem item;
    item.material_id = material.material_id;
    {
      std::string d = to_string(dimension);
      std::string dl;
      for (char c : d) dl.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      item.item_id = material.material_id + ":" + dl + ":gen" + std::to_string(block);
    }
    item.stem = stem;
    if (item.stem.empty()) {
      throw Error(ErrorCode::ParseFailure,
                  "question block " + std::to_string(block) + ": empty question text");
    }

    char expected = 'A';
    while (i < lines.size() && expected <= 'D') {
      std::string next = trim(lines[i]);
      char letter = option_letter(next);
      if (letter == '\0') break;
      if (letter != expected) {
        throw Error(ErrorCode::ParseFailure,
                    "question block " + std::to_string(block) + ": expected option " +
                        std::string(1, expected) + ", found " + std::string(1, letter));
      }
      item.options.push_back({std::string(1, letter), trim(next.substr(2))});
      ++expected;
      ++i;
    }
    if (item.options.size() != 4) {
      throw Error(ErrorCode::ParseFailure,
                  "question block " + std::to_string(block) + ": expected 4 options, found " +
                      std::to_string(item.options.size()));
    }

    if (i >= lines.size()) {
      throw Error(ErrorCode::ParseFailure,
                  "question block " + std::to_string(block) + ": missing answer line");
    }
    std::string answer_line = trim(lines[i]);
    std::string lc = lowercase(answer_line);
    if (lc.rfind("answer", 0) != 0) {
      throw Error(ErrorCode::ParseFailure,
                  "question block " + std::to_string(block) + ": missing answer line");
    }
    std::size_t letter_at = answer_line.find_first_of("ABCD", 6);
    if (letter_at == std::string::npos) {
      throw Error(ErrorCode::ParseFailure,
                  "question block " + std::to_string(block) + ": answer names no option A-D");
    }
    item.correct_option_id = std::string(1, answer_line[letter_at]);
    ++i;

    questions.push_back({std::move(item), tag_text});
  }

  int expected_count = expected_generated_count(dimension);
  if (static_cast<int>(questions.size()) != expected_count) {
    warn("controlled generation for " + std::string(to_string(dimension)) + " produced " +
         std::to_string(questions.size()) + " questions, prompt asked for " +
         std::to_string(expected_count));
  }
  if (questions.empty()) {
    throw Error(ErrorCode::ParseFailure, "no question blocks found in the response");
  }
  return questions;
}

StrategyRunResult run_strategy(const EvalContext& ctx, Strategy strategy, const PairInputs& inputs,
                               const Requirement& requirement) {
  StrategyRunResult result;
  switch (strategy) {
    case Strategy::Vanilla:
    case Strategy::CoT:
    case Strategy::Metrics:
    case Strategy::Reference: {
      auto runner = strategy == Strategy::Vanilla   ? run_vanilla
                    : strategy == Strategy::CoT     ? run_cot
                    : strategy == Strategy::Metrics ? run_metrics
                                                    : run_reference;
      result.outcomes.push_back(runner(ctx, inputs, requirement, Order::Original));
      result.outcomes.push_back(runner(ctx, inputs, requirement, Order::Swapped));
      return result;
    }
    case Strategy::Swap: {
      auto [original, swapped] = run_swap(ctx, inputs, requirement);
      result.outcomes.push_back(std::move(original));
      result.outcomes.push_back(std::move(swapped));
      return result;
    }
    case Strategy::QgSms: {
      QgsmsRun run = run_qgsms(ctx, inputs, requirement);
      result.outcomes.push_back(run.original);
      result.outcomes.push_back(run.swapped);
      result.simulation = std::move(run);
      return result;
    }
    case Strategy::QgSmsDirect: {
      QgsmsRun run;
      std::vector<TranscriptEntry> pipeline;
      run.profiles = qgsms_generate_profiles(ctx, inputs.material, &pipeline);
      run.profile_set_id = profile_set_hash(run.profiles);
      run.prediction =
          qgsms_predict_performance(ctx, inputs.material, run.profiles, inputs, &pipeline);
      PairVerdict verdict = direct_index_verdict(run.prediction, inputs.pair, requirement);
      for (Order order : {Order::Original, Order::Swapped}) {
        EvaluationOutcome outcome;
        outcome.pair_id = inputs.pair.pair_id;
        outcome.strategy = to_string(Strategy::QgSmsDirect);
        outcome.order = order;
        outcome.verdict = verdict;
        outcome.transcript = pipeline;
        outcome.profile_set_id = run.profile_set_id;
        result.outcomes.push_back(std::move(outcome));
      }
      run.original = result.outcomes[0];
      run.swapped = result.outcomes[1];
      result.simulation = std::move(run);
      return result;
    }
  }
  throw Error(ErrorCode::ConfigError, "unhandled strategy");
}

}  // namespace itemlab
