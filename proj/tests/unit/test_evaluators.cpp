#include <doctest.h>

#include <memory>

#include "itemlab/error.hpp"
#include "itemlab/evaluators.hpp"
#include "itemlab/gateway.hpp"
#include "itemlab/templates.hpp"
#include "../support/test_support.hpp"

using namespace itemlab;

namespace {

struct Harness {
  std::unique_ptr<Gateway> gateway;
  TemplateStore templates = TemplateStore::builtin();
  LearningMaterial material = testsupport::make_material("m1");
  QuizItem q1 = testsupport::make_item("qa", "m1", "First question stem");
  QuizItem q2 = testsupport::make_item("qb", "m1", "Second question stem");
  QuestionPair pair =
      testsupport::make_pair("qa", "qb", Dimension::DF, PairLabel::Q1, 0.9, 0.6, 0.15);
  Requirement requirement = make_requirement(Dimension::DF);

  explicit Harness(std::unique_ptr<Provider> provider, bool cache = true) {
    GatewayConfig config;
    config.cache_enabled = cache;
    config.sleep_ms = [](int) {};
    gateway = std::make_unique<Gateway>(std::move(provider), config);
  }

  EvalContext ctx() { return EvalContext{*gateway, templates, "test-model", 1.0, 10}; }
  PairInputs inputs() const { return PairInputs{pair, q1, q2, material}; }
};

std::string profiles_text(int count) {
  std::string text;
  for (int i = 1; i <= count; ++i) {
    std::string name = i == 1 ? "Alice - The Attentive" : "Student " + std::to_string(i);
    text += std::to_string(i) + ". " + name + ": understanding level " +
            std::to_string(i) + "\n";
  }
  return text;
}

std::string full_table(int count, const std::string& q1_outcome,
                       const std::string& q2_outcome) {
  std::string text;
  for (int i = 1; i <= count; ++i) {
    std::string name = i == 1 ? "Alice - The Attentive" : "Student " + std::to_string(i);
    text += name + " | Question 1: " + q1_outcome + " | Question 2: " + q2_outcome + "\n";
  }
  return text;
}

}  // namespace

TEST_CASE("parse_verdict") {
  CHECK(parse_verdict("Output (b)") == Verdict::PreferB);
  CHECK(parse_verdict("OUTPUT (A)") == Verdict::PreferA);
  CHECK(parse_verdict("I think Output (a) is better... final answer: Output (b)") ==
        Verdict::PreferB);
  CHECK(parse_verdict("Output (b) seemed fine at first, but Output (a)") ==
        Verdict::PreferA);
  try {
    parse_verdict("both are fine");
    FAIL("expected AmbiguousVerdict");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AmbiguousVerdict);
  }
}

TEST_CASE("run_vanilla de-swaps the parsed verdict") {
  SUBCASE("original order: Output (a) is q1") {
    Harness h(MockProvider::queue({"Output (a)"}));
    auto outcome = run_vanilla(h.ctx(), h.inputs(), h.requirement, Order::Original);
    CHECK(outcome.verdict == PairVerdict::Q1);
    CHECK(outcome.order == Order::Original);
    CHECK(outcome.strategy == "vanilla");
    REQUIRE(outcome.transcript.size() == 1);
    CHECK(outcome.transcript[0].prompt.find("First question stem") != std::string::npos);
  }

  SUBCASE("swapped order: Output (a) is q2") {
    Harness h(MockProvider::queue({"Output (a)"}));
    auto outcome = run_vanilla(h.ctx(), h.inputs(), h.requirement, Order::Swapped);
    CHECK(outcome.verdict == PairVerdict::Q2);
    // q2 is presented first in the swapped prompt.
    auto a_slot = outcome.transcript[0].prompt.find("Output (a): Second question stem");
    CHECK(a_slot != std::string::npos);
  }

  SUBCASE("garbage twice records an Ambiguous outcome") {
    Harness h(MockProvider::queue({"no idea", "still no idea"}));
    auto outcome = run_vanilla(h.ctx(), h.inputs(), h.requirement, Order::Original);
    CHECK(outcome.verdict == PairVerdict::Ambiguous);
    CHECK(outcome.transcript.size() == 2);  // prompt + one re-ask
  }

  SUBCASE("garbage then a clear answer recovers") {
    Harness h(MockProvider::queue({"hmm", "Output (b)"}));
    auto outcome = run_vanilla(h.ctx(), h.inputs(), h.requirement, Order::Original);
    CHECK(outcome.verdict == PairVerdict::Q2);
  }
}

TEST_CASE("run_cot mirrors vanilla with the reasoning-first template") {
  Harness h(MockProvider::queue({"Reasoning... Output (b)"}));
  auto outcome = run_cot(h.ctx(), h.inputs(), h.requirement, Order::Original);
  CHECK(outcome.verdict == PairVerdict::Q2);
  CHECK(outcome.strategy == "cot");
  CHECK(outcome.transcript[0].prompt.find("step-by-step") != std::string::npos);
}

TEST_CASE("run_metrics") {
  SUBCASE("two calls, both in the transcript") {
    Harness h(MockProvider::queue({"metric 1\nmetric 2", "Output (b)"}));
    auto outcome = run_metrics(h.ctx(), h.inputs(), h.requirement, Order::Original);
    CHECK(outcome.verdict == PairVerdict::Q2);
    REQUIRE(outcome.transcript.size() == 2);
    CHECK(outcome.transcript[1].prompt.find("metric 1") != std::string::npos);
  }

  SUBCASE("empty metrics proceed with a warning") {
    std::vector<std::string> warnings;
    set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
    Harness h(MockProvider::queue({"   ", "Output (a)"}));
    auto outcome = run_metrics(h.ctx(), h.inputs(), h.requirement, Order::Original);
    set_warning_sink(nullptr);
    CHECK(outcome.verdict == PairVerdict::Q1);
    CHECK(warnings.size() == 1);
  }

  SUBCASE("the metrics stage is cached across both orders") {
    Harness h(MockProvider::patterns({{"metrics/generate", "shared metrics"},
                                      {"", "Output (a)"}}));
    run_metrics(h.ctx(), h.inputs(), h.requirement, Order::Original);
    run_metrics(h.ctx(), h.inputs(), h.requirement, Order::Swapped);
    // generate once + two judges; the second generate is a cache hit.
    CHECK(h.gateway->provider_calls() == 3);
    CHECK(h.gateway->cache_hits() == 1);
  }
}

TEST_CASE("run_reference mirrors metrics with a reference stage") {
  Harness h(MockProvider::queue({"an exemplary question", "Output (a)"}));
  auto outcome = run_reference(h.ctx(), h.inputs(), h.requirement, Order::Original);
  CHECK(outcome.verdict == PairVerdict::Q1);
  REQUIRE(outcome.transcript.size() == 2);
  CHECK(outcome.transcript[1].prompt.find("an exemplary question") != std::string::npos);
}

TEST_CASE("run_swap") {
  SUBCASE("agreement short-circuits the synthesis call") {
    // Content-keyed mock always prefers the slot holding q1's stem.
    auto provider = MockProvider::function([](const PromptRequest& request) {
      const std::string& prompt = request.messages.front().content;
      auto a = prompt.find("Output (a): First question stem");
      return std::string(a != std::string::npos ? "Output (a)" : "Output (b)");
    });
    Harness h(std::move(provider));
    auto [original, swapped] = run_swap(h.ctx(), h.inputs(), h.requirement);
    CHECK(original.verdict == PairVerdict::Q1);
    CHECK(swapped.verdict == PairVerdict::Q1);
    CHECK(h.gateway->provider_calls() == 2);
    CHECK(original.strategy == "swap");
  }

  SUBCASE("contradiction triggers synthesis whose verdict lands on both orders") {
    // Position-biased CoT rounds, then a synthesis naming Output (a) in the
    // original framing.
    Harness h(MockProvider::queue({"Output (a)", "Output (a)", "Output (a)"}));
    auto [original, swapped] = run_swap(h.ctx(), h.inputs(), h.requirement);
    CHECK(h.gateway->provider_calls() == 3);
    CHECK(original.verdict == PairVerdict::Q1);
    CHECK(swapped.verdict == PairVerdict::Q1);
    CHECK(original.transcript.size() == 2);  // cot + synthesis
    CHECK(swapped.transcript.size() == 2);
  }

  SUBCASE("ambiguous synthesis marks both orders Ambiguous") {
    Harness h(MockProvider::queue(
        {"Output (a)", "Output (a)", "unclear", "still unclear"}));
    auto [original, swapped] = run_swap(h.ctx(), h.inputs(), h.requirement);
    CHECK(original.verdict == PairVerdict::Ambiguous);
    CHECK(swapped.verdict == PairVerdict::Ambiguous);
  }
}

TEST_CASE("qgsms_generate_profiles") {
  SUBCASE("a ten-entry list parses into ten profiles") {
    Harness h(MockProvider::queue({profiles_text(10)}));
    auto profiles = qgsms_generate_profiles(h.ctx(), h.material);
    REQUIRE(profiles.size() == 10);
    CHECK(profiles[0].name == "Alice - The Attentive");
    CHECK(profiles[0].understanding == "understanding level 1");
  }

  SUBCASE("six entries twice raises TooFewProfiles") {
    Harness h(MockProvider::queue({profiles_text(6), profiles_text(6)}));
    try {
      qgsms_generate_profiles(h.ctx(), h.material);
      FAIL("expected TooFewProfiles");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooFewProfiles);
    }
    CHECK(h.gateway->provider_calls() == 2);
  }

  SUBCASE("a short list recovered by the re-ask") {
    Harness h(MockProvider::queue({profiles_text(4), profiles_text(12)}));
    auto profiles = qgsms_generate_profiles(h.ctx(), h.material);
    CHECK(profiles.size() == 12);
  }

  SUBCASE("bulleted names with dashes keep the full name") {
    Harness h(MockProvider::queue(
        {"- Alice - The Attentive: follows details closely\n- Bob - The Beginner: new to "
         "the topic\n" + profiles_text(8)}));
    auto profiles = qgsms_generate_profiles(h.ctx(), h.material);
    REQUIRE(profiles.size() >= 10);
    CHECK(profiles[0].name == "Alice - The Attentive");
    CHECK(profiles[0].understanding == "follows details closely");
  }
}

TEST_CASE("qgsms_predict_performance") {
  SUBCASE("full table parses into entries for every student and slot") {
    Harness h(MockProvider::queue(
        {profiles_text(10), full_table(10, "Correct", "Incorrect (confused by D)")}));
    auto profiles = qgsms_generate_profiles(h.ctx(), h.material);
    auto prediction =
        qgsms_predict_performance(h.ctx(), h.material, profiles, h.inputs());
    CHECK(prediction.predicted_count() == 20);
    for (const auto& row : prediction.rows) {
      CHECK(row.q1.kind == SlotOutcomeKind::Correct);
      CHECK(row.q2.kind == SlotOutcomeKind::Incorrect);
      CHECK(row.q2.distractor == "D");
    }
  }

  SUBCASE("colon form with distracted-by parses the distractor") {
    Harness h(MockProvider::queue({profiles_text(10)}));
    auto profiles = qgsms_generate_profiles(h.ctx(), h.material);

    Harness h2(MockProvider::queue({
        "Student 3: Q1 correct. Q2 incorrect, distracted by B",
        full_table(10, "Correct", "Correct"),
    }));
    auto prediction =
        qgsms_predict_performance(h2.ctx(), h.material, profiles, h.inputs());
    const auto& row = prediction.rows[2];  // profile order is preserved
    CHECK(row.student == "Student 3");
    CHECK(row.q1.kind == SlotOutcomeKind::Correct);
    CHECK(row.q2.kind == SlotOutcomeKind::Incorrect);
    CHECK(row.q2.distractor == "B");
  }

  SUBCASE("students absent after the re-ask stay Unpredicted") {
    std::vector<std::string> warnings;
    set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
    Harness h(MockProvider::queue(
        {profiles_text(10), full_table(9, "Correct", "Correct"),
         full_table(9, "Correct", "Correct")}));
    auto profiles = qgsms_generate_profiles(h.ctx(), h.material);
    auto prediction =
        qgsms_predict_performance(h.ctx(), h.material, profiles, h.inputs());
    set_warning_sink(nullptr);
    CHECK(prediction.predicted_count() == 18);
    CHECK(prediction.rows.back().q1.kind == SlotOutcomeKind::Unpredicted);
    CHECK(warnings.size() == 1);
    CHECK(h.gateway->provider_calls() == 3);  // step1 + step2 + re-ask
  }

  SUBCASE("nothing parseable at all raises ParseFailure") {
    Harness h(MockProvider::queue({profiles_text(10), "gibberish", "more gibberish"}));
    auto profiles = qgsms_generate_profiles(h.ctx(), h.material);
    try {
      qgsms_predict_performance(h.ctx(), h.material, profiles, h.inputs());
      FAIL("expected ParseFailure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseFailure);
    }
  }
}

TEST_CASE("qgsms_judge and the full pipeline") {
  SUBCASE("judge de-swaps and embeds the serialized performance") {
    Harness h(MockProvider::queue({profiles_text(10),
                                   full_table(10, "Correct", "Incorrect (confused by D)"),
                                   "Output (a)", "Output (a)"}));
    auto run = run_qgsms(h.ctx(), h.inputs(), h.requirement);
    CHECK(run.original.verdict == PairVerdict::Q1);
    CHECK(run.swapped.verdict == PairVerdict::Q2);  // Output (a) is q2 when swapped
    CHECK(run.original.profile_set_id == run.swapped.profile_set_id);
    REQUIRE(run.original.profile_set_id.has_value());

    // Step 1 + step 2 + judge transcript entries replay in both outcomes.
    CHECK(run.original.transcript.size() == 3);
    CHECK(run.swapped.transcript.size() == 3);
    const std::string& judge_prompt = run.original.transcript.back().prompt;
    CHECK(judge_prompt.find("Output (a): Correct") != std::string::npos);
    CHECK(judge_prompt.find("Output (b): Incorrect (confused by D)") != std::string::npos);
    // The swapped judge prompt relabels the same prediction.
    const std::string& swapped_prompt = run.swapped.transcript.back().prompt;
    CHECK(swapped_prompt.find("Output (a): Incorrect (confused by D)") != std::string::npos);

    // Steps 1-2 ran once; judges twice.
    CHECK(h.gateway->provider_calls() == 4);
  }

  SUBCASE("empty prediction is a precondition error") {
    Harness h(MockProvider::queue({"unused"}));
    PerformancePrediction empty;
    CHECK_THROWS_AS(
        qgsms_judge(h.ctx(), h.inputs(), h.requirement, empty, Order::Original), Error);
  }
}

TEST_CASE("generate_controlled_questions") {
  auto block = [](int n, const std::string& tag, const std::string& answer) {
    return "Question " + std::to_string(n) + " (" + tag + "): What is example " +
           std::to_string(n) + "?\nA) first\nB) second\nC) third\nD) fourth\nAnswer: " +
           answer + "\n";
  };

  SUBCASE("six difficulty-controlled questions parse") {
    std::string response;
    for (int i = 1; i <= 6; ++i) {
      std::string tag = i <= 2 ? "easy-level" : i <= 4 ? "medium-level" : "hard-level";
      response += block(i, tag, "B") + "\n";
    }
    Harness h(MockProvider::queue({response}));
    auto questions = generate_controlled_questions(h.ctx(), h.material, Dimension::DF);
    REQUIRE(questions.size() == 6);
    CHECK(questions[0].quality_tag == "easy-level");
    CHECK(questions[5].quality_tag == "hard-level");
    CHECK(questions[0].item.options.size() == 4);
    CHECK(questions[0].item.correct_option_id == "B");
    CHECK(expected_generated_count(Dimension::DF) == 6);
  }

  SUBCASE("eight distractor-controlled questions parse") {
    std::string response;
    for (int i = 1; i <= 8; ++i) response += block(i, "two effective distractors", "A") + "\n";
    Harness h(MockProvider::queue({response}));
    auto questions = generate_controlled_questions(h.ctx(), h.material, Dimension::DE);
    CHECK(questions.size() == 8);
    CHECK(expected_generated_count(Dimension::DE) == 8);
  }

  SUBCASE("a malformed block names its index") {
    std::string response =
        block(1, "easy", "A") + "\nQuestion 2 (easy): broken\nA) one\nB) two\nAnswer: A\n";
    Harness h(MockProvider::queue({response}));
    try {
      generate_controlled_questions(h.ctx(), h.material, Dimension::DF);
      FAIL("expected ParseFailure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseFailure);
      CHECK(std::string(e.what()).find("block 2") != std::string::npos);
    }
  }

  SUBCASE("count mismatches warn but do not fail") {
    std::vector<std::string> warnings;
    set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
    Harness h(MockProvider::queue({block(1, "easy-level", "C")}));
    auto questions = generate_controlled_questions(h.ctx(), h.material, Dimension::DF);
    set_warning_sink(nullptr);
    CHECK(questions.size() == 1);
    CHECK(warnings.size() == 1);
  }
}

TEST_CASE("strategies run both orders through run_strategy") {
  for (Strategy strategy : {Strategy::Vanilla, Strategy::CoT, Strategy::Metrics,
                            Strategy::Reference, Strategy::Swap}) {
    CAPTURE(to_string(strategy));
    auto provider = MockProvider::function([](const PromptRequest& request) {
      const std::string& prompt = request.messages.front().content;
      if (request.request_tag.find("/generate/") != std::string::npos) {
        return std::string("stage output");
      }
      auto a = prompt.find("Output (a): First question stem");
      return std::string(a != std::string::npos ? "Output (a)" : "Output (b)");
    });
    Harness h(std::move(provider));
    auto result = run_strategy(h.ctx(), strategy, h.inputs(), h.requirement);
    REQUIRE(result.outcomes.size() == 2);
    CHECK(result.outcomes[0].order == Order::Original);
    CHECK(result.outcomes[1].order == Order::Swapped);
    CHECK(result.outcomes[0].verdict == PairVerdict::Q1);
    CHECK(result.outcomes[1].verdict == PairVerdict::Q1);
    CHECK_FALSE(result.simulation.has_value());
  }
}

TEST_CASE("metamorphic de-swap: exchanging q1/q2 and flipping order is invariant") {
  // A content-keyed model that always prefers the question whose stem says
  // "First". Physically exchanging the pair while flipping the presentation
  // order must leave the preferred physical item unchanged.
  auto make_provider = [] {
    return MockProvider::function([](const PromptRequest& request) {
      const std::string& prompt = request.messages.front().content;
      if (request.request_tag.find("qg-sms/step1") != std::string::npos) {
        return profiles_text(10);
      }
      if (request.request_tag.find("qg-sms/step2") != std::string::npos) {
        // All students ace the "First" question wherever it appears.
        bool first_is_q1 =
            prompt.find("Question 1: First question stem") != std::string::npos;
        return full_table(10, first_is_q1 ? "Correct" : "Incorrect (confused by B)",
                          first_is_q1 ? "Incorrect (confused by B)" : "Correct");
      }
      if (request.request_tag.find("/generate/") != std::string::npos) {
        return std::string("stage output");
      }
      auto a = prompt.find("Output (a): First question stem");
      return std::string(a != std::string::npos ? "Output (a)" : "Output (b)");
    });
  };

  for (Strategy strategy : {Strategy::Vanilla, Strategy::CoT, Strategy::Metrics,
                            Strategy::Reference, Strategy::Swap, Strategy::QgSms}) {
    CAPTURE(to_string(strategy));
    Harness h(make_provider(), /*cache=*/false);
    auto forward = run_strategy(h.ctx(), strategy, h.inputs(), h.requirement);

    Harness h_exchanged(make_provider(), /*cache=*/false);
    QuestionPair exchanged = h.pair;
    std::swap(exchanged.q1, exchanged.q2);
    std::swap(exchanged.q1_value, exchanged.q2_value);
    exchanged.label = PairLabel::Q2;
    PairInputs exchanged_inputs{exchanged, h.q2, h.q1, h.material};
    auto backward =
        run_strategy(h_exchanged.ctx(), strategy, exchanged_inputs, h.requirement);

    auto physical_item = [&](const EvaluationOutcome& outcome,
                             const QuestionPair& pair) -> std::string {
      if (outcome.verdict == PairVerdict::Ambiguous) return "ambiguous";
      return outcome.verdict == PairVerdict::Q1 ? pair.q1 : pair.q2;
    };
    // forward original vs backward swapped present the questions in the
    // same physical arrangement, and vice versa.
    CHECK(physical_item(forward.outcomes[0], h.pair) ==
          physical_item(backward.outcomes[1], exchanged));
    CHECK(physical_item(forward.outcomes[1], h.pair) ==
          physical_item(backward.outcomes[0], exchanged));
  }
}

TEST_CASE("qg-sms-direct strategy computes the verdict from simulated indices") {
  Harness h(MockProvider::queue(
      {profiles_text(10), full_table(10, "Correct", "Incorrect (confused by C)")}));
  auto result = run_strategy(h.ctx(), Strategy::QgSmsDirect, h.inputs(), h.requirement);
  REQUIRE(result.outcomes.size() == 2);
  // Simulated DF: q1 = 1.0, q2 = 0.0; requirement prefers higher DF.
  CHECK(result.outcomes[0].verdict == PairVerdict::Q1);
  CHECK(result.outcomes[1].verdict == PairVerdict::Q1);
  REQUIRE(result.simulation.has_value());
  CHECK(result.simulation->profiles.size() == 10);
  // No judge call: just step 1 and step 2.
  CHECK(h.gateway->provider_calls() == 2);
}
