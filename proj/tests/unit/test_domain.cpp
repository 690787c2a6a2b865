#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "itemlab/dataset_io.hpp"
#include "itemlab/domain.hpp"
#include "itemlab/error.hpp"
#include "../support/test_support.hpp"

using namespace itemlab;

namespace {

std::filesystem::path write_lines(const std::filesystem::path& dir, const std::string& name,
                                  const std::vector<std::string>& lines) {
  auto path = dir / name;
  std::ofstream out(path);
  for (const auto& line : lines) out << line << "\n";
  return path;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an itemlab::Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("load_materials parses valid lines and rejects bad ones") {
  auto dir = testsupport::make_temp_dir("materials");

  SUBCASE("two valid lines") {
    auto path = write_lines(dir, "m.jsonl",
        {R"({"material_id":"m1","title":"T1","sections":[{"section_id":"s1","body":"b"}]})",
         R"({"material_id":"m2","title":"T2","sections":[]})"});
    auto materials = load_materials(path);
    REQUIRE(materials.size() == 2);
    CHECK(materials[0].material_id == "m1");
    CHECK(materials[0].sections.size() == 1);
  }

  SUBCASE("empty file gives empty list") {
    auto path = write_lines(dir, "empty.jsonl", {});
    CHECK(load_materials(path).empty());
  }

  SUBCASE("missing material_id names line 1") {
    auto path = write_lines(dir, "bad.jsonl", {R"({"title":"T","sections":[]})"});
    try {
      load_materials(path);
      FAIL("expected MalformedRecord");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedRecord);
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
  }

  SUBCASE("duplicate ids rejected") {
    auto path = write_lines(dir, "dup.jsonl",
        {R"({"material_id":"m1","title":"a","sections":[]})",
         R"({"material_id":"m1","title":"b","sections":[]})"});
    CHECK(code_of([&] { load_materials(path); }) == ErrorCode::DuplicateId);
  }

  SUBCASE("empty section body rejected") {
    auto path = write_lines(dir, "body.jsonl",
        {R"({"material_id":"m1","title":"a","sections":[{"section_id":"s1","body":""}]})"});
    CHECK(code_of([&] { load_materials(path); }) == ErrorCode::MalformedRecord);
  }

  SUBCASE("missing file is an IoError") {
    CHECK(code_of([&] { load_materials(dir / "nope.jsonl"); }) == ErrorCode::IoError);
  }
}

TEST_CASE("load_items validates option structure") {
  auto dir = testsupport::make_temp_dir("items");

  SUBCASE("correct_option_id must be among options") {
    auto path = write_lines(dir, "bad.jsonl",
        {R"({"item_id":"i1","material_id":"m1","stem":"s","options":[{"option_id":"A","text":"a"},{"option_id":"B","text":"b"}],"correct_option_id":"Z"})"});
    CHECK(code_of([&] { load_items(path); }) == ErrorCode::MalformedRecord);
  }

  SUBCASE("four options yield three distractors") {
    auto path = write_lines(dir, "good.jsonl",
        {R"({"item_id":"i1","material_id":"m1","stem":"s","options":[{"option_id":"A","text":"a"},{"option_id":"B","text":"b"},{"option_id":"C","text":"c"},{"option_id":"D","text":"d"}],"correct_option_id":"B"})"});
    auto items = load_items(path);
    REQUIRE(items.size() == 1);
    CHECK(items[0].distractor_count() == 3);
  }

  SUBCASE("single option is malformed") {
    auto path = write_lines(dir, "one.jsonl",
        {R"({"item_id":"i1","material_id":"m1","stem":"s","options":[{"option_id":"A","text":"a"}],"correct_option_id":"A"})"});
    CHECK(code_of([&] { load_items(path); }) == ErrorCode::MalformedRecord);
  }

  SUBCASE("free-response item parses without options") {
    auto path = write_lines(dir, "free.jsonl",
        {R"({"item_id":"i1","material_id":"m1","stem":"s"})"});
    auto items = load_items(path);
    REQUIRE(items.size() == 1);
    CHECK_FALSE(items[0].is_multiple_choice());
    CHECK_FALSE(items[0].correct_option_id.has_value());
  }

  SUBCASE("unknown fields produce warnings, not errors") {
    auto path = write_lines(dir, "extra.jsonl",
        {R"({"item_id":"i1","material_id":"m1","stem":"s","difficulty_hint":3})"});
    std::vector<std::string> warnings;
    auto items = load_items(path, &warnings);
    CHECK(items.size() == 1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("difficulty_hint") != std::string::npos);
  }
}

TEST_CASE("response cross-checks against the item") {
  QuizItem item = testsupport::make_item("i1", "m1", "stem");

  SUBCASE("incorrect response choosing the keyed answer is malformed") {
    ResponseRecord r{"s1", "i1", false, "A"};
    CHECK(code_of([&] { check_response_against_item(r, item); }) ==
          ErrorCode::MalformedRecord);
  }

  SUBCASE("correct response choosing a distractor is malformed") {
    ResponseRecord r{"s1", "i1", true, "B"};
    CHECK(code_of([&] { check_response_against_item(r, item); }) ==
          ErrorCode::MalformedRecord);
  }

  SUBCASE("consistent records pass") {
    check_response_against_item({"s1", "i1", true, "A"}, item);
    check_response_against_item({"s1", "i1", false, "C"}, item);
    check_response_against_item({"s1", "i1", false, std::nullopt}, item);
  }
}

TEST_CASE("validate_dataset reports referential problems") {
  auto materials = std::vector<LearningMaterial>{testsupport::make_material("m1")};
  auto items = std::vector<QuizItem>{testsupport::make_item("i1", "m1", "stem")};
  std::vector<ResponseRecord> responses{{"s1", "i1", true, "A"}};

  SUBCASE("consistent fixture yields an empty report") {
    CHECK(validate_dataset(materials, items, responses).clean());
  }

  SUBCASE("response referencing an unknown item is flagged") {
    responses.push_back({"s1", "ghost", true, std::nullopt});
    auto report = validate_dataset(materials, items, responses);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].kind == ValidationIssue::Kind::DanglingResponseItem);
  }

  SUBCASE("item with zero responses is flagged as no respondents") {
    items.push_back(testsupport::make_item("i2", "m1", "stem2"));
    auto report = validate_dataset(materials, items, responses);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].kind == ValidationIssue::Kind::ItemWithoutResponses);
    CHECK(report.issues[0].subject == "i2");
  }

  SUBCASE("material without items and dangling material are flagged") {
    materials.push_back(testsupport::make_material("m2"));
    items.push_back(testsupport::make_item("i3", "ghost-material", "stem3"));
    responses.push_back({"s1", "i3", true, "A"});
    auto report = validate_dataset(materials, items, responses);
    bool saw_material_without_items = false, saw_dangling_material = false;
    for (const auto& issue : report.issues) {
      saw_material_without_items |=
          issue.kind == ValidationIssue::Kind::MaterialWithoutItems;
      saw_dangling_material |= issue.kind == ValidationIssue::Kind::DanglingItemMaterial;
    }
    CHECK(saw_material_without_items);
    CHECK(saw_dangling_material);
  }

  SUBCASE("contradictory chosen option is flagged") {
    responses.push_back({"s2", "i1", false, "A"});
    auto report = validate_dataset(materials, items, responses);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].kind == ValidationIssue::Kind::ChoiceContradictsCorrect);
  }
}

TEST_CASE("build_response_matrix") {
  std::vector<QuizItem> items{testsupport::make_item("i1", "m1", "stem")};

  SUBCASE("singleton") {
    ResponseMatrix matrix = build_response_matrix(items, {{"s1", "i1", true, "A"}});
    CHECK(matrix.total_scores.at("s1") == 1);
    REQUIRE(matrix.items.at("i1").scores.size() == 1);
    CHECK(matrix.items.at("i1").scores[0] == 1);
  }

  SUBCASE("duplicate (student, item) rejected") {
    std::vector<ResponseRecord> responses{{"s1", "i1", true, "A"},
                                          {"s1", "i1", false, "B"}};
    CHECK(code_of([&] { build_response_matrix(items, responses); }) ==
          ErrorCode::DuplicateResponse);
  }

  SUBCASE("empty response set rejected") {
    CHECK(code_of([&] { build_response_matrix(items, {}); }) == ErrorCode::EmptyResponseSet);
  }

  SUBCASE("response outside the item subset rejected") {
    CHECK(code_of([&] {
      build_response_matrix(items, {{"s1", "ghost", true, std::nullopt}});
    }) == ErrorCode::UnknownItem);
  }

  SUBCASE("totals match the raw-log oracle across random datasets") {
    std::mt19937_64 rng(7001);
    for (int round = 0; round < 10; ++round) {
      auto data = testsupport::make_random_dataset(rng);
      ResponseMatrix matrix = build_response_matrix(data.items, data.responses);
      for (const auto& [student, total] : matrix.total_scores) {
        CHECK(total == testsupport::oracle_total_score(data.responses, student));
      }
    }
  }

  SUBCASE("shuffling the log yields an identical matrix") {
    std::mt19937_64 rng(7002);
    auto data = testsupport::make_random_dataset(rng);
    ResponseMatrix first = build_response_matrix(data.items, data.responses);
    std::shuffle(data.responses.begin(), data.responses.end(), rng);
    ResponseMatrix second = build_response_matrix(data.items, data.responses);
    CHECK(first == second);
  }

  SUBCASE("skipped items leave the student out of that column but keep the total") {
    items.push_back(testsupport::make_item("i2", "m1", "stem2"));
    std::vector<ResponseRecord> responses{{"s1", "i1", true, "A"},
                                          {"s1", "i2", true, "A"},
                                          {"s2", "i1", false, "B"}};
    ResponseMatrix matrix = build_response_matrix(items, responses);
    CHECK(matrix.items.at("i2").students == std::vector<std::string>{"s1"});
    CHECK(matrix.total_scores.at("s2") == 0);
    CHECK(matrix.items.at("i1").students.size() == 2);
  }

  SUBCASE("distractor pick counts sum to incorrect responses with choices") {
    std::mt19937_64 rng(7003);
    auto data = testsupport::make_random_dataset(rng);
    ResponseMatrix matrix = build_response_matrix(data.items, data.responses);
    for (const auto& [item_id, column] : matrix.items) {
      int pick_sum = 0;
      for (const auto& [option, count] : column.distractor_picks) pick_sum += count;
      CHECK(pick_sum == column.recorded_choice_count);
      CHECK(column.recorded_choice_count <= column.incorrect_count);
    }
  }
}

TEST_CASE("dataset round-trips through serialization") {
  auto dir = testsupport::make_temp_dir("roundtrip");
  std::mt19937_64 rng(7100);
  auto data = testsupport::make_random_dataset(rng);
  std::vector<LearningMaterial> materials{testsupport::make_material("mat")};

  FileHeader header{"0.0.0-test", "deadbeef", 42};
  save_materials(dir / "materials.jsonl", materials, header);
  save_items(dir / "items.jsonl", data.items, header);
  save_responses(dir / "responses.jsonl", data.responses, header);

  CHECK(load_materials(dir / "materials.jsonl") == materials);
  CHECK(load_items(dir / "items.jsonl") == data.items);
  CHECK(load_responses(dir / "responses.jsonl") == data.responses);
}

TEST_CASE("requirement construction") {
  Requirement df = make_requirement(Dimension::DF);
  CHECK(df.rendered_text == "the question that is easier to answer");
  Requirement harder = make_requirement(Dimension::DF, Direction::PreferLower);
  CHECK(harder.rendered_text == "the question that is more difficult to answer");
  Requirement tc = make_requirement(Dimension::TC, Direction::PreferHigher, "kc7");
  CHECK(tc.rendered_text.find("kc7") != std::string::npos);
  CHECK(code_of([] { make_requirement(Dimension::TC); }) == ErrorCode::InvalidParameters);
  CHECK(code_of([] { make_requirement(Dimension::DE, Direction::PreferHigher, "kc7"); }) ==
        ErrorCode::InvalidParameters);
}
