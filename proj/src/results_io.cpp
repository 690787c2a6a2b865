#include "itemlab/results_io.hpp"

#include <fstream>

#include "itemlab/error.hpp"
#include "itemlab/hash.hpp"

namespace itemlab {

json to_json(const ItemStats& stats) {
  json value{{"item_id", stats.item_id}};
  value["df"] = stats.df ? json(*stats.df) : json(nullptr);
  value["dc"] = stats.dc ? json(*stats.dc) : json(nullptr);
  value["de"] = stats.de ? json(*stats.de) : json(nullptr);
  value["respondents"] = stats.respondents;
  return value;
}

ItemStats item_stats_from_json(const json& value) {
  ItemStats stats;
  stats.item_id = value.at("item_id").get<std::string>();
  if (value.contains("df") && !value["df"].is_null()) stats.df = value["df"].get<double>();
  if (value.contains("dc") && !value["dc"].is_null()) stats.dc = value["dc"].get<double>();
  if (value.contains("de") && !value["de"].is_null()) stats.de = value["de"].get<int>();
  stats.respondents = value.value("respondents", 0);
  return stats;
}

json to_json(const QuestionPair& pair) {
  json value{{"pair_id", pair.pair_id},
             {"q1", pair.q1},
             {"q2", pair.q2},
             {"material_id", pair.material_id},
             {"dimension", to_string(pair.dimension)},
             {"label", to_string(pair.label)},
             {"delta", pair.delta},
             {"alpha", pair.alpha}};
  value["target_topic"] = pair.target_topic ? json(*pair.target_topic) : json(nullptr);
  value["q1_value"] = pair.q1_value;
  value["q2_value"] = pair.q2_value;
  return value;
}

QuestionPair pair_from_json(const json& value) {
  QuestionPair pair;
  pair.pair_id = value.at("pair_id").get<std::string>();
  pair.q1 = value.at("q1").get<std::string>();
  pair.q2 = value.at("q2").get<std::string>();
  pair.material_id = value.at("material_id").get<std::string>();
  pair.dimension = dimension_from_string(value.at("dimension").get<std::string>());
  pair.label = pair_label_from_string(value.at("label").get<std::string>());
  pair.delta = value.at("delta").get<double>();
  pair.alpha = value.at("alpha").get<double>();
  if (value.contains("target_topic") && !value["target_topic"].is_null()) {
    pair.target_topic = value["target_topic"].get<std::string>();
  }
  pair.q1_value = value.value("q1_value", 0.0);
  pair.q2_value = value.value("q2_value", 0.0);
  return pair;
}

json to_json(const EvaluationOutcome& outcome, bool keep_transcript) {
  json value{{"pair_id", outcome.pair_id},
             {"strategy", outcome.strategy},
             {"order", to_string(outcome.order)},
             {"verdict", to_string(outcome.verdict)}};
  value["profile_set_id"] =
      outcome.profile_set_id ? json(*outcome.profile_set_id) : json(nullptr);
  json transcript = json::array();
  for (const TranscriptEntry& entry : outcome.transcript) {
    if (keep_transcript) {
      transcript.push_back(json{{"prompt", entry.prompt}, {"response", entry.response}});
    } else {
      transcript.push_back(json{{"prompt_sha256", sha256_hex(entry.prompt)},
                                {"response_sha256", sha256_hex(entry.response)}});
    }
  }
  value["transcript"] = std::move(transcript);
  return value;
}

EvaluationOutcome outcome_from_json(const json& value) {
  EvaluationOutcome outcome;
  outcome.pair_id = value.at("pair_id").get<std::string>();
  outcome.strategy = value.at("strategy").get<std::string>();
  outcome.order = order_from_string(value.at("order").get<std::string>());
  outcome.verdict = pair_verdict_from_string(value.at("verdict").get<std::string>());
  if (value.contains("profile_set_id") && !value["profile_set_id"].is_null()) {
    outcome.profile_set_id = value["profile_set_id"].get<std::string>();
  }
  if (value.contains("transcript")) {
    for (const json& entry : value["transcript"]) {
      outcome.transcript.push_back(
          {entry.value("prompt", std::string()), entry.value("response", std::string())});
    }
  }
  return outcome;
}

namespace {

template <typename T, typename Parse>
std::vector<T> load_file(const std::filesystem::path& path, Parse parse) {
  std::vector<T> out;
  for (const auto& [value, line] : read_jsonl(path)) {
    try {
      out.push_back(parse(value));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord,
                  path.filename().string() + " line " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<ItemStats> load_stats_file(const std::filesystem::path& path) {
  return load_file<ItemStats>(path, item_stats_from_json);
}

std::vector<QuestionPair> load_pairs_file(const std::filesystem::path& path) {
  return load_file<QuestionPair>(path, pair_from_json);
}

std::vector<EvaluationOutcome> load_results_file(const std::filesystem::path& path) {
  return load_file<EvaluationOutcome>(path, outcome_from_json);
}

std::optional<json> read_file_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  json value = json::parse(line, nullptr, false);
  if (value.is_discarded() || !is_header_line(value)) return std::nullopt;
  return value;
}

}  // namespace itemlab
