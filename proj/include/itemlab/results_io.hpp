#pragma once

#include <filesystem>
#include <vector>

#include "itemlab/evaluators.hpp"
#include "itemlab/item_stats.hpp"
#include "itemlab/jsonl.hpp"
#include "itemlab/pair_builder.hpp"

namespace itemlab {

json to_json(const ItemStats& stats);
json to_json(const QuestionPair& pair);
// keep_transcript=false stores prompt/response hashes instead of text.
json to_json(const EvaluationOutcome& outcome, bool keep_transcript = true);

ItemStats item_stats_from_json(const json& value);
QuestionPair pair_from_json(const json& value);
EvaluationOutcome outcome_from_json(const json& value);

std::vector<ItemStats> load_stats_file(const std::filesystem::path& path);
std::vector<QuestionPair> load_pairs_file(const std::filesystem::path& path);
std::vector<EvaluationOutcome> load_results_file(const std::filesystem::path& path);

// Header of an emitted file, when present on the first line.
std::optional<json> read_file_header(const std::filesystem::path& path);

}  // namespace itemlab
