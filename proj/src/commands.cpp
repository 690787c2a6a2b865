#include "itemlab/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "itemlab/analysis.hpp"
#include "itemlab/config.hpp"
#include "itemlab/dataset_io.hpp"
#include "itemlab/error.hpp"
#include "itemlab/evaluators.hpp"
#include "itemlab/results_io.hpp"

namespace itemlab::cli {

namespace {

std::string fixed6(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

FileHeader make_header(const RunConfig& config) {
  return FileHeader{kToolVersion, config_hash(config), config.seed};
}

std::string text_header(const RunConfig& config) {
  return std::string("# itemlab ") + kToolVersion + " config_hash=" + config_hash(config) +
         " seed=" + std::to_string(config.seed);
}

void require_file(const std::filesystem::path& path) {
  if (path.empty() || !std::filesystem::exists(path)) {
    throw Error(ErrorCode::IoError, "path not found: " + path.string());
  }
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const std::string& w : warnings) err << "warning: " << w << "\n";
}

std::unique_ptr<Gateway> make_gateway(const RunConfig& config) {
  std::unique_ptr<Provider> provider;
  if (config.provider == "mock") {
    if (config.mock_script.empty()) {
      throw Error(ErrorCode::ConfigError,
                  "provider 'mock' needs a mock_script (config key mock_script or --mock-script)");
    }
    require_file(config.mock_script);
    provider = MockProvider::from_script_file(config.mock_script);
  } else {
    if (config.endpoint.empty()) {
      throw Error(ErrorCode::ConfigError, "provider 'http' needs an endpoint");
    }
    provider = std::make_unique<HttpProvider>(config.endpoint, config.credential_env);
  }
  GatewayConfig gateway_config;
  gateway_config.max_retries = config.max_retries;
  gateway_config.concurrency = config.concurrency;
  gateway_config.cache_enabled = config.cache_enabled;
  gateway_config.cache_dir = config.effective_cache_dir();
  return std::make_unique<Gateway>(std::move(provider), gateway_config);
}

TemplateStore make_templates(const RunConfig& config) {
  TemplateStore store = TemplateStore::builtin();
  if (!config.templates_dir.empty()) store.load_directory(config.templates_dir);
  return store;
}

std::vector<Dimension> parse_dimensions(const std::string& csv) {
  std::vector<Dimension> dimensions;
  std::stringstream stream(csv);
  std::string token;
  while (std::getline(stream, token, ',')) {
    if (!token.empty()) dimensions.push_back(dimension_from_string(token));
  }
  if (dimensions.empty()) {
    throw Error(ErrorCode::ConfigError, "at least one dimension is required");
  }
  return dimensions;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  std::filesystem::path items_path;
  std::filesystem::path responses_path;
  std::filesystem::path materials_path;
  std::string item_filter;
};

int cmd_stats(const RunConfig& config, const StatsArgs& args, std::ostream& out,
              std::ostream& err) {
  require_file(args.items_path);
  require_file(args.responses_path);

  std::vector<std::string> warnings;
  std::vector<QuizItem> items = load_items(args.items_path, &warnings);
  std::vector<ResponseRecord> responses = load_responses(args.responses_path, &warnings);
  print_warnings(warnings, err);

  if (!args.materials_path.empty()) {
    require_file(args.materials_path);
    std::vector<LearningMaterial> materials = load_materials(args.materials_path);
    ValidationReport report = validate_dataset(materials, items, responses);
    for (const ValidationIssue& issue : report.issues) {
      err << "warning: " << to_string(issue.kind) << " (" << issue.subject << "): "
          << issue.detail << "\n";
    }
  }

  ResponseMatrix matrix = build_response_matrix(items, responses);
  std::vector<ItemStats> stats = compute_all_stats(matrix, items);
  if (!args.item_filter.empty()) {
    std::vector<ItemStats> filtered;
    for (ItemStats& s : stats) {
      if (s.item_id == args.item_filter) filtered.push_back(std::move(s));
    }
    if (filtered.empty()) {
      throw Error(ErrorCode::UnknownItem, "no item with id '" + args.item_filter + "'");
    }
    stats = std::move(filtered);
  }

  std::filesystem::path out_path = config.out_dir / "stats.jsonl";
  JsonlWriter writer(out_path, make_header(config));
  for (const ItemStats& s : stats) writer.write(to_json(s));
  writer.flush();

  out << "stats: " << stats.size() << " item(s), " << matrix.students.size()
      << " student(s), " << responses.size() << " response(s) -> " << out_path.string()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------- pairs

struct PairsArgs {
  std::filesystem::path items_path;
  std::filesystem::path stats_path;
  std::filesystem::path materials_path;
  std::string dimensions = "df,dc,de";
  std::optional<double> alpha;
  std::string grouping = "material";
  std::string tc_profile = "section";
};

int cmd_pairs(const RunConfig& config, const PairsArgs& args, std::ostream& out,
              std::ostream& err) {
  require_file(args.items_path);
  std::vector<QuizItem> items = load_items(args.items_path);
  std::vector<Dimension> dimensions = parse_dimensions(args.dimensions);

  Grouping grouping;
  if (args.grouping == "material") {
    grouping = Grouping::ByMaterial;
  } else if (args.grouping == "section") {
    grouping = Grouping::BySection;
  } else {
    throw Error(ErrorCode::ConfigError, "grouping must be 'material' or 'section'");
  }

  std::vector<QuestionPair> all_pairs;
  std::map<Dimension, int> counts;
  for (Dimension dimension : dimensions) {
    std::vector<QuestionPair> pairs;
    if (dimension == Dimension::TC) {
      require_file(args.materials_path);
      std::vector<LearningMaterial> materials = load_materials(args.materials_path);
      DatasetProfile profile;
      if (args.tc_profile == "section") {
        profile = DatasetProfile::SameMaterialDifferentSection;
      } else if (args.tc_profile == "topic") {
        profile = DatasetProfile::SharedKnowledgeComponent;
      } else {
        throw Error(ErrorCode::ConfigError, "tc-profile must be 'section' or 'topic'");
      }
      if (args.alpha && *args.alpha != default_alpha(Dimension::TC)) {
        err << "warning: --alpha does not apply to TC pairs (delta is always 1)\n";
      }
      pairs = build_tc_pairs(items, materials, profile, config.seed);
    } else {
      require_file(args.stats_path);
      std::vector<ItemStats> stats = load_stats_file(args.stats_path);
      double alpha = args.alpha ? *args.alpha : config.alpha_for(dimension);
      pairs = build_stat_pairs(stats, items, dimension, alpha, grouping);
    }
    counts[dimension] = static_cast<int>(pairs.size());
    all_pairs.insert(all_pairs.end(), pairs.begin(), pairs.end());
  }

  std::filesystem::path out_path = config.out_dir / "pairs.jsonl";
  JsonlWriter writer(out_path, make_header(config));
  for (const QuestionPair& pair : all_pairs) writer.write(to_json(pair));
  writer.flush();

  for (const auto& [dimension, count] : counts) {
    out << "pairs[" << to_string(dimension) << "]: " << count << "\n";
  }
  out << "total: " << all_pairs.size() << " -> " << out_path.string() << "\n";
  return 0;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::filesystem::path pairs_path;
  std::filesystem::path materials_path;
  std::filesystem::path items_path;
  std::string strategies;
  std::string direction = "higher";
};

struct TaskKey {
  std::string pair_id;
  std::string strategy;
};

struct TaskResult {
  std::vector<json> outcome_lines;  // original then swapped
  std::optional<json> simulation_line;
  std::optional<std::string> failure;
};

json simulation_to_json(const std::string& pair_id, const std::string& strategy,
                        const QgsmsRun& run) {
  json profiles = json::array();
  for (const StudentProfile& p : run.profiles) {
    profiles.push_back(json{{"name", p.name}, {"understanding", p.understanding}});
  }
  auto slot_to_json = [](const SlotOutcome& slot) {
    json value;
    switch (slot.kind) {
      case SlotOutcomeKind::Correct: value["outcome"] = "correct"; break;
      case SlotOutcomeKind::Incorrect: value["outcome"] = "incorrect"; break;
      case SlotOutcomeKind::Unpredicted: value["outcome"] = "unpredicted"; break;
    }
    if (slot.kind == SlotOutcomeKind::Incorrect && !slot.distractor.empty()) {
      value["distractor"] = slot.distractor;
    }
    return value;
  };
  json prediction = json::array();
  for (const auto& row : run.prediction.rows) {
    prediction.push_back(json{{"student", row.student},
                              {"q1", slot_to_json(row.q1)},
                              {"q2", slot_to_json(row.q2)}});
  }
  return json{{"pair_id", pair_id},
              {"strategy", strategy},
              {"profile_set_id", run.profile_set_id},
              {"profiles", std::move(profiles)},
              {"prediction", std::move(prediction)}};
}

// Longest prefix of canonical tasks whose two outcome lines (and, for the
// qg-sms strategies, one simulation line) are already present. Anything
// after the prefix is dropped so a resumed file converges byte-for-byte.
struct ResumeState {
  std::size_t completed_tasks = 0;
  std::vector<std::string> kept_result_lines;
  std::vector<std::string> kept_simulation_lines;
};

bool strategy_simulates(const std::string& strategy) {
  return strategy == to_string(Strategy::QgSms) ||
         strategy == to_string(Strategy::QgSmsDirect);
}

ResumeState compute_resume_state(const std::filesystem::path& results_path,
                                 const std::filesystem::path& simulations_path,
                                 const std::vector<TaskKey>& tasks,
                                 const std::string& expected_hash, std::uint64_t expected_seed) {
  ResumeState state;
  std::optional<json> header = read_file_header(results_path);
  if (!header || header->value("config_hash", "") != expected_hash ||
      header->value("seed", std::uint64_t{0}) != expected_seed) {
    return state;
  }

  auto read_lines = [](const std::filesystem::path& path) {
    std::vector<std::string> lines;
    std::ifstream in(path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (first) {
        first = false;
        json value = json::parse(line, nullptr, false);
        if (!value.is_discarded() && is_header_line(value)) continue;
      }
      lines.push_back(line);
    }
    return lines;
  };
  std::vector<std::string> result_lines = read_lines(results_path);
  std::vector<std::string> simulation_lines =
      std::filesystem::exists(simulations_path) ? read_lines(simulations_path)
                                                : std::vector<std::string>{};

  std::size_t result_cursor = 0;
  std::size_t simulation_cursor = 0;
  for (const TaskKey& task : tasks) {
    if (result_cursor + 2 > result_lines.size()) break;
    bool matches = true;
    for (int slot = 0; slot < 2; ++slot) {
      json value = json::parse(result_lines[result_cursor + slot], nullptr, false);
      if (value.is_discarded() || value.value("pair_id", "") != task.pair_id ||
          value.value("strategy", "") != task.strategy ||
          value.value("order", "") != (slot == 0 ? "original" : "swapped")) {
        matches = false;
        break;
      }
    }
    if (!matches) break;

    std::size_t simulation_needed = strategy_simulates(task.strategy) ? 1 : 0;
    if (simulation_needed) {
      if (simulation_cursor >= simulation_lines.size()) break;
      json value = json::parse(simulation_lines[simulation_cursor], nullptr, false);
      if (value.is_discarded() || value.value("pair_id", "") != task.pair_id ||
          value.value("strategy", "") != task.strategy) {
        break;
      }
    }

    state.kept_result_lines.push_back(result_lines[result_cursor]);
    state.kept_result_lines.push_back(result_lines[result_cursor + 1]);
    result_cursor += 2;
    if (simulation_needed) {
      state.kept_simulation_lines.push_back(simulation_lines[simulation_cursor]);
      simulation_cursor += 1;
    }
    state.completed_tasks += 1;
  }
  return state;
}

int cmd_eval(const RunConfig& config, const EvalArgs& args, std::ostream& out,
             std::ostream& err) {
  require_file(args.pairs_path);
  require_file(args.materials_path);
  require_file(args.items_path);

  std::vector<QuestionPair> pairs = load_pairs_file(args.pairs_path);
  std::vector<LearningMaterial> materials = load_materials(args.materials_path);
  std::vector<QuizItem> items = load_items(args.items_path);

  if (pairs.empty()) {
    throw Error(ErrorCode::EmptyCandidateSet, "pair file contains no pairs");
  }

  std::vector<Strategy> strategies;
  {
    std::stringstream stream(args.strategies);
    std::string token;
    while (std::getline(stream, token, ',')) {
      if (!token.empty()) strategies.push_back(strategy_from_string(token));
    }
    if (strategies.empty()) {
      throw Error(ErrorCode::ConfigError, "at least one strategy is required");
    }
  }

  Direction direction;
  if (args.direction == "higher") {
    direction = Direction::PreferHigher;
  } else if (args.direction == "lower") {
    direction = Direction::PreferLower;
  } else {
    throw Error(ErrorCode::ConfigError, "direction must be 'higher' or 'lower'");
  }

  std::map<std::string, const LearningMaterial*> material_index;
  for (const LearningMaterial& m : materials) material_index[m.material_id] = &m;
  std::map<std::string, const QuizItem*> item_index;
  for (const QuizItem& i : items) item_index[i.item_id] = &i;
  {
    std::set<std::string> seen;
    for (const QuestionPair& pair : pairs) {
      if (!seen.insert(pair.pair_id).second) {
        throw Error(ErrorCode::DuplicateId,
                    "pair file contains '" + pair.pair_id + "' more than once");
      }
    }
  }
  for (const QuestionPair& pair : pairs) {
    for (const std::string& item_id : {pair.q1, pair.q2}) {
      if (!item_index.count(item_id)) {
        throw Error(ErrorCode::UnknownItem,
                    "pair '" + pair.pair_id + "' references unknown item '" + item_id + "'");
      }
    }
    if (!material_index.count(pair.material_id)) {
      throw Error(ErrorCode::UnknownItem, "pair '" + pair.pair_id +
                                              "' references unknown material '" +
                                              pair.material_id + "'");
    }
  }

  std::unique_ptr<Gateway> gateway = make_gateway(config);
  TemplateStore templates = make_templates(config);
  EvalContext ctx{*gateway, templates, config.model, config.temperature,
                  config.min_profiles};

  std::vector<TaskKey> tasks;
  for (const QuestionPair& pair : pairs) {
    for (Strategy strategy : strategies) {
      tasks.push_back({pair.pair_id, to_string(strategy)});
    }
  }

  std::filesystem::path results_path = config.out_dir / "results.jsonl";
  std::filesystem::path simulations_path = config.out_dir / "simulations.jsonl";
  ResumeState resume = compute_resume_state(results_path, simulations_path, tasks,
                                            config_hash(config), config.seed);

  std::filesystem::create_directories(config.out_dir);
  FileHeader header = make_header(config);
  bool any_simulating =
      std::any_of(tasks.begin(), tasks.end(),
                  [](const TaskKey& t) { return strategy_simulates(t.strategy); });
  {
    std::ofstream results_out(results_path, std::ios::trunc);
    results_out << header.to_json().dump() << "\n";
    for (const std::string& line : resume.kept_result_lines) results_out << line << "\n";
  }
  if (any_simulating) {
    std::ofstream simulations_out(simulations_path, std::ios::trunc);
    simulations_out << header.to_json().dump() << "\n";
    for (const std::string& line : resume.kept_simulation_lines) {
      simulations_out << line << "\n";
    }
  }

  std::ofstream results_out(results_path, std::ios::app);
  std::ofstream simulations_out;
  if (any_simulating) simulations_out.open(simulations_path, std::ios::app);

  std::map<std::string, const QuestionPair*> pair_index;
  for (const QuestionPair& pair : pairs) pair_index[pair.pair_id] = &pair;

  auto run_task = [&](const TaskKey& task) -> TaskResult {
    TaskResult result;
    try {
      const QuestionPair& stored = *pair_index.at(task.pair_id);
      Requirement requirement =
          make_requirement(stored.dimension,
                           stored.dimension == Dimension::TC ? Direction::PreferHigher
                                                             : direction,
                           stored.target_topic);
      QuestionPair pair = stored.dimension == Dimension::TC
                              ? stored
                              : invert_requirement(stored, requirement);
      PairInputs inputs{pair, *item_index.at(pair.q1), *item_index.at(pair.q2),
                        *material_index.at(pair.material_id)};
      StrategyRunResult run =
          run_strategy(ctx, strategy_from_string(task.strategy), inputs, requirement);
      for (const EvaluationOutcome& outcome : run.outcomes) {
        result.outcome_lines.push_back(to_json(outcome, config.keep_transcripts));
      }
      if (run.simulation) {
        result.simulation_line =
            simulation_to_json(task.pair_id, task.strategy, *run.simulation);
      }
    } catch (const Error& e) {
      result.failure = e.what();
    }
    return result;
  };

  std::size_t next = resume.completed_tasks;
  std::deque<std::pair<TaskKey, std::future<TaskResult>>> window;
  std::vector<std::string> failures;
  std::size_t executed = 0;
  const std::size_t window_size = static_cast<std::size_t>(std::max(1, config.concurrency));

  while (next < tasks.size() || !window.empty()) {
    while (window.size() < window_size && next < tasks.size()) {
      const TaskKey& task = tasks[next++];
      window.emplace_back(task,
                          std::async(std::launch::async, [&run_task, task] {
                            return run_task(task);
                          }));
    }
    auto [task, future] = std::move(window.front());
    window.pop_front();
    TaskResult result = future.get();
    ++executed;
    if (result.failure) {
      failures.push_back(task.strategy + " on " + task.pair_id + ": " + *result.failure);
      continue;
    }
    for (const json& line : result.outcome_lines) results_out << line.dump() << "\n";
    results_out.flush();
    if (result.simulation_line) {
      simulations_out << result.simulation_line->dump() << "\n";
      simulations_out.flush();
    }
  }

  out << "eval: " << executed << " task(s) run, " << resume.completed_tasks
      << " resumed, provider calls " << gateway->provider_calls() << ", cache hits "
      << gateway->cache_hits() << " -> " << results_path.string() << "\n";
  if (!failures.empty()) {
    err << failures.size() << " task(s) failed:\n";
    for (const std::string& failure : failures) err << "  " << failure << "\n";
    return 1;
  }
  return 0;
}

// --------------------------------------------------------------- report

struct ReportArgs {
  std::filesystem::path results_path;
  std::filesystem::path pairs_path;
  std::optional<double> alpha;
  std::string dimension_filter;
  std::string direction = "higher";
};

int cmd_report(const RunConfig& config, const ReportArgs& args, std::ostream& out,
               std::ostream& /*err*/) {
  require_file(args.results_path);
  require_file(args.pairs_path);

  std::vector<QuestionPair> pairs = load_pairs_file(args.pairs_path);
  std::vector<EvaluationOutcome> outcomes = load_results_file(args.results_path);

  // Unknown references are reported against the full pair file, before any
  // alpha or dimension narrowing.
  {
    std::set<std::string> ids;
    for (const QuestionPair& pair : pairs) ids.insert(pair.pair_id);
    for (const EvaluationOutcome& outcome : outcomes) {
      if (!ids.count(outcome.pair_id)) {
        throw Error(ErrorCode::UnknownPairReference,
                    "results reference pair '" + outcome.pair_id + "' absent from " +
                        args.pairs_path.string());
      }
    }
  }

  if (args.direction == "lower") {
    for (QuestionPair& pair : pairs) {
      if (pair.dimension == Dimension::TC) continue;
      Requirement requirement = make_requirement(pair.dimension, Direction::PreferLower);
      pair = invert_requirement(pair, requirement);
    }
  } else if (args.direction != "higher") {
    throw Error(ErrorCode::ConfigError, "direction must be 'higher' or 'lower'");
  }

  if (args.alpha) pairs = alpha_filter(pairs, *args.alpha);
  if (!args.dimension_filter.empty()) {
    Dimension wanted = dimension_from_string(args.dimension_filter);
    std::erase_if(pairs, [&](const QuestionPair& p) { return p.dimension != wanted; });
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::EmptyCandidateSet, "no pairs left after filtering");
  }
  {
    std::set<std::string> ids;
    for (const QuestionPair& pair : pairs) ids.insert(pair.pair_id);
    std::erase_if(outcomes,
                  [&](const EvaluationOutcome& o) { return !ids.count(o.pair_id); });
  }

  std::set<std::string> strategies;
  for (const EvaluationOutcome& outcome : outcomes) strategies.insert(outcome.strategy);
  if (strategies.empty()) {
    throw Error(ErrorCode::EmptyCandidateSet, "results file contains no outcomes");
  }

  std::filesystem::path csv_path = config.out_dir / "report.csv";
  std::filesystem::path md_path = config.out_dir / "report.md";
  std::filesystem::create_directories(config.out_dir);
  std::ofstream csv(csv_path, std::ios::trunc);
  std::ofstream md(md_path, std::ios::trunc);
  csv << text_header(config) << "\n";
  csv << "strategy,dimension,pairs,average_accuracy,consistent_accuracy\n";
  md << text_header(config) << "\n\n";
  md << "| strategy | dimension | pairs | AA | CA |\n";
  md << "|---|---|---:|---:|---:|\n";

  for (const std::string& strategy : strategies) {
    StrategyReport report = build_strategy_report(strategy, outcomes, pairs);
    std::vector<AccuracyRow> rows = report.per_dimension;
    rows.push_back(report.overall);
    for (const AccuracyRow& row : rows) {
      csv << strategy << "," << row.dimension << "," << row.pair_count << ","
          << fixed6(row.average_accuracy) << "," << fixed6(row.consistent_accuracy) << "\n";
      md << "| " << strategy << " | " << row.dimension << " | " << row.pair_count << " | "
         << fixed6(row.average_accuracy) << " | " << fixed6(row.consistent_accuracy)
         << " |\n";
      out << strategy << " " << row.dimension << ": pairs=" << row.pair_count
          << " AA=" << fixed6(row.average_accuracy)
          << " CA=" << fixed6(row.consistent_accuracy) << "\n";
    }
  }
  out << "report -> " << csv_path.string() << ", " << md_path.string() << "\n";
  return 0;
}

// ----------------------------------------------------------------- rank

struct RankArgs {
  std::filesystem::path results_path;
  std::filesystem::path pairs_path;
  std::filesystem::path stats_path;
  std::string strategy;
};

int cmd_rank(const RunConfig& config, const RankArgs& args, std::ostream& out,
             std::ostream& err) {
  require_file(args.results_path);
  require_file(args.pairs_path);

  std::vector<QuestionPair> pairs = load_pairs_file(args.pairs_path);
  std::vector<EvaluationOutcome> outcomes = load_results_file(args.results_path);

  std::set<std::string> present;
  for (const EvaluationOutcome& outcome : outcomes) present.insert(outcome.strategy);
  std::string strategy = args.strategy;
  if (strategy.empty()) {
    if (present.size() != 1) {
      throw Error(ErrorCode::ConfigError,
                  "results contain several strategies; pick one with --strategy");
    }
    strategy = *present.begin();
  }
  std::erase_if(outcomes,
                [&](const EvaluationOutcome& o) { return o.strategy != strategy; });

  RankingTable table = ranking_scores(outcomes, pairs);

  std::map<std::string, std::optional<int>> de_values;
  if (!args.stats_path.empty()) {
    require_file(args.stats_path);
    for (const ItemStats& s : load_stats_file(args.stats_path)) {
      de_values[s.item_id] = s.de;
    }
  }

  std::optional<AnovaResult> anova;
  std::string anova_note;
  if (!de_values.empty()) {
    std::map<int, std::vector<double>> by_de;
    for (const auto& [item_id, entry] : table) {
      auto it = de_values.find(item_id);
      if (it == de_values.end() || !it->second) continue;
      by_de[*it->second].push_back(entry.score());
    }
    std::vector<std::vector<double>> groups;
    for (auto& [de, scores] : by_de) groups.push_back(std::move(scores));
    try {
      anova = one_way_anova(groups);
    } catch (const Error& e) {
      anova_note = e.what();
    }
  }

  std::filesystem::path csv_path = config.out_dir / "rankings.csv";
  std::filesystem::create_directories(config.out_dir);
  std::ofstream csv(csv_path, std::ios::trunc);
  csv << text_header(config) << "\n";
  if (anova) {
    csv << "# anova F=" << fixed6(anova->f_statistic) << " p=" << fixed6(anova->p_value)
        << " df=(" << anova->df_between << "," << anova->df_within << ")\n";
  }
  csv << "item_id,appearances,score,de\n";
  for (const auto& [item_id, entry] : table) {
    csv << item_id << "," << entry.appearances << "," << fixed6(entry.score()) << ",";
    auto it = de_values.find(item_id);
    if (it != de_values.end() && it->second) csv << *it->second;
    csv << "\n";
  }

  out << "rank[" << strategy << "]: " << table.size() << " item(s) -> " << csv_path.string()
      << "\n";
  if (anova) {
    out << "anova: F=" << fixed6(anova->f_statistic) << " p=" << fixed6(anova->p_value)
        << " df=(" << anova->df_between << "," << anova->df_within << ")\n";
  } else if (!anova_note.empty()) {
    err << "warning: anova skipped: " << anova_note << "\n";
  }
  return 0;
}

// --------------------------------------------------------- significance

struct SignificanceArgs {
  std::filesystem::path results_path;
  std::filesystem::path baseline_path;
  std::filesystem::path pairs_path;
  std::string strategy;
  std::string baseline_strategy;
};

int cmd_significance(const RunConfig& config, const SignificanceArgs& args, std::ostream& out,
                     std::ostream& /*err*/) {
  require_file(args.results_path);
  require_file(args.baseline_path);
  require_file(args.pairs_path);

  std::vector<QuestionPair> pairs = load_pairs_file(args.pairs_path);
  auto load_side = [](const std::filesystem::path& path, const std::string& strategy_filter) {
    std::vector<EvaluationOutcome> outcomes = load_results_file(path);
    if (!strategy_filter.empty()) {
      std::erase_if(outcomes, [&](const EvaluationOutcome& o) {
        return o.strategy != strategy_filter;
      });
    } else {
      std::set<std::string> present;
      for (const EvaluationOutcome& o : outcomes) present.insert(o.strategy);
      if (present.size() > 1) {
        throw Error(ErrorCode::ConfigError,
                    path.string() + " contains several strategies; pick one with a filter");
      }
    }
    return outcomes;
  };
  std::vector<EvaluationOutcome> candidate = load_side(args.results_path, args.strategy);
  std::vector<EvaluationOutcome> baseline =
      load_side(args.baseline_path, args.baseline_strategy);

  // Both sides must be judgments over this pair file; anything else is a
  // mismatched pair set, reported with both file names.
  {
    std::set<std::string> ids;
    for (const QuestionPair& pair : pairs) ids.insert(pair.pair_id);
    for (const auto* side : {&candidate, &baseline}) {
      for (const EvaluationOutcome& outcome : *side) {
        if (!ids.count(outcome.pair_id)) {
          throw Error(ErrorCode::MismatchedPairSets,
                      "outcome references pair '" + outcome.pair_id + "' absent from " +
                          args.pairs_path.string() + " (candidate: " +
                          args.results_path.string() + ", baseline: " +
                          args.baseline_path.string() + ")");
        }
      }
    }
  }

  std::filesystem::path csv_path = config.out_dir / "significance.csv";
  std::filesystem::create_directories(config.out_dir);
  std::ofstream csv(csv_path, std::ios::trunc);
  csv << text_header(config) << "\n";
  csv << "dimension,pairs,candidate_ca,baseline_ca,p_value,significant\n";

  auto emit = [&](const std::string& label, const std::vector<QuestionPair>& subset) {
    std::set<std::string> subset_ids;
    for (const QuestionPair& pair : subset) subset_ids.insert(pair.pair_id);
    std::vector<EvaluationOutcome> candidate_slice, baseline_slice;
    for (const EvaluationOutcome& o : candidate) {
      if (subset_ids.count(o.pair_id)) candidate_slice.push_back(o);
    }
    for (const EvaluationOutcome& o : baseline) {
      if (subset_ids.count(o.pair_id)) baseline_slice.push_back(o);
    }
    double p_value = significance_vs_baseline(candidate_slice, baseline_slice, subset);
    double candidate_ca = consistent_accuracy(candidate_slice, subset);
    double baseline_ca = consistent_accuracy(baseline_slice, subset);
    bool significant = p_value < kSignificanceLevel;
    csv << label << "," << subset.size() << "," << fixed6(candidate_ca) << ","
        << fixed6(baseline_ca) << "," << fixed6(p_value) << ","
        << (significant ? "yes" : "no") << "\n";
    out << label << ": n=" << subset.size() << " candidate_ca=" << fixed6(candidate_ca)
        << " baseline_ca=" << fixed6(baseline_ca) << " p=" << fixed6(p_value)
        << (significant ? " (significant)" : "") << "\n";
  };

  for (Dimension d : {Dimension::TC, Dimension::DF, Dimension::DC, Dimension::DE}) {
    std::vector<QuestionPair> subset;
    for (const QuestionPair& pair : pairs) {
      if (pair.dimension == d) subset.push_back(pair);
    }
    if (!subset.empty()) emit(to_string(d), subset);
  }
  emit("overall", pairs);
  out << "significance -> " << csv_path.string() << "\n";
  return 0;
}

// ----------------------------------------------------------------- qgen

struct QgenArgs {
  std::filesystem::path materials_path;
  std::string dimension;
  std::string material_filter;
};

int cmd_qgen(const RunConfig& config, const QgenArgs& args, std::ostream& out,
             std::ostream& /*err*/) {
  require_file(args.materials_path);
  std::vector<LearningMaterial> materials = load_materials(args.materials_path);
  if (!args.material_filter.empty()) {
    std::erase_if(materials, [&](const LearningMaterial& m) {
      return m.material_id != args.material_filter;
    });
    if (materials.empty()) {
      throw Error(ErrorCode::UnknownItem,
                  "no material with id '" + args.material_filter + "'");
    }
  }
  Dimension dimension = dimension_from_string(args.dimension);

  std::unique_ptr<Gateway> gateway = make_gateway(config);
  TemplateStore templates = make_templates(config);
  EvalContext ctx{*gateway, templates, config.model, config.temperature,
                  config.min_profiles};

  std::filesystem::path out_path = config.out_dir / "generated_items.jsonl";
  JsonlWriter writer(out_path, make_header(config));
  int total = 0;
  for (const LearningMaterial& material : materials) {
    std::vector<GeneratedQuestion> questions =
        generate_controlled_questions(ctx, material, dimension);
    for (const GeneratedQuestion& question : questions) {
      json value = to_json(question.item);
      value["quality_tag"] = question.quality_tag;
      writer.write(value);
      ++total;
    }
    out << "qgen[" << material.material_id << "]: " << questions.size() << " question(s)\n";
  }
  writer.flush();
  out << "total: " << total << " -> " << out_path.string() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"test item analysis and pairwise question-quality evaluation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, provider;
  std::uint64_t seed = 0;
  bool no_transcript = false;
  std::string mock_script, endpoint, model, cache_dir, templates_dir;
  int concurrency = 0, max_retries = -1;

  app.add_option("--config", config_path, "key = value config file");
  auto* seed_opt = app.add_option("--seed", seed, "seed recorded into outputs");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--provider", provider, "provider kind (mock|http)");
  app.add_flag("--no-transcript", no_transcript, "store transcript hashes only");
  app.add_option("--mock-script", mock_script, "mock provider script file");
  app.add_option("--endpoint", endpoint, "http provider endpoint URL");
  app.add_option("--model", model, "model name");
  app.add_option("--cache-dir", cache_dir, "response cache directory");
  app.add_option("--templates-dir", templates_dir, "prompt template overrides");
  app.add_option("--concurrency", concurrency, "max in-flight provider calls");
  app.add_option("--max-retries", max_retries, "provider retry budget");

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "compute item statistics");
  stats->add_option("--items", stats_args.items_path, "items.jsonl")->required();
  stats->add_option("--responses", stats_args.responses_path, "responses.jsonl")->required();
  stats->add_option("--materials", stats_args.materials_path,
                    "materials.jsonl (enables dataset validation warnings)");
  stats->add_option("--item", stats_args.item_filter, "emit a single item only");

  PairsArgs pairs_args;
  auto* pairs = app.add_subcommand("pairs", "build labeled question pairs");
  pairs->add_option("--items", pairs_args.items_path, "items.jsonl")->required();
  pairs->add_option("--stats", pairs_args.stats_path, "stats.jsonl (DF/DC/DE)");
  pairs->add_option("--materials", pairs_args.materials_path, "materials.jsonl (TC)");
  pairs->add_option("--dimension", pairs_args.dimensions, "comma list of tc,df,dc,de");
  double alpha_value = 0.0;
  auto* alpha_opt = pairs->add_option("--alpha", alpha_value, "quality-difference threshold");
  pairs->add_option("--grouping", pairs_args.grouping, "candidate grouping (material|section)");
  pairs->add_option("--tc-profile", pairs_args.tc_profile, "TC candidate rule (section|topic)");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "run judgment strategies over pairs");
  eval->add_option("--pairs", eval_args.pairs_path, "pairs.jsonl")->required();
  eval->add_option("--materials", eval_args.materials_path, "materials.jsonl")->required();
  eval->add_option("--items", eval_args.items_path, "items.jsonl")->required();
  eval->add_option("--strategy", eval_args.strategies,
                   "comma list of vanilla,cot,metrics,reference,swap,qg-sms,qg-sms-direct")
      ->required();
  eval->add_option("--direction", eval_args.direction,
                   "requirement direction (higher|lower)");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "score strategies (AA/CA)");
  report->add_option("--results", report_args.results_path, "results.jsonl")->required();
  report->add_option("--pairs", report_args.pairs_path, "pairs.jsonl")->required();
  double report_alpha = 0.0;
  auto* report_alpha_opt =
      report->add_option("--alpha", report_alpha, "re-filter pairs at a larger threshold");
  report->add_option("--dimension", report_args.dimension_filter, "restrict to one dimension");
  report->add_option("--direction", report_args.direction,
                     "requirement direction (higher|lower)");

  RankArgs rank_args;
  auto* rank = app.add_subcommand("rank", "per-item ranking scores");
  rank->add_option("--results", rank_args.results_path, "results.jsonl")->required();
  rank->add_option("--pairs", rank_args.pairs_path, "pairs.jsonl")->required();
  rank->add_option("--stats", rank_args.stats_path, "stats.jsonl (enables the DE anova)");
  rank->add_option("--strategy", rank_args.strategy, "strategy to rank (if several present)");

  SignificanceArgs significance_args;
  auto* significance =
      app.add_subcommand("significance", "binomial test of CA against a baseline");
  significance->add_option("--results", significance_args.results_path,
                           "candidate results.jsonl")
      ->required();
  significance->add_option("--baseline", significance_args.baseline_path,
                           "baseline results.jsonl")
      ->required();
  significance->add_option("--pairs", significance_args.pairs_path, "pairs.jsonl")->required();
  significance->add_option("--strategy", significance_args.strategy,
                           "candidate strategy filter");
  significance->add_option("--baseline-strategy", significance_args.baseline_strategy,
                           "baseline strategy filter");

  QgenArgs qgen_args;
  auto* qgen = app.add_subcommand("qgen", "quality-controlled question generation");
  qgen->add_option("--materials", qgen_args.materials_path, "materials.jsonl")->required();
  qgen->add_option("--dimension", qgen_args.dimension, "df, dc, or de")->required();
  qgen->add_option("--material", qgen_args.material_filter, "generate for one material only");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> argv_storage = args;
  std::vector<const char*> argv;
  argv.push_back("itemlab");
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  // Library warnings surface on this invocation's error stream.
  set_warning_sink([&err](const std::string& message) { err << "warning: " << message << "\n"; });
  struct SinkReset {
    ~SinkReset() { set_warning_sink(nullptr); }
  } sink_reset;

  try {
    RunConfig config;
    if (!config_path.empty()) config = load_config_file(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (!provider.empty()) apply_config_line(config, "provider", provider);
    if (seed_opt->count() > 0) config.seed = seed;
    if (no_transcript) config.keep_transcripts = false;
    if (!mock_script.empty()) config.mock_script = mock_script;
    if (!endpoint.empty()) config.endpoint = endpoint;
    if (!model.empty()) config.model = model;
    if (!cache_dir.empty()) config.cache_dir = cache_dir;
    if (!templates_dir.empty()) config.templates_dir = templates_dir;
    if (concurrency > 0) config.concurrency = concurrency;
    if (max_retries >= 0) config.max_retries = max_retries;

    if (alpha_opt->count() > 0) pairs_args.alpha = alpha_value;
    if (report_alpha_opt->count() > 0) report_args.alpha = report_alpha;

    if (stats->parsed()) return cmd_stats(config, stats_args, out, err);
    if (pairs->parsed()) return cmd_pairs(config, pairs_args, out, err);
    if (eval->parsed()) return cmd_eval(config, eval_args, out, err);
    if (report->parsed()) return cmd_report(config, report_args, out, err);
    if (rank->parsed()) return cmd_rank(config, rank_args, out, err);
    if (significance->parsed()) return cmd_significance(config, significance_args, out, err);
    if (qgen->parsed()) return cmd_qgen(config, qgen_args, out, err);
    err << "error: no command given\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::IoError ? 2 : 1;
  }
}

}  // namespace itemlab::cli
