#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fimkit/benchgen.hpp"
#include "fimkit/evalkit.hpp"
#include "fimkit/fimgen.hpp"
#include "fimkit/pipeline.hpp"

namespace fimkit {

using Json = nlohmann::ordered_json;

// Training records: {kind, text, lang, strategy, mode, source_id,
// chunk_index, mask_start, mask_end}. strategy, mode and the mask are null on
// L2R records; mask offsets are bytes into the chunk.
Json to_json(const TrainingRecord& rec);
TrainingRecord training_record_from_json(const Json& j);
/// Compact single-line form, no trailing newline.
std::string to_jsonl(const TrainingRecord& rec);

Json to_json(const GenStats& stats);
Json to_json(const MixConfig& mix);

Json to_json(const BenchExample& ex);
BenchExample bench_example_from_json(const Json& j);
Json to_json(const BenchStats& stats);

/// {repo, sha, path, lang?, before, after, timestamp?}; lang is detected from
/// the path when absent.
CommitFilePair commit_file_pair_from_json(const Json& j, const GrammarRegistry& registry);

/// Every non-blank line of a JSONL file. Errors name the file and line.
std::vector<Json> read_jsonl(const std::filesystem::path& file);

struct PromptRecord {
  std::string id;
  std::string prompt;
  std::string middle;
  std::map<std::string, std::string> keys;  // split, lang, ...
};

Json to_json(const PromptRecord& p);
PromptRecord prompt_record_from_json(const Json& j);

struct ScoreRecord {
  std::string id;
  std::vector<TokenScore> tokens;
};

Json to_json(const ScoreRecord& s);
ScoreRecord score_record_from_json(const Json& j);

Json to_json(const GroupSummary& g, const std::vector<std::string>& key_names);

}  // namespace fimkit
