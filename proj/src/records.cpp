#include "fimkit/records.hpp"

#include <fstream>
#include <stdexcept>

namespace fimkit {

Json to_json(const TrainingRecord& rec) {
  Json j;
  j["kind"] = to_string(rec.kind);
  j["text"] = rec.text;
  j["lang"] = rec.lang;
  j["strategy"] = rec.strategy ? Json(to_string(*rec.strategy)) : Json(nullptr);
  j["mode"] = rec.mode ? Json(to_string(*rec.mode)) : Json(nullptr);
  j["source_id"] = rec.source_id;
  j["chunk_index"] = rec.chunk_index;
  j["mask_start"] = rec.mask ? Json(rec.mask->start) : Json(nullptr);
  j["mask_end"] = rec.mask ? Json(rec.mask->end) : Json(nullptr);
  return j;
}

TrainingRecord training_record_from_json(const Json& j) {
  TrainingRecord rec;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "fim") {
    rec.kind = RecordKind::fim;
  } else if (kind == "l2r") {
    rec.kind = RecordKind::l2r;
  } else {
    throw std::invalid_argument("unknown record kind '" + kind + "'");
  }
  rec.text = j.at("text").get<std::string>();
  rec.lang = j.at("lang").get<std::string>();
  if (!j.at("strategy").is_null()) rec.strategy = parse_mask_strategy(j.at("strategy").get<std::string>());
  if (!j.at("mode").is_null()) rec.mode = parse_fim_mode(j.at("mode").get<std::string>());
  rec.source_id = j.at("source_id").get<std::string>();
  rec.chunk_index = j.value("chunk_index", std::size_t{0});
  if (!j.at("mask_start").is_null()) {
    rec.mask = CharSpan{j.at("mask_start").get<std::size_t>(), j.at("mask_end").get<std::size_t>()};
  }
  return rec;
}

std::string to_jsonl(const TrainingRecord& rec) {
  return to_json(rec).dump(-1, ' ', false, nlohmann::detail::error_handler_t::strict);
}

Json to_json(const GenStats& s) {
  Json j;
  j["documents"] = s.documents;
  j["rejected_documents"] = s.rejected_documents;
  j["natural_language_documents"] = s.natural_language_documents;
  j["unsupported_documents"] = s.unsupported_documents;
  j["parsed_documents"] = s.parsed_documents;
  j["parse_valid_documents"] = s.parse_valid_documents;
  j["failed_documents"] = s.failed_documents;
  j["bytes"] = s.bytes;
  j["chunks"] = s.chunks;
  j["records"] = s.records;
  j["by_kind"] = s.by_kind;
  j["by_strategy"] = s.by_strategy;
  j["by_mode"] = s.by_mode;
  j["by_lang"] = s.by_lang;
  j["fallback"] = {{"unparsed", s.fallback_unparsed},
                   {"ast_failed", s.fallback_ast_failed},
                   {"total", s.fallback_unparsed + s.fallback_ast_failed},
                   {"degenerate_to_l2r", s.degenerate_to_l2r}};
  j["rates"] = {{"fim", s.fim_rate()},
                {"ast_among_fim_parse_valid", s.ast_fraction()},
                {"ast_requested_among_fim_parse_valid", s.ast_requested_fraction()},
                {"psm_among_fim", s.psm_fraction()},
                {"single_node_among_ast", s.single_node_fraction()},
                {"parse_validity", s.parse_validity_rate()}};
  j["errors"] = s.errors;
  return j;
}

Json to_json(const MixConfig& mix) {
  Json j;
  j["fim_rate"] = mix.fim_rate;
  j["ast_fraction"] = mix.ast_fraction;
  j["psm_fraction"] = mix.psm_fraction;
  j["single_node_fraction"] = mix.mask.single_node_fraction;
  j["max_resample_attempts"] = mix.mask.max_resample_attempts;
  j["context_budget"] = mix.context_budget;
  j["sentinels"] = {{"pre", mix.sentinels.pre},
                    {"suf", mix.sentinels.suf},
                    {"mid", mix.sentinels.mid},
                    {"eot", mix.sentinels.eot}};
  return j;
}

Json to_json(const BenchExample& ex) {
  Json j;
  j["id"] = ex.id();
  j["split"] = to_string(ex.split);
  j["lang"] = ex.lang;
  j["repo"] = ex.repo;
  j["sha"] = ex.sha;
  j["path"] = ex.path;
  j["hunk_index"] = ex.hunk_index;
  j["prefix"] = ex.prefix;
  j["middle"] = ex.middle;
  j["suffix"] = ex.suffix;
  j["original"] = ex.original ? Json(*ex.original) : Json(nullptr);
  return j;
}

BenchExample bench_example_from_json(const Json& j) {
  BenchExample ex;
  ex.split = parse_bench_split(j.at("split").get<std::string>());
  ex.lang = j.at("lang").get<std::string>();
  ex.repo = j.at("repo").get<std::string>();
  ex.sha = j.at("sha").get<std::string>();
  ex.path = j.at("path").get<std::string>();
  ex.hunk_index = j.at("hunk_index").get<std::size_t>();
  ex.prefix = j.at("prefix").get<std::string>();
  ex.middle = j.at("middle").get<std::string>();
  ex.suffix = j.at("suffix").get<std::string>();
  if (auto it = j.find("original"); it != j.end() && !it->is_null()) ex.original = it->get<std::string>();
  return ex;
}

Json to_json(const BenchStats& s) {
  Json j;
  j["pairs"] = s.pairs;
  j["hunks"] = s.hunks;
  j["examples"] = {{"Add", s.total(BenchSplit::add)}, {"Edit", s.total(BenchSplit::edit)}};
  j["skipped_deletions"] = s.skipped_deletions;
  j["filtered"] = {{"language", s.filtered_language}, {"date", s.filtered_date}, {"length", s.filtered_length}};
  j["failed_pairs"] = s.failed_pairs;
  j["by_language"] = s.counts;
  j["log"] = s.log;
  return j;
}

CommitFilePair commit_file_pair_from_json(const Json& j, const GrammarRegistry& registry) {
  CommitFilePair p;
  p.repo = j.at("repo").get<std::string>();
  p.sha = j.at("sha").get<std::string>();
  p.path = j.at("path").get<std::string>();
  p.before = j.at("before").get<std::string>();
  p.after = j.at("after").get<std::string>();
  if (auto it = j.find("lang"); it != j.end() && it->is_string()) {
    p.lang = it->get<std::string>();
  } else {
    p.lang = registry.detect(p.path).name;
  }
  if (auto it = j.find("timestamp"); it != j.end() && it->is_string()) p.timestamp = it->get<std::string>();
  return p;
}

std::vector<Json> read_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::vector<Json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(file.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

Json to_json(const PromptRecord& p) {
  Json j;
  j["id"] = p.id;
  j["prompt"] = p.prompt;
  j["middle"] = p.middle;
  for (const auto& [k, v] : p.keys) j[k] = v;
  return j;
}

PromptRecord prompt_record_from_json(const Json& j) {
  PromptRecord p;
  p.id = j.at("id").get<std::string>();
  p.prompt = j.value("prompt", std::string());
  p.middle = j.at("middle").get<std::string>();
  for (const auto& [k, v] : j.items()) {
    if (k != "id" && k != "prompt" && k != "middle" && v.is_string()) p.keys[k] = v.get<std::string>();
  }
  return p;
}

Json to_json(const ScoreRecord& s) {
  Json tokens = Json::array();
  for (const auto& t : s.tokens) tokens.push_back({{"text", t.text}, {"logprob", t.logprob}});
  return {{"id", s.id}, {"tokens", std::move(tokens)}};
}

ScoreRecord score_record_from_json(const Json& j) {
  ScoreRecord s;
  s.id = j.at("id").get<std::string>();
  for (const auto& t : j.at("tokens")) {
    s.tokens.push_back({t.at("text").get<std::string>(), t.at("logprob").get<double>()});
  }
  return s;
}

Json to_json(const GroupSummary& g, const std::vector<std::string>& key_names) {
  Json j;
  for (std::size_t i = 0; i < key_names.size() && i < g.key.size(); ++i) j[key_names[i]] = g.key[i];
  j["count"] = g.count;
  j["mean_ppl"] = g.mean;
  j["median_ppl"] = g.median;
  j["pooled_ppl"] = g.pooled;
  return j;
}

}  // namespace fimkit
