#include "fimkit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <iterator>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fimkit/utf8.hpp"

namespace fimkit {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

constexpr std::size_t kMaxErrorMessages = 20;

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

DirectorySource::DirectorySource(const std::filesystem::path& root) : root_(root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw std::runtime_error("not a directory: " + root.string());
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files_.push_back(fs::relative(entry.path(), root));
  }
  std::sort(files_.begin(), files_.end(),
            [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
}

std::optional<RawDocument> DirectorySource::next() {
  if (cursor_ >= files_.size()) return std::nullopt;
  const auto& rel = files_[cursor_++];
  return RawDocument{rel.generic_string(), "", read_file(root_ / rel)};
}

JsonlSource::JsonlSource(const std::filesystem::path& file) : file_(file), in_(file, std::ios::binary) {
  if (!in_) throw std::runtime_error("cannot read " + file.string());
}

std::optional<RawDocument> JsonlSource::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RawDocument doc;
      doc.path = j.at("path").get<std::string>();
      doc.content = j.at("content").get<std::string>();
      if (auto it = j.find("lang"); it != j.end() && it->is_string()) doc.lang = it->get<std::string>();
      return doc;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(file_.string() + ":" + std::to_string(line_) + ": " + e.what());
    }
  }
  return std::nullopt;
}

std::optional<RawDocument> VectorSource::next() {
  if (cursor_ >= docs_.size()) return std::nullopt;
  return docs_[cursor_++];
}

std::unique_ptr<DocumentSource> open_corpus(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return std::make_unique<DirectorySource>(path);
  if (std::filesystem::is_regular_file(path)) return std::make_unique<JsonlSource>(path);
  throw std::runtime_error("corpus not found: " + path.string());
}

// ---------------------------------------------------------------------------
// GenStats

void GenStats::add(const TrainingRecord& rec, bool parse_valid) {
  ++records;
  ++by_kind[std::string(to_string(rec.kind))];
  ++by_lang[rec.lang];
  if (rec.degenerate) ++degenerate_to_l2r;
  if (rec.kind != RecordKind::fim) return;
  ++by_strategy[std::string(to_string(*rec.strategy))];
  ++by_mode[std::string(to_string(*rec.mode))];
  if (rec.fallback == MaskFallback::unparsed) ++fallback_unparsed;
  if (rec.fallback == MaskFallback::ast_failed) ++fallback_ast_failed;
  if (parse_valid) {
    ++valid_fim;
    if (*rec.strategy != MaskStrategy::rand_char) ++valid_fim_ast;
    if (rec.ast_requested) ++valid_fim_ast_requested;
  }
}

void GenStats::merge(const GenStats& o) {
  documents += o.documents;
  rejected_documents += o.rejected_documents;
  natural_language_documents += o.natural_language_documents;
  unsupported_documents += o.unsupported_documents;
  parsed_documents += o.parsed_documents;
  parse_valid_documents += o.parse_valid_documents;
  failed_documents += o.failed_documents;
  bytes += o.bytes;
  chunks += o.chunks;
  records += o.records;
  for (const auto& [k, v] : o.by_kind) by_kind[k] += v;
  for (const auto& [k, v] : o.by_strategy) by_strategy[k] += v;
  for (const auto& [k, v] : o.by_mode) by_mode[k] += v;
  for (const auto& [k, v] : o.by_lang) by_lang[k] += v;
  fallback_unparsed += o.fallback_unparsed;
  fallback_ast_failed += o.fallback_ast_failed;
  degenerate_to_l2r += o.degenerate_to_l2r;
  valid_fim += o.valid_fim;
  valid_fim_ast += o.valid_fim_ast;
  valid_fim_ast_requested += o.valid_fim_ast_requested;
  for (const auto& e : o.errors) {
    if (errors.size() < kMaxErrorMessages) errors.push_back(e);
  }
}

namespace {

std::size_t count_of(const std::map<std::string, std::size_t>& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

}  // namespace

double GenStats::fim_rate() const { return ratio(count_of(by_kind, "fim"), records); }
double GenStats::ast_fraction() const { return ratio(valid_fim_ast, valid_fim); }
double GenStats::ast_requested_fraction() const { return ratio(valid_fim_ast_requested, valid_fim); }
double GenStats::psm_fraction() const { return ratio(count_of(by_mode, "psm"), count_of(by_kind, "fim")); }

double GenStats::single_node_fraction() const {
  const std::size_t single = count_of(by_strategy, "single_node");
  return ratio(single, single + count_of(by_strategy, "aligned_span"));
}

double GenStats::parse_validity_rate() const { return ratio(parse_valid_documents, parsed_documents); }

// ---------------------------------------------------------------------------
// Processing

DocumentProcessor::DocumentProcessor(const GrammarRegistry& registry, const GenerateOptions& options)
    : registry_(&registry), options_(&options), parser_(registry) {}

std::vector<TrainingRecord> DocumentProcessor::process(const RawDocument& raw, GenStats& stats) {
  std::vector<TrainingRecord> out;
  ++stats.documents;
  try {
    if (auto bad = utf8::first_invalid(raw.content)) {
      ++stats.rejected_documents;
      if (stats.errors.size() < kMaxErrorMessages) stats.errors.push_back(InvalidUtf8(raw.path, *bad).what());
      return out;
    }
    stats.bytes += raw.content.size();
    const LanguageId lang = raw.lang.empty() ? registry_->detect(raw.path) : LanguageId(raw.lang);
    const bool is_code = !is_natural_language(lang);
    const SourceDocument doc{raw.path, lang, raw.content};

    std::optional<SyntaxTree> tree;
    if (!is_code) {
      ++stats.natural_language_documents;
    } else if (parser_.supports(lang)) {
      tree = parser_.parse(doc);
      ++stats.parsed_documents;
      if (is_parse_valid(*tree)) ++stats.parse_valid_documents;
    } else {
      ++stats.unsupported_documents;
    }
    const bool valid = tree && is_parse_valid(*tree);

    const auto chunks = chunk_document(doc.content, options_->mix.context_budget);
    out.reserve(chunks.size());
    for (std::size_t k = 0; k < chunks.size(); ++k) {
      const std::string_view text = std::string_view(doc.content).substr(chunks[k].start, chunks[k].size());
      std::optional<SyntaxTree> sub;
      if (tree) sub = tree->restrict_to(chunks[k]);
      const ChunkContext ctx{lang, doc.path, k, is_code, sub ? &*sub : nullptr};
      Rng rng(options_->seed, doc.path, k);
      out.push_back(transform(text, ctx, options_->mix, rng));
      stats.add(out.back(), valid);
    }
    stats.chunks += chunks.size();
  } catch (const std::exception& e) {
    ++stats.failed_documents;
    if (stats.errors.size() < kMaxErrorMessages) stats.errors.push_back(raw.path + ": " + e.what());
    out.clear();
  }
  return out;
}

GenStats generate(DocumentSource& source, const GenerateOptions& options,
                  const GrammarRegistry& registry, const RecordSink& sink) {
  options.mix.validate();
  const unsigned workers = std::max(1u, options.workers);
  const std::size_t batch = std::max<std::size_t>(1, options.batch_per_worker) * workers;

  std::vector<DocumentProcessor> processors;
  processors.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) processors.emplace_back(registry, options);

  GenStats total;
  std::vector<RawDocument> docs;
  std::vector<std::vector<TrainingRecord>> results;
  std::vector<GenStats> doc_stats;
  for (;;) {
    docs.clear();
    while (docs.size() < batch) {
      auto d = source.next();
      if (!d) break;
      docs.push_back(std::move(*d));
    }
    if (docs.empty()) break;

    results.assign(docs.size(), {});
    doc_stats.assign(docs.size(), {});
    std::atomic<std::size_t> next{0};
    auto work = [&](DocumentProcessor& proc) {
      for (std::size_t i = next++; i < docs.size(); i = next++) {
        results[i] = proc.process(docs[i], doc_stats[i]);
      }
    };
    if (workers == 1) {
      work(processors[0]);
    } else {
      std::vector<std::jthread> threads;
      threads.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, std::ref(processors[w]));
    }

    for (std::size_t i = 0; i < docs.size(); ++i) {
      for (const auto& rec : results[i]) sink(rec);
      total.merge(doc_stats[i]);
    }
  }
  return total;
}

}  // namespace fimkit
