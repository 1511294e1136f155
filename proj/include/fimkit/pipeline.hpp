#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fimkit/fimgen.hpp"
#include "fimkit/syntax.hpp"

namespace fimkit {

/// A corpus entry before validation. An empty `lang` is detected from the
/// path extension.
struct RawDocument {
  std::string path;
  std::string lang;
  std::string content;
};

class DocumentSource {
 public:
  virtual ~DocumentSource() = default;
  virtual std::optional<RawDocument> next() = 0;
};

// Regular files under a directory, recursively, in lexicographic order of
// their relative paths. Paths reported relative to the root.
class DirectorySource : public DocumentSource {
 public:
  explicit DirectorySource(const std::filesystem::path& root);
  std::optional<RawDocument> next() override;
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::filesystem::path root_;
  std::vector<std::filesystem::path> files_;
  std::size_t cursor_ = 0;
};

// One JSON object {path, lang, content} per line; lang may be omitted.
class JsonlSource : public DocumentSource {
 public:
  explicit JsonlSource(const std::filesystem::path& file);
  std::optional<RawDocument> next() override;

 private:
  std::filesystem::path file_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

class VectorSource : public DocumentSource {
 public:
  explicit VectorSource(std::vector<RawDocument> docs) : docs_(std::move(docs)) {}
  std::optional<RawDocument> next() override;

 private:
  std::vector<RawDocument> docs_;
  std::size_t cursor_ = 0;
};

/// A directory or a .jsonl file. Throws std::runtime_error if unreadable.
std::unique_ptr<DocumentSource> open_corpus(const std::filesystem::path& path);

struct GenerateOptions {
  MixConfig mix;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// Documents read ahead per worker before results are flushed in order.
  std::size_t batch_per_worker = 64;
};

struct GenStats {
  std::size_t documents = 0;
  std::size_t rejected_documents = 0;  // invalid UTF-8
  std::size_t natural_language_documents = 0;
  std::size_t unsupported_documents = 0;
  std::size_t parsed_documents = 0;
  std::size_t parse_valid_documents = 0;
  std::size_t failed_documents = 0;
  std::size_t bytes = 0;
  std::size_t chunks = 0;
  std::size_t records = 0;

  std::map<std::string, std::size_t> by_kind;
  std::map<std::string, std::size_t> by_strategy;  // FIM records only
  std::map<std::string, std::size_t> by_mode;      // FIM records only
  std::map<std::string, std::size_t> by_lang;

  std::size_t fallback_unparsed = 0;    // rand_char because the parse was unusable
  std::size_t fallback_ast_failed = 0;  // rand_char because AST masking failed
  std::size_t degenerate_to_l2r = 0;    // FIM drawn, no mask possible

  // FIM records from chunks of parse-valid documents.
  std::size_t valid_fim = 0;
  std::size_t valid_fim_ast = 0;
  std::size_t valid_fim_ast_requested = 0;

  std::vector<std::string> errors;  // first few per-file failure messages

  void add(const TrainingRecord& rec, bool parse_valid);
  void merge(const GenStats& other);

  double fim_rate() const;
  /// AST-FIM share of FIM records over parse-valid input.
  double ast_fraction() const;
  /// Same, counting only the requested AST/Rand split (before fallback).
  double ast_requested_fraction() const;
  double psm_fraction() const;
  double single_node_fraction() const;
  double parse_validity_rate() const;
};

// Turns one document into its records. Owns a parser, so one instance per
// thread.
class DocumentProcessor {
 public:
  DocumentProcessor(const GrammarRegistry& registry, const GenerateOptions& options);

  /// Never throws for bad input; failures are counted in `stats`.
  std::vector<TrainingRecord> process(const RawDocument& raw, GenStats& stats);

 private:
  const GrammarRegistry* registry_;
  const GenerateOptions* options_;
  Parser parser_;
};

using RecordSink = std::function<void(const TrainingRecord&)>;

/// Streams every record of the corpus to `sink` in corpus order. Output is
/// identical for any worker count.
GenStats generate(DocumentSource& source, const GenerateOptions& options,
                  const GrammarRegistry& registry, const RecordSink& sink);

}  // namespace fimkit
