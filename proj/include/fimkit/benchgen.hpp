#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fimkit/fimgen.hpp"
#include "fimkit/syntax.hpp"

namespace fimkit {

/// Lines of `text`, each keeping its trailing '\n' (the last may lack one).
std::vector<std::string_view> split_lines(std::string_view text);

/// 0-based half-open range of line indices.
struct LineRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(LineRange, LineRange) = default;
};

enum class HunkKind { insert, replace, remove };

std::string_view to_string(HunkKind k);

struct DiffHunk {
  HunkKind kind = HunkKind::insert;
  LineRange before;
  LineRange after;

  friend bool operator==(const DiffHunk&, const DiffHunk&) = default;
};

/// Minimal line-level edit script (Myers, bisection variant), with each
/// maximal run of deleted and inserted lines between two unchanged lines
/// reported as one hunk: insert, remove, or replace when it has both.
std::vector<DiffHunk> line_diff(std::string_view before, std::string_view after);

/// Rebuilds the after text from `before` and the hunk script; changed lines
/// are taken from `after`. Throws std::invalid_argument on unordered or
/// out-of-range hunks.
std::string apply_hunks(std::string_view before, const std::vector<DiffHunk>& hunks,
                        std::string_view after);

struct CommitFilePair {
  std::string repo;
  std::string sha;
  std::string path;
  std::string lang;
  std::string before;
  std::string after;
  std::string timestamp;  // ISO-8601
};

enum class BenchSplit { add, edit };

std::string_view to_string(BenchSplit s);
BenchSplit parse_bench_split(std::string_view name);

struct BenchExample {
  BenchSplit split = BenchSplit::add;
  std::string prefix;
  std::string middle;
  std::string suffix;
  std::optional<std::string> original;  // Edit only
  std::string repo;
  std::string sha;
  std::string path;
  std::string lang;
  std::size_t hunk_index = 0;

  /// repo@sha:path#hunk
  std::string id() const;
};

class HunkKindMismatch : public std::invalid_argument {
 public:
  HunkKindMismatch(HunkKind expected, HunkKind got);
};

struct ContextOptions {
  /// Lines of context kept on each side of the hunk; the full file when
  /// unset. The middle is never truncated.
  std::optional<std::size_t> line_radius;
};

/// Add example from an insert hunk. Context comes from the after text, so
/// other hunks of the same commit appear in their updated state.
BenchExample make_add_example(const CommitFilePair& pair, const DiffHunk& hunk,
                              const ContextOptions& context = {});
/// Edit example from a replace hunk; `original` holds the removed lines.
BenchExample make_edit_example(const CommitFilePair& pair, const DiffHunk& hunk,
                               const ContextOptions& context = {});

struct ConflictMarkers {
  std::string original = "<<<<<<< ORIGINAL\n";
  std::string separator = "=======\n";
  std::string updated = ">>>>>>> UPDATED\n";
};

/// Prefix and suffix as the model sees them. For Edit examples the original
/// segment is wrapped in conflict markers; Add examples pass through.
struct PromptContext {
  std::string prefix;
  std::string suffix;
};
PromptContext conflict_context(const BenchExample& ex, const ConflictMarkers& markers = {});

/// pre ‖ prefix ‖ suf ‖ suffix ‖ mid over conflict_context(); the target
/// continuation is ex.middle.
std::string render_conflict_prompt(const BenchExample& ex, const SentinelSet& s = {},
                                   const ConflictMarkers& markers = {});

struct BenchFilters {
  std::set<std::string> langs;  // empty: all
  std::size_t min_middle_chars = 1;
  std::optional<std::size_t> max_middle_chars;
  std::optional<std::string> since;  // compared on the YYYY-MM-DD prefix, inclusive
  std::optional<std::string> until;
};

struct BenchStats {
  std::size_t pairs = 0;
  std::size_t hunks = 0;
  std::size_t skipped_deletions = 0;
  std::size_t filtered_language = 0;
  std::size_t filtered_date = 0;
  std::size_t filtered_length = 0;
  std::size_t failed_pairs = 0;
  std::map<std::string, std::map<std::string, std::size_t>> counts;  // lang -> split -> n
  std::vector<std::string> log;  // skip and failure messages

  std::size_t total(BenchSplit split) const;
  /// Languages as columns, ordered by descending example count.
  std::string language_table() const;
};

struct BenchResult {
  std::vector<BenchExample> examples;  // ordered by (repo, sha, path, hunk)
  BenchStats stats;
};

/// Per-pair failures are logged in the stats and skipped.
BenchResult build_benchmark(const std::vector<CommitFilePair>& pairs, const BenchFilters& filters = {},
                            const ContextOptions& context = {}, unsigned workers = 1);

// Ingestion

struct GitRange {
  // YYYY-MM-DD, inclusive, against the committer date
  std::optional<std::string> since;
  std::optional<std::string> until;
  std::optional<std::string> revisions;  // e.g. "v1.0..HEAD"
};

/// Modified files of every non-merge commit in range, oldest first, read
/// through the git CLI. `lang` comes from `registry` by extension.
std::vector<CommitFilePair> read_git_history(const std::filesystem::path& repo, const GitRange& range,
                                             const GrammarRegistry& registry);

/// `path` itself when it is a repository, otherwise its immediate
/// subdirectories that are.
std::vector<std::filesystem::path> find_repositories(const std::filesystem::path& path);

/// `dir/before/<p>` and `dir/after/<p>` pairs with differing content.
std::vector<CommitFilePair> read_pair_directory(const std::filesystem::path& dir,
                                                const GrammarRegistry& registry);

}  // namespace fimkit
