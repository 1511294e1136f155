#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

struct TSLanguage;
struct TSParser;

namespace fimkit {

/// Half-open byte range [start, end) into a UTF-8 document.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return start == end; }
  bool contains(CharSpan other) const { return start <= other.start && other.end <= end; }
  friend bool operator==(CharSpan, CharSpan) = default;
};

struct LanguageId {
  std::string name;

  LanguageId() = default;
  LanguageId(std::string n) : name(std::move(n)) {}
  LanguageId(const char* n) : name(n) {}
  friend bool operator==(const LanguageId&, const LanguageId&) = default;
  friend auto operator<=>(const LanguageId&, const LanguageId&) = default;
};

/// Prose languages are never FIM-transformed.
bool is_natural_language(const LanguageId& lang);

class InvalidUtf8 : public std::runtime_error {
 public:
  InvalidUtf8(const std::string& path, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ParseUnsupported : public std::runtime_error {
 public:
  explicit ParseUnsupported(const LanguageId& lang);
};

struct SourceDocument {
  std::string path;
  LanguageId lang;
  std::string content;

  /// Throws InvalidUtf8 when `content` is not well-formed.
  static SourceDocument make(std::string path, LanguageId lang, std::string content);
};

/// Owned, value-semantic description of a node and its subtree. Used to build
/// trees by hand and to export them.
struct NodeSpec {
  std::string kind;
  bool named = true;
  CharSpan span;
  std::vector<NodeSpec> children;
};

class SyntaxTree;

// Lightweight handle into a SyntaxTree; valid while the tree is alive.
class SyntaxNode {
 public:
  class ChildIterator;
  class ChildRange;

  SyntaxNode(const SyntaxTree* tree, std::uint32_t id) : tree_(tree), id_(id) {}

  std::uint32_t id() const { return id_; }
  std::string_view kind() const;
  bool named() const;
  /// Error or missing node inserted by error recovery.
  bool is_error() const;
  CharSpan span() const;
  std::size_t depth() const;
  bool is_root() const { return id_ == 0; }
  std::optional<SyntaxNode> parent() const;

  std::size_t child_count() const;
  bool is_leaf() const { return child_count() == 0; }
  SyntaxNode child(std::size_t i) const;
  ChildRange children() const;

  friend bool operator==(const SyntaxNode& a, const SyntaxNode& b) {
    return a.tree_ == b.tree_ && a.id_ == b.id_;
  }

 private:
  const SyntaxTree* tree_;
  std::uint32_t id_;
};

class SyntaxNode::ChildIterator {
 public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = SyntaxNode;
  using difference_type = std::ptrdiff_t;
  using pointer = void;
  using reference = SyntaxNode;

  ChildIterator() = default;
  ChildIterator(const SyntaxTree* tree, std::uint32_t id) : tree_(tree), id_(id) {}
  SyntaxNode operator*() const { return {tree_, id_}; }
  ChildIterator& operator++() {
    ++id_;
    return *this;
  }
  ChildIterator operator++(int) {
    auto copy = *this;
    ++id_;
    return copy;
  }
  friend bool operator==(const ChildIterator& a, const ChildIterator& b) { return a.id_ == b.id_; }

 private:
  const SyntaxTree* tree_ = nullptr;
  std::uint32_t id_ = 0;
};

class SyntaxNode::ChildRange {
 public:
  ChildRange(ChildIterator b, ChildIterator e, std::size_t n) : begin_(b), end_(e), size_(n) {}
  ChildIterator begin() const { return begin_; }
  ChildIterator end() const { return end_; }
  std::size_t size() const { return size_; }

 private:
  ChildIterator begin_, end_;
  std::size_t size_;
};

/// Immutable concrete syntax tree. Nodes are stored so that the children of
/// every node are contiguous; node 0 is the root.
class SyntaxTree {
 public:
  /// Builds a tree from a nested description. Throws std::invalid_argument
  /// when child spans escape their parent or overlap each other.
  static SyntaxTree from_spec(const NodeSpec& root, bool has_error = false);

  SyntaxNode root() const { return {this, 0}; }
  SyntaxNode node(std::uint32_t id) const { return {this, id}; }
  std::size_t node_count() const { return nodes_.size(); }
  bool has_error() const { return has_error_; }

  NodeSpec to_spec() const;

  /// The forest of nodes lying entirely inside `window`, re-rooted under a
  /// node spanning the window, with offsets rebased to window.start.
  SyntaxTree restrict_to(CharSpan window) const;

 private:
  friend class SyntaxNode;
  friend class TreeAssembler;

  struct Node {
    CharSpan span;
    std::uint32_t parent = 0;
    std::uint32_t first_child = 0;
    std::uint32_t child_count = 0;
    std::uint32_t depth = 0;
    std::uint16_t kind = 0;
    bool named = true;
    bool error = false;
  };

  std::vector<Node> nodes_;
  std::vector<std::string> kinds_;
  bool has_error_ = false;
};

inline SyntaxNode::ChildRange SyntaxNode::children() const {
  const auto& n = tree_->nodes_[id_];
  return {ChildIterator(tree_, n.first_child), ChildIterator(tree_, n.first_child + n.child_count),
          n.child_count};
}

/// True iff the parser produced no error or missing nodes.
bool is_parse_valid(const SyntaxTree& tree);

/// Named, non-empty, non-root nodes in pre-order.
std::vector<SyntaxNode> eligible_nodes(const SyntaxTree& tree);

/// Deepest node whose span contains `span`. The root always qualifies.
SyntaxNode lowest_subtree_containing(const SyntaxTree& tree, CharSpan span);

// ---------------------------------------------------------------------------
// Grammar registry and parser adapter

struct GrammarInfo {
  std::string lang;        // LanguageId name
  std::string library;     // file name inside the grammar directory
  std::string symbol;      // exported `const TSLanguage *(void)` function
  std::vector<std::string> extensions;  // lowercase, without the dot
};

/// The built-in table: the twelve benchmark languages plus C and TSX.
std::vector<GrammarInfo> default_grammar_table();

/// Reads a tab-separated table: lang, library, symbol, comma-separated
/// extensions. Blank lines and lines starting with '#' are skipped.
std::vector<GrammarInfo> load_grammar_table(const std::filesystem::path& file);

/// Process-wide default for the grammar directory. Resolution order:
/// FIMKIT_GRAMMAR_DIR, then set_default_grammar_directory(), then the
/// directory the build wrote the grammars to.
std::filesystem::path default_grammar_directory();
void set_default_grammar_directory(std::filesystem::path dir);

// Maps languages to compiled grammar modules, loading each on first use.
// Thread-safe; must outlive every Parser built from it.
class GrammarRegistry {
 public:
  /// Uses `dir/languages.tsv` when it exists, the built-in table otherwise.
  explicit GrammarRegistry(std::filesystem::path dir = default_grammar_directory());
  GrammarRegistry(std::filesystem::path dir, std::vector<GrammarInfo> table);
  ~GrammarRegistry();

  GrammarRegistry(const GrammarRegistry&) = delete;
  GrammarRegistry& operator=(const GrammarRegistry&) = delete;

  const std::filesystem::path& directory() const { return dir_; }
  const std::vector<GrammarInfo>& table() const { return table_; }

  /// Registered and its module loads.
  bool supports(const LanguageId& lang) const;

  /// nullptr when unregistered or unloadable.
  const TSLanguage* language(const LanguageId& lang) const;

  /// Language for a path by extension. Prose extensions map to "text" or
  /// "markdown"; anything else unrecognised maps to "unknown".
  LanguageId detect(const std::filesystem::path& path) const;

 private:
  struct Loaded;

  std::filesystem::path dir_;
  std::vector<GrammarInfo> table_;
  std::unordered_map<std::string, std::size_t> by_lang_;
  std::unordered_map<std::string, std::size_t> by_ext_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::unique_ptr<Loaded>> loaded_;
};

// Single-threaded; create one per worker.
class Parser {
 public:
  explicit Parser(const GrammarRegistry& registry);
  ~Parser();
  Parser(Parser&&) noexcept;
  Parser& operator=(Parser&&) noexcept;

  bool supports(const LanguageId& lang) const { return registry_->supports(lang); }

  /// Throws ParseUnsupported when no grammar is registered for doc.lang.
  SyntaxTree parse(const SourceDocument& doc);

  /// nullopt instead of ParseUnsupported.
  std::optional<SyntaxTree> try_parse(const SourceDocument& doc);

 private:
  const GrammarRegistry* registry_;
  TSParser* parser_;
};

}  // namespace fimkit
