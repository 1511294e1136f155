#include "fimkit/syntax.hpp"

#include <dlfcn.h>
#include <tree_sitter/api.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <sstream>
#include <utility>

#include "fimkit/utf8.hpp"

#ifndef FIMKIT_DEFAULT_GRAMMAR_DIR
#define FIMKIT_DEFAULT_GRAMMAR_DIR "grammars"
#endif

namespace fimkit {

bool is_natural_language(const LanguageId& lang) {
  return lang.name == "text" || lang.name == "markdown" || lang.name == "restructuredtext";
}

InvalidUtf8::InvalidUtf8(const std::string& path, std::size_t offset)
    : std::runtime_error(path + ": invalid UTF-8 at byte " + std::to_string(offset)),
      offset_(offset) {}

ParseUnsupported::ParseUnsupported(const LanguageId& lang)
    : std::runtime_error("no grammar registered for language '" + lang.name + "'") {}

SourceDocument SourceDocument::make(std::string path, LanguageId lang, std::string content) {
  if (auto bad = utf8::first_invalid(content)) throw InvalidUtf8(path, *bad);
  return {std::move(path), std::move(lang), std::move(content)};
}

// ---------------------------------------------------------------------------
// SyntaxNode

std::string_view SyntaxNode::kind() const { return tree_->kinds_[tree_->nodes_[id_].kind]; }
bool SyntaxNode::named() const { return tree_->nodes_[id_].named; }
bool SyntaxNode::is_error() const { return tree_->nodes_[id_].error; }
CharSpan SyntaxNode::span() const { return tree_->nodes_[id_].span; }
std::size_t SyntaxNode::depth() const { return tree_->nodes_[id_].depth; }
std::size_t SyntaxNode::child_count() const { return tree_->nodes_[id_].child_count; }

std::optional<SyntaxNode> SyntaxNode::parent() const {
  if (id_ == 0) return std::nullopt;
  return SyntaxNode(tree_, tree_->nodes_[id_].parent);
}

SyntaxNode SyntaxNode::child(std::size_t i) const {
  const auto& n = tree_->nodes_[id_];
  if (i >= n.child_count) throw std::out_of_range("child index out of range");
  return {tree_, static_cast<std::uint32_t>(n.first_child + i)};
}

// ---------------------------------------------------------------------------
// Tree assembly. Nodes are appended breadth-first, so each node's children
// land in one contiguous block.

class TreeAssembler {
 public:
  std::uint16_t intern(std::string_view kind) {
    auto it = kind_ids_.find(std::string(kind));
    if (it != kind_ids_.end()) return it->second;
    auto id = static_cast<std::uint16_t>(tree_.kinds_.size());
    tree_.kinds_.emplace_back(kind);
    kind_ids_.emplace(tree_.kinds_.back(), id);
    return id;
  }

  std::uint32_t add(std::uint16_t kind, bool named, bool error, CharSpan span,
                    std::uint32_t parent) {
    SyntaxTree::Node n;
    n.kind = kind;
    n.named = named;
    n.error = error;
    n.span = span;
    n.parent = parent;
    n.depth = tree_.nodes_.empty() ? 0 : tree_.nodes_[parent].depth + 1;
    tree_.nodes_.push_back(n);
    return static_cast<std::uint32_t>(tree_.nodes_.size() - 1);
  }

  void set_children(std::uint32_t parent, std::uint32_t first, std::uint32_t count) {
    tree_.nodes_[parent].first_child = first;
    tree_.nodes_[parent].child_count = count;
  }

  std::uint32_t size() const { return static_cast<std::uint32_t>(tree_.nodes_.size()); }
  const SyntaxTree::Node& at(std::uint32_t id) const { return tree_.nodes_[id]; }

  SyntaxTree finish(bool has_error) {
    tree_.has_error_ = has_error;
    tree_.nodes_.shrink_to_fit();
    return std::move(tree_);
  }

 private:
  SyntaxTree tree_;
  std::unordered_map<std::string, std::uint16_t> kind_ids_;
};

namespace {

void check_children(const NodeSpec& spec) {
  std::size_t cursor = spec.span.start;
  if (spec.span.start > spec.span.end) throw std::invalid_argument("node span is inverted");
  for (const auto& c : spec.children) {
    if (c.span.start > c.span.end) throw std::invalid_argument("node span is inverted");
    if (c.span.start < cursor || c.span.end > spec.span.end) {
      throw std::invalid_argument("child span of '" + c.kind + "' escapes its parent or overlaps a sibling");
    }
    cursor = c.span.end;
  }
}

}  // namespace

SyntaxTree SyntaxTree::from_spec(const NodeSpec& root, bool has_error) {
  TreeAssembler out;
  std::deque<std::pair<std::uint32_t, const NodeSpec*>> queue;
  queue.emplace_back(out.add(out.intern(root.kind), root.named, false, root.span, 0), &root);
  while (!queue.empty()) {
    auto [id, spec] = queue.front();
    queue.pop_front();
    check_children(*spec);
    const std::uint32_t first = out.size();
    for (const auto& c : spec->children) {
      queue.emplace_back(out.add(out.intern(c.kind), c.named, false, c.span, id), &c);
    }
    out.set_children(id, first, static_cast<std::uint32_t>(spec->children.size()));
  }
  return out.finish(has_error);
}

NodeSpec SyntaxTree::to_spec() const {
  auto build = [this](auto&& self, SyntaxNode n) -> NodeSpec {
    NodeSpec s{std::string(n.kind()), n.named(), n.span(), {}};
    s.children.reserve(n.child_count());
    for (auto c : n.children()) s.children.push_back(self(self, c));
    return s;
  };
  return build(build, root());
}

SyntaxTree SyntaxTree::restrict_to(CharSpan window) const {
  if (window == root().span()) return *this;

  // Maximal nodes fully inside the window, in document order.
  std::vector<std::uint32_t> tops;
  auto collect = [&](auto&& self, std::uint32_t id) -> void {
    const auto& n = nodes_[id];
    for (std::uint32_t c = n.first_child; c < n.first_child + n.child_count; ++c) {
      const CharSpan s = nodes_[c].span;
      if (window.contains(s)) {
        tops.push_back(c);
      } else if (s.start < window.end && s.end > window.start) {
        self(self, c);
      }
    }
  };
  collect(collect, 0);

  TreeAssembler out;
  auto rebase = [&](CharSpan s) { return CharSpan{s.start - window.start, s.end - window.start}; };
  auto copy_kind = [&](std::uint32_t id) { return out.intern(kinds_[nodes_[id].kind]); };

  const std::uint32_t root_id =
      out.add(copy_kind(0), nodes_[0].named, nodes_[0].error, {0, window.size()}, 0);
  std::deque<std::pair<std::uint32_t, std::uint32_t>> queue;  // (new id, old id)
  const std::uint32_t first_top = out.size();
  for (auto old : tops) {
    const auto& n = nodes_[old];
    queue.emplace_back(out.add(copy_kind(old), n.named, n.error, rebase(n.span), root_id), old);
  }
  out.set_children(root_id, first_top, static_cast<std::uint32_t>(tops.size()));
  while (!queue.empty()) {
    auto [id, old] = queue.front();
    queue.pop_front();
    const auto& n = nodes_[old];
    const std::uint32_t first = out.size();
    for (std::uint32_t c = n.first_child; c < n.first_child + n.child_count; ++c) {
      const auto& cn = nodes_[c];
      queue.emplace_back(out.add(copy_kind(c), cn.named, cn.error, rebase(cn.span), id), c);
    }
    out.set_children(id, first, n.child_count);
  }
  return out.finish(has_error_);
}

bool is_parse_valid(const SyntaxTree& tree) { return !tree.has_error(); }

std::vector<SyntaxNode> eligible_nodes(const SyntaxTree& tree) {
  std::vector<SyntaxNode> out;
  std::vector<SyntaxNode> stack;
  const auto push_children = [&stack](SyntaxNode n) {
    for (std::size_t i = n.child_count(); i-- > 0;) stack.push_back(n.child(i));
  };
  push_children(tree.root());
  while (!stack.empty()) {
    SyntaxNode n = stack.back();
    stack.pop_back();
    if (n.named() && !n.span().empty()) out.push_back(n);
    push_children(n);
  }
  return out;
}

SyntaxNode lowest_subtree_containing(const SyntaxTree& tree, CharSpan span) {
  SyntaxNode node = tree.root();
  for (;;) {
    // Child ends are non-decreasing, so the first candidate is the first
    // child whose end reaches span.end.
    std::size_t lo = 0, hi = node.child_count();
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (node.child(mid).span().end < span.end) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    std::optional<SyntaxNode> next;
    for (std::size_t i = lo; i < node.child_count() && node.child(i).span().start <= span.start; ++i) {
      if (node.child(i).span().contains(span)) {
        next = node.child(i);
        break;
      }
    }
    if (!next) return node;
    node = *next;
  }
}

// ---------------------------------------------------------------------------
// Grammar registry

std::vector<GrammarInfo> default_grammar_table() {
  auto g = [](std::string lang, std::string module, std::vector<std::string> exts) {
    return GrammarInfo{std::move(lang), "tree-sitter-" + module + ".so", "tree_sitter_" + module,
                       std::move(exts)};
  };
  return {
      g("python", "python", {"py", "pyi", "pyw"}),
      g("rust", "rust", {"rs"}),
      g("java", "java", {"java"}),
      g("cpp", "cpp", {"cc", "cpp", "cxx", "c++", "hh", "hpp", "hxx", "h++", "h", "ipp", "tpp"}),
      g("c", "c", {"c"}),
      g("typescript", "typescript", {"ts", "mts", "cts"}),
      g("tsx", "tsx", {"tsx"}),
      g("go", "go", {"go"}),
      g("ruby", "ruby", {"rb", "rake", "gemspec"}),
      g("csharp", "c_sharp", {"cs"}),
      g("javascript", "javascript", {"js", "mjs", "cjs", "jsx"}),
      g("kotlin", "kotlin", {"kt", "kts"}),
      g("php", "php", {"php"}),
      g("scala", "scala", {"scala", "sc"}),
  };
}

std::vector<GrammarInfo> load_grammar_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read grammar table " + file.string());
  std::vector<GrammarInfo> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() != 4) {
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) +
                               ": expected 4 tab-separated fields");
    }
    GrammarInfo info{fields[0], fields[1], fields[2], {}};
    std::stringstream es(fields[3]);
    while (std::getline(es, f, ',')) {
      if (!f.empty()) info.extensions.push_back(f);
    }
    out.push_back(std::move(info));
  }
  return out;
}

namespace {

std::mutex default_dir_mu;
std::optional<std::filesystem::path> default_dir_override;

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::filesystem::path default_grammar_directory() {
  if (const char* env = std::getenv("FIMKIT_GRAMMAR_DIR"); env && *env) return env;
  std::lock_guard lock(default_dir_mu);
  if (default_dir_override) return *default_dir_override;
  return FIMKIT_DEFAULT_GRAMMAR_DIR;
}

void set_default_grammar_directory(std::filesystem::path dir) {
  std::lock_guard lock(default_dir_mu);
  default_dir_override = std::move(dir);
}

struct GrammarRegistry::Loaded {
  void* handle = nullptr;
  const TSLanguage* language = nullptr;

  ~Loaded() {
    if (handle) dlclose(handle);
  }
};

namespace {

std::vector<GrammarInfo> table_for(const std::filesystem::path& dir) {
  const auto file = dir / "languages.tsv";
  std::error_code ec;
  if (std::filesystem::exists(file, ec)) return load_grammar_table(file);
  return default_grammar_table();
}

}  // namespace

GrammarRegistry::GrammarRegistry(std::filesystem::path dir)
    : GrammarRegistry(dir, table_for(dir)) {}

GrammarRegistry::GrammarRegistry(std::filesystem::path dir, std::vector<GrammarInfo> table)
    : dir_(std::move(dir)), table_(std::move(table)) {
  for (std::size_t i = 0; i < table_.size(); ++i) {
    by_lang_.emplace(table_[i].lang, i);
    for (const auto& e : table_[i].extensions) by_ext_.emplace(lowercase(e), i);
  }
}

GrammarRegistry::~GrammarRegistry() = default;

const TSLanguage* GrammarRegistry::language(const LanguageId& lang) const {
  auto it = by_lang_.find(lang.name);
  if (it == by_lang_.end()) return nullptr;
  std::lock_guard lock(mu_);
  auto& slot = loaded_[lang.name];
  if (!slot) {
    slot = std::make_unique<Loaded>();
    const auto& info = table_[it->second];
    const auto path = dir_ / info.library;
    slot->handle = dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL);
    if (slot->handle) {
      using LanguageFn = const TSLanguage* (*)();
      if (auto fn = reinterpret_cast<LanguageFn>(dlsym(slot->handle, info.symbol.c_str()))) {
        const TSLanguage* l = fn();
        const auto abi = ts_language_abi_version(l);
        if (abi >= TREE_SITTER_MIN_COMPATIBLE_LANGUAGE_VERSION && abi <= TREE_SITTER_LANGUAGE_VERSION) {
          slot->language = l;
        }
      }
    }
  }
  return slot->language;
}

bool GrammarRegistry::supports(const LanguageId& lang) const { return language(lang) != nullptr; }

LanguageId GrammarRegistry::detect(const std::filesystem::path& path) const {
  std::string ext = path.extension().string();
  if (ext.empty()) return "unknown";
  ext = lowercase(ext.substr(1));
  if (auto it = by_ext_.find(ext); it != by_ext_.end()) return table_[it->second].lang;
  if (ext == "txt") return "text";
  if (ext == "md" || ext == "markdown") return "markdown";
  if (ext == "rst") return "restructuredtext";
  return "unknown";
}

// ---------------------------------------------------------------------------
// Parser

Parser::Parser(const GrammarRegistry& registry) : registry_(&registry), parser_(ts_parser_new()) {}

Parser::~Parser() {
  if (parser_) ts_parser_delete(parser_);
}

Parser::Parser(Parser&& other) noexcept
    : registry_(other.registry_), parser_(std::exchange(other.parser_, nullptr)) {}

Parser& Parser::operator=(Parser&& other) noexcept {
  if (this != &other) {
    if (parser_) ts_parser_delete(parser_);
    registry_ = other.registry_;
    parser_ = std::exchange(other.parser_, nullptr);
  }
  return *this;
}

namespace {

struct TreeDeleter {
  void operator()(TSTree* t) const { ts_tree_delete(t); }
};

SyntaxTree convert(const TSLanguage* language, TSNode ts_root, std::size_t length) {
  TreeAssembler out;
  // Kind ids cached per grammar symbol.
  std::vector<int> symbol_kind(ts_language_symbol_count(language) + 1, -1);
  auto kind_of = [&](TSNode n) -> std::uint16_t {
    const TSSymbol sym = ts_node_symbol(n);
    const bool missing = ts_node_is_missing(n);
    if (!missing && sym < symbol_kind.size() && symbol_kind[sym] >= 0) {
      return static_cast<std::uint16_t>(symbol_kind[sym]);
    }
    const std::uint16_t id = out.intern(ts_node_type(n));
    if (!missing && sym < symbol_kind.size()) symbol_kind[sym] = id;
    return id;
  };

  const bool has_error = ts_node_has_error(ts_root);
  out.add(kind_of(ts_root), true, ts_node_is_error(ts_root), {0, length}, 0);

  std::deque<std::pair<std::uint32_t, TSNode>> queue;
  queue.emplace_back(0, ts_root);
  TSTreeCursor cursor = ts_tree_cursor_new(ts_root);
  while (!queue.empty()) {
    auto [id, node] = queue.front();
    queue.pop_front();
    const CharSpan parent = out.at(id).span;
    const std::uint32_t first = out.size();
    std::uint32_t count = 0;
    std::size_t prev_end = parent.start;
    ts_tree_cursor_reset(&cursor, node);
    if (ts_tree_cursor_goto_first_child(&cursor)) {
      do {
        TSNode c = ts_tree_cursor_current_node(&cursor);
        // Clamp into the parent and after the previous sibling so the span
        // invariants hold even for odd error-recovery output.
        std::size_t s = ts_node_start_byte(c);
        std::size_t e = ts_node_end_byte(c);
        s = std::clamp(s, prev_end, parent.end);
        e = std::clamp(e, s, parent.end);
        prev_end = e;
        const bool error = ts_node_is_error(c) || ts_node_is_missing(c);
        queue.emplace_back(out.add(kind_of(c), ts_node_is_named(c), error, {s, e}, id), c);
        ++count;
      } while (ts_tree_cursor_goto_next_sibling(&cursor));
    }
    out.set_children(id, first, count);
  }
  ts_tree_cursor_delete(&cursor);
  return out.finish(has_error);
}

}  // namespace

SyntaxTree Parser::parse(const SourceDocument& doc) {
  const TSLanguage* language = registry_->language(doc.lang);
  if (!language || !ts_parser_set_language(parser_, language)) throw ParseUnsupported(doc.lang);
  std::unique_ptr<TSTree, TreeDeleter> tree(
      ts_parser_parse_string(parser_, nullptr, doc.content.data(),
                             static_cast<std::uint32_t>(doc.content.size())));
  if (!tree) throw std::runtime_error("parser returned no tree for " + doc.path);
  return convert(language, ts_tree_root_node(tree.get()), doc.content.size());
}

std::optional<SyntaxTree> Parser::try_parse(const SourceDocument& doc) {
  if (!registry_->supports(doc.lang)) return std::nullopt;
  return parse(doc);
}

}  // namespace fimkit
