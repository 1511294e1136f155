#include "fimkit/masking.hpp"

#include <algorithm>
#include <numeric>

#include "fimkit/utf8.hpp"

namespace fimkit {

std::string_view to_string(MaskStrategy s) {
  switch (s) {
    case MaskStrategy::single_node:
      return "single_node";
    case MaskStrategy::aligned_span:
      return "aligned_span";
    case MaskStrategy::rand_char:
      return "rand_char";
  }
  return "unknown";
}

MaskStrategy parse_mask_strategy(std::string_view name) {
  if (name == "single_node") return MaskStrategy::single_node;
  if (name == "aligned_span") return MaskStrategy::aligned_span;
  if (name == "rand_char") return MaskStrategy::rand_char;
  throw std::invalid_argument("unknown mask strategy '" + std::string(name) + "'");
}

void MaskConfig::validate() const {
  if (!(single_node_fraction >= 0.0 && single_node_fraction <= 1.0)) {
    throw std::invalid_argument("single_node_fraction must lie in [0, 1]");
  }
  if (max_resample_attempts < 1) throw std::invalid_argument("max_resample_attempts must be positive");
}

MaskSpan single_node_mask(const SyntaxTree& tree, Rng& rng) {
  const auto nodes = eligible_nodes(tree);
  if (nodes.empty()) throw NoEligibleNode();
  std::vector<std::size_t> cumulative(nodes.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    total += nodes[i].span().size();
    cumulative[i] = total;
  }
  const std::size_t r = rng.below(total);
  const auto idx = static_cast<std::size_t>(
      std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
  const SyntaxNode picked = nodes[idx];
  return {picked.span(), MaskStrategy::single_node, {std::string(picked.kind())}};
}

double iou(CharSpan a, CharSpan b) {
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.end, b.end);
  const std::size_t inter = hi > lo ? hi - lo : 0;
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

struct Ratio {
  std::size_t inter = 0;
  std::size_t uni = 0;

  // Exact comparison; uni == 0 counts as zero.
  bool greater_than(const Ratio& o) const {
    using wide = unsigned __int128;
    return static_cast<wide>(inter) * o.uni > static_cast<wide>(o.inter) * uni;
  }
};

Ratio overlap(CharSpan a, CharSpan b) {
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.end, b.end);
  const std::size_t inter = hi > lo ? hi - lo : 0;
  return {inter, a.size() + b.size() - inter};
}

}  // namespace

// For a fixed right end, moving the left end towards target.start from
// either side strictly improves an overlapping window, so every optimum
// starts at the last child start <= target.start or the first one >=
// target.start (several indices when zero-width children share a start).
// The right end is symmetric. Only those candidates need evaluating.
ChildWindow best_child_window(std::span<const CharSpan> children, CharSpan target) {
  if (children.empty()) throw NoChildren();
  const std::size_t n = children.size();

  std::optional<std::size_t> start_below, start_above, end_above, end_below;
  for (const auto& c : children) {
    if (c.start <= target.start) start_below = std::max(start_below.value_or(0), c.start);
    if (c.start >= target.start) start_above = std::min(start_above.value_or(c.start), c.start);
    if (c.end >= target.end) end_above = std::min(end_above.value_or(c.end), c.end);
    if (c.end <= target.end) end_below = std::max(end_below.value_or(0), c.end);
  }
  std::vector<std::size_t> firsts, lasts;
  for (std::size_t i = 0; i < n; ++i) {
    if (children[i].start == start_below || children[i].start == start_above) firsts.push_back(i);
    if (children[i].end == end_above || children[i].end == end_below) lasts.push_back(i);
  }

  ChildWindow best{0, 0, children[0]};
  Ratio best_ratio = overlap(children[0], target);
  bool found = false;
  for (std::size_t i : firsts) {
    for (std::size_t j : lasts) {
      if (j < i) continue;
      const CharSpan hull{children[i].start, children[j].end};
      const Ratio r = overlap(hull, target);
      if (r.inter == 0) continue;
      const bool better = !found || r.greater_than(best_ratio) ||
                          (!best_ratio.greater_than(r) &&
                           (i < best.first || (i == best.first && j < best.last)));
      if (better) {
        best = {i, j, hull};
        best_ratio = r;
        found = true;
      }
    }
  }
  return best;
}

ChildWindow best_child_window(const SyntaxNode& parent, CharSpan target) {
  std::vector<CharSpan> spans;
  spans.reserve(parent.child_count());
  for (auto c : parent.children()) spans.push_back(c.span());
  return best_child_window(spans, target);
}

namespace {

// Two distinct boundary positions drawn uniformly, returned in order. This is
// the distribution of two independent uniform draws conditioned on being
// different, without the rejection loop.
CharSpan distinct_boundaries(const utf8::BoundaryIndex& index, Rng& rng) {
  const std::size_t positions = index.positions();
  std::size_t a = rng.below(positions);
  std::size_t b = rng.below(positions - 1);
  if (b >= a) ++b;
  if (a > b) std::swap(a, b);
  return {index.offset(a), index.offset(b)};
}

}  // namespace

MaskSpan aligned_span_mask(const SyntaxTree& tree, std::string_view content, Rng& rng,
                           const MaskConfig& cfg) {
  const utf8::BoundaryIndex index(content);
  if (index.positions() < 2) throw MaskDegenerate("empty document");
  const SyntaxNode root = tree.root();

  for (int attempt = 0; attempt < cfg.max_resample_attempts; ++attempt) {
    const CharSpan target = distinct_boundaries(index, rng);
    const SyntaxNode subtree = lowest_subtree_containing(tree, target);
    if (subtree.is_leaf()) {
      if (subtree.is_root() || subtree.span().empty()) continue;
      return {subtree.span(), MaskStrategy::aligned_span, {std::string(subtree.kind())}};
    }
    const ChildWindow w = best_child_window(subtree, target);
    const bool whole_root =
        (subtree.is_root() && w.first == 0 && w.last + 1 == subtree.child_count()) ||
        w.span == root.span();
    if (whole_root || w.span.empty()) continue;
    MaskSpan out{w.span, MaskStrategy::aligned_span, {}};
    out.node_kinds.reserve(w.last - w.first + 1);
    for (std::size_t i = w.first; i <= w.last; ++i) out.node_kinds.emplace_back(subtree.child(i).kind());
    return out;
  }
  throw MaskDegenerate("no usable aligned span after " + std::to_string(cfg.max_resample_attempts) +
                       " attempts");
}

MaskSpan rand_char_mask(std::string_view content, Rng& rng) {
  const utf8::BoundaryIndex index(content);
  if (index.positions() < 2) throw MaskDegenerate("empty document");
  return {distinct_boundaries(index, rng), MaskStrategy::rand_char, {}};
}

MaskSpan select_mask(std::string_view content, const SyntaxTree* tree, const MaskConfig& cfg,
                     Rng& rng) {
  cfg.validate();
  if (content.empty()) throw MaskDegenerate("empty document");
  if (!tree || !is_parse_valid(*tree)) {
    MaskSpan m = rand_char_mask(content, rng);
    m.fallback = MaskFallback::unparsed;
    return m;
  }
  const bool single = rng.chance(cfg.single_node_fraction);
  try {
    return single ? single_node_mask(*tree, rng) : aligned_span_mask(*tree, content, rng, cfg);
  } catch (const NoEligibleNode&) {
  } catch (const MaskDegenerate&) {
  }
  MaskSpan m = rand_char_mask(content, rng);
  m.fallback = MaskFallback::ast_failed;
  return m;
}

}  // namespace fimkit
