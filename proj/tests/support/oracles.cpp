#include "oracles.hpp"

#include <functional>

namespace fimkit::testing {

ChildWindow exhaustive_child_window(std::span<const CharSpan> children, CharSpan target) {
  ChildWindow best{0, 0, children.empty() ? CharSpan{} : children[0]};
  std::uint64_t best_inter = 0, best_union = 1;
  for (std::size_t i = 0; i < children.size(); ++i) {
    for (std::size_t j = i; j < children.size(); ++j) {
      const CharSpan hull{children[i].start, children[j].end};
      const std::size_t lo = std::max(hull.start, target.start);
      const std::size_t hi = std::min(hull.end, target.end);
      const std::uint64_t inter = hi > lo ? hi - lo : 0;
      const std::uint64_t uni = hull.size() + target.size() - inter;
      if (inter == 0) continue;
      // inter / uni > best_inter / best_union, strictly
      if (static_cast<unsigned __int128>(inter) * best_union > static_cast<unsigned __int128>(best_inter) * uni) {
        best = {i, j, hull};
        best_inter = inter;
        best_union = uni;
      }
    }
  }
  return best;
}

std::uint32_t brute_lowest_subtree(const SyntaxTree& tree, CharSpan span) {
  std::uint32_t best = 0;
  std::size_t best_depth = 0;
  for (std::uint32_t id = 0; id < tree.node_count(); ++id) {
    const auto n = tree.node(id);
    if (n.span().contains(span) && n.depth() > best_depth) {
      best = id;
      best_depth = n.depth();
    }
  }
  return best;
}

bool is_subtree_aligned(const SyntaxTree& tree, CharSpan span) {
  for (std::uint32_t id = 0; id < tree.node_count(); ++id) {
    const auto n = tree.node(id);
    if (n.span() == span) return true;
    bool started = false;
    for (const auto c : n.children()) {
      if (c.span().start == span.start) started = true;
      if (started && c.span().end == span.end) return true;
      if (c.span().start > span.end) break;
    }
  }
  return false;
}

bool is_named_node_span(const SyntaxTree& tree, CharSpan span) {
  for (std::uint32_t id = 1; id < tree.node_count(); ++id) {
    const auto n = tree.node(id);
    if (n.named() && n.span() == span) return true;
  }
  return false;
}

NodeSpec random_tree(Rng& rng, const RandomTreeOptions& opt) {
  std::size_t cursor = 0;
  std::function<NodeSpec(std::size_t)> build = [&](std::size_t depth) {
    NodeSpec n;
    n.kind = "k" + std::to_string(rng.below(6));
    n.named = rng.below(4) != 0;
    n.span.start = cursor;
    const bool leaf = depth >= opt.max_depth || (depth > 0 && rng.below(3) == 0);
    if (leaf) {
      if (!rng.chance(opt.zero_width_chance)) cursor += 1 + rng.below(opt.max_leaf_width);
    } else {
      const std::size_t fan = 1 + rng.below(opt.max_fanout);
      for (std::size_t i = 0; i < fan; ++i) {
        if (rng.chance(opt.gap_chance)) cursor += 1 + rng.below(3);
        n.children.push_back(build(depth + 1));
      }
      if (rng.chance(opt.gap_chance)) cursor += 1 + rng.below(3);
    }
    n.span.end = cursor;
    return n;
  };
  NodeSpec root = build(0);
  root.named = true;
  return root;
}

}  // namespace fimkit::testing
