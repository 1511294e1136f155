#pragma once

// Brute-force reference implementations used to check the library.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fimkit/masking.hpp"
#include "fimkit/syntax.hpp"

namespace fimkit::testing {

/// Enumerates every window [i, j] and keeps the largest IoU, compared as
/// exact fractions; ties to the smallest i, then the smallest j. [0, 0]
/// when nothing overlaps.
ChildWindow exhaustive_child_window(std::span<const CharSpan> children, CharSpan target);

/// Deepest node containing `span`, by scanning every node.
std::uint32_t brute_lowest_subtree(const SyntaxTree& tree, CharSpan span);

/// True when `span` is the span of a node or the hull of a contiguous run of
/// siblings.
bool is_subtree_aligned(const SyntaxTree& tree, CharSpan span);

/// True when some named, non-root node has exactly this span.
bool is_named_node_span(const SyntaxTree& tree, CharSpan span);

struct RandomTreeOptions {
  std::size_t max_fanout = 12;
  std::size_t max_depth = 4;
  std::size_t max_leaf_width = 6;
  double gap_chance = 0.2;         // whitespace between siblings
  double zero_width_chance = 0.03;  // empty children, as error recovery makes
};

/// Random well-formed tree; root starts at 0.
NodeSpec random_tree(Rng& rng, const RandomTreeOptions& opt = {});

}  // namespace fimkit::testing
