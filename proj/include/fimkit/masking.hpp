#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fimkit/rng.hpp"
#include "fimkit/syntax.hpp"

namespace fimkit {

enum class MaskStrategy { single_node, aligned_span, rand_char };

std::string_view to_string(MaskStrategy s);
/// Throws std::invalid_argument for unknown names.
MaskStrategy parse_mask_strategy(std::string_view name);

/// Why a rand_char mask was produced instead of an AST mask.
enum class MaskFallback {
  none,
  unparsed,    // unsupported language or the parse had errors
  ast_failed,  // no eligible node, or aligned-span resampling exhausted
};

struct MaskSpan {
  CharSpan span;
  MaskStrategy strategy = MaskStrategy::rand_char;
  std::vector<std::string> node_kinds;  // empty for rand_char
  MaskFallback fallback = MaskFallback::none;
};

struct MaskConfig {
  double single_node_fraction = 0.5;
  int max_resample_attempts = 8;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

class MaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoEligibleNode : public MaskError {
 public:
  NoEligibleNode() : MaskError("tree has no eligible node") {}
};

class MaskDegenerate : public MaskError {
 public:
  explicit MaskDegenerate(const std::string& why) : MaskError("degenerate mask: " + why) {}
};

class NoChildren : public MaskError {
 public:
  NoChildren() : MaskError("node has no children") {}
};

/// Picks one eligible node with probability proportional to its byte size.
MaskSpan single_node_mask(const SyntaxTree& tree, Rng& rng);

/// Intersection over set-union of two byte ranges; 0 when both are empty.
double iou(CharSpan a, CharSpan b);

/// Inclusive child index window [first, last] and the text range it covers.
struct ChildWindow {
  std::size_t first = 0;
  std::size_t last = 0;
  CharSpan span;

  friend bool operator==(const ChildWindow&, const ChildWindow&) = default;
};

/// Contiguous window over `children` (ordered, non-overlapping) with the
/// largest IoU against `target`. Ties go to the smallest first index, then
/// the smallest last index; when no window overlaps the target the result
/// is [0, 0]. Throws NoChildren for an empty list.
ChildWindow best_child_window(std::span<const CharSpan> children, CharSpan target);
ChildWindow best_child_window(const SyntaxNode& parent, CharSpan target);

/// Samples a random target span, finds its lowest containing subtree and
/// masks the best child window (or the subtree itself when it is a leaf).
/// Windows covering every child of the root are rejected and resampled.
/// Throws MaskDegenerate after cfg.max_resample_attempts rejections.
MaskSpan aligned_span_mask(const SyntaxTree& tree, std::string_view content, Rng& rng,
                           const MaskConfig& cfg = {});

/// Two distinct uniform code-point boundaries, ordered. Throws
/// MaskDegenerate only for empty content.
MaskSpan rand_char_mask(std::string_view content, Rng& rng);

/// Strategy selection with fallback to rand_char. `tree` is null when the
/// language is unsupported.
MaskSpan select_mask(std::string_view content, const SyntaxTree* tree, const MaskConfig& cfg,
                     Rng& rng);

}  // namespace fimkit
