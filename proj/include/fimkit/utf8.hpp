#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace fimkit::utf8 {

/// Byte offset of the first malformed sequence, or nullopt when `text` is
/// well-formed UTF-8 (no overlongs, surrogates or code points past U+10FFFF).
std::optional<std::size_t> first_invalid(std::string_view text);

inline bool is_valid(std::string_view text) { return !first_invalid(text); }

std::size_t code_point_count(std::string_view text);

inline bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

inline bool is_boundary(std::string_view text, std::size_t offset) {
  return offset == 0 || offset >= text.size() ||
         !is_continuation(static_cast<unsigned char>(text[offset]));
}

/// Decodes valid UTF-8 into code points.
std::vector<char32_t> decode(std::string_view text);

void append(std::string& out, char32_t cp);

// Maps code-point positions 0..count() onto byte offsets. Pure-ASCII input
// is detected and served without a table.
class BoundaryIndex {
 public:
  explicit BoundaryIndex(std::string_view text);

  /// Number of boundary positions, i.e. code points + 1.
  std::size_t positions() const { return ascii_ ? size_ + 1 : offsets_.size(); }
  std::size_t offset(std::size_t position) const {
    return ascii_ ? position : offsets_[position];
  }

 private:
  bool ascii_ = true;
  std::size_t size_ = 0;
  std::vector<std::size_t> offsets_;
};

}  // namespace fimkit::utf8
