#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fimkit/masking.hpp"
#include "fimkit/rng.hpp"
#include "fimkit/syntax.hpp"

namespace fimkit {

struct SentinelSet {
  std::string pre = "[PRE]";
  std::string suf = "[SUF]";
  std::string mid = "[MID]";
  std::string eot = "[EOT]";

  /// Non-empty, pairwise distinct, none a substring of another.
  void validate() const;
  /// First sentinel occurring in `text`, if any.
  std::optional<std::string> find_in(std::string_view text) const;
};

enum class FimMode { psm, spm };

std::string_view to_string(FimMode m);
FimMode parse_fim_mode(std::string_view name);

struct FimExample {
  std::string prefix;
  std::string middle;
  std::string suffix;
  FimMode mode = FimMode::psm;
  LanguageId lang;
  MaskStrategy strategy = MaskStrategy::rand_char;
  std::vector<std::string> node_kinds;
};

struct DocumentSplit {
  std::string_view prefix;
  std::string_view middle;
  std::string_view suffix;
};

/// Byte-exact three-way split at the mask boundaries.
DocumentSplit split_document(std::string_view content, CharSpan mask);

/// pre ‖ prefix ‖ suf ‖ suffix ‖ mid ‖ middle ‖ eot
std::string render_psm(const FimExample& ex, const SentinelSet& s = {});
/// pre ‖ suf ‖ suffix ‖ mid ‖ prefix ‖ middle ‖ eot
std::string render_spm(const FimExample& ex, const SentinelSet& s = {});
std::string render(const FimExample& ex, const SentinelSet& s = {});

/// Inverse of render_psm/render_spm for sentinel-free parts. The SPM layout
/// does not delimit prefix from middle, so `prefix_size` (bytes) is needed
/// there and ignored for PSM. nullopt when the text is not a record of that
/// layout. The parts view into `text`.
std::optional<DocumentSplit> unrender(std::string_view text, FimMode mode, const SentinelSet& s,
                                      std::size_t prefix_size = 0);

// Splits text into counting units by reporting the byte offset at which each
// unit starts.
class UnitCounter {
 public:
  virtual ~UnitCounter() = default;
  virtual std::vector<std::size_t> unit_starts(std::string_view text) const = 0;
};

class CodePointCounter : public UnitCounter {
 public:
  std::vector<std::size_t> unit_starts(std::string_view text) const override;
};

/// Consecutive chunks of at most `budget` units covering the whole text.
/// Empty text yields no chunks.
std::vector<CharSpan> chunk_document(std::string_view content, std::size_t budget,
                                     const UnitCounter& counter = CodePointCounter{});

struct MixConfig {
  double fim_rate = 0.7;
  double ast_fraction = 0.9;
  double psm_fraction = 0.5;
  MaskConfig mask;
  std::size_t context_budget = 8192;
  SentinelSet sentinels;

  void validate() const;
};

enum class RecordKind { fim, l2r };

std::string_view to_string(RecordKind k);

struct TrainingRecord {
  RecordKind kind = RecordKind::l2r;
  std::string text;
  std::string lang;
  std::optional<MaskStrategy> strategy;
  std::optional<FimMode> mode;
  std::string source_id;
  std::size_t chunk_index = 0;
  std::optional<CharSpan> mask;  // relative to the chunk

  // Bookkeeping for statistics; not serialised.
  MaskFallback fallback = MaskFallback::none;
  bool ast_requested = false;
  bool degenerate = false;  // FIM was drawn but no mask existed
};

/// What transform() needs to know about the chunk it is given.
struct ChunkContext {
  LanguageId lang;
  std::string source_id;
  std::size_t chunk_index = 0;
  bool is_code = true;
  const SyntaxTree* tree = nullptr;  // chunk-relative; null if unsupported
};

/// One chunk to one record. Draw order per chunk is fixed: FIM vs L2R, AST
/// vs Rand, PSM vs SPM, then the mask draws.
TrainingRecord transform(std::string_view chunk, const ChunkContext& ctx, const MixConfig& cfg,
                         Rng& rng);

}  // namespace fimkit
