#include "fimkit/fimgen.hpp"

#include <stdexcept>

#include "fimkit/utf8.hpp"

namespace fimkit {

void SentinelSet::validate() const {
  const std::string* all[] = {&pre, &suf, &mid, &eot};
  for (const auto* a : all) {
    if (a->empty()) throw std::invalid_argument("sentinels must be non-empty");
    for (const auto* b : all) {
      if (a != b && b->find(*a) != std::string::npos) {
        throw std::invalid_argument("sentinel '" + *a + "' collides with '" + *b + "'");
      }
    }
  }
}

std::optional<std::string> SentinelSet::find_in(std::string_view text) const {
  for (const auto* s : {&pre, &suf, &mid, &eot}) {
    if (text.find(*s) != std::string_view::npos) return *s;
  }
  return std::nullopt;
}

std::string_view to_string(FimMode m) { return m == FimMode::psm ? "psm" : "spm"; }

FimMode parse_fim_mode(std::string_view name) {
  if (name == "psm") return FimMode::psm;
  if (name == "spm") return FimMode::spm;
  throw std::invalid_argument("unknown FIM mode '" + std::string(name) + "'");
}

std::string_view to_string(RecordKind k) { return k == RecordKind::fim ? "fim" : "l2r"; }

DocumentSplit split_document(std::string_view content, CharSpan mask) {
  if (mask.start > mask.end || mask.end > content.size()) {
    throw std::out_of_range("mask outside the document");
  }
  return {content.substr(0, mask.start), content.substr(mask.start, mask.size()),
          content.substr(mask.end)};
}

std::string render_psm(const FimExample& ex, const SentinelSet& s) {
  std::string out;
  out.reserve(s.pre.size() + s.suf.size() + s.mid.size() + s.eot.size() + ex.prefix.size() +
              ex.middle.size() + ex.suffix.size());
  out += s.pre;
  out += ex.prefix;
  out += s.suf;
  out += ex.suffix;
  out += s.mid;
  out += ex.middle;
  out += s.eot;
  return out;
}

std::string render_spm(const FimExample& ex, const SentinelSet& s) {
  std::string out;
  out.reserve(s.pre.size() + s.suf.size() + s.mid.size() + s.eot.size() + ex.prefix.size() +
              ex.middle.size() + ex.suffix.size());
  out += s.pre;
  out += s.suf;
  out += ex.suffix;
  out += s.mid;
  out += ex.prefix;
  out += ex.middle;
  out += s.eot;
  return out;
}

std::string render(const FimExample& ex, const SentinelSet& s) {
  return ex.mode == FimMode::psm ? render_psm(ex, s) : render_spm(ex, s);
}

namespace {

bool consume(std::string_view& text, std::string_view token) {
  if (text.substr(0, token.size()) != token) return false;
  text.remove_prefix(token.size());
  return true;
}

}  // namespace

std::optional<DocumentSplit> unrender(std::string_view text, FimMode mode, const SentinelSet& s,
                                      std::size_t prefix_size) {
  if (text.size() < s.eot.size() || text.substr(text.size() - s.eot.size()) != s.eot) {
    return std::nullopt;
  }
  text.remove_suffix(s.eot.size());
  DocumentSplit out;
  if (mode == FimMode::psm) {
    if (!consume(text, s.pre)) return std::nullopt;
    const auto suf = text.find(s.suf);
    if (suf == std::string_view::npos) return std::nullopt;
    out.prefix = text.substr(0, suf);
    text.remove_prefix(suf + s.suf.size());
    const auto mid = text.find(s.mid);
    if (mid == std::string_view::npos) return std::nullopt;
    out.suffix = text.substr(0, mid);
    out.middle = text.substr(mid + s.mid.size());
    return out;
  }
  if (!consume(text, s.pre) || !consume(text, s.suf)) return std::nullopt;
  const auto mid = text.find(s.mid);
  if (mid == std::string_view::npos) return std::nullopt;
  out.suffix = text.substr(0, mid);
  text.remove_prefix(mid + s.mid.size());
  if (prefix_size > text.size()) return std::nullopt;
  out.prefix = text.substr(0, prefix_size);
  out.middle = text.substr(prefix_size);
  return out;
}

std::vector<std::size_t> CodePointCounter::unit_starts(std::string_view text) const {
  std::vector<std::size_t> out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!utf8::is_continuation(static_cast<unsigned char>(text[i]))) out.push_back(i);
  }
  return out;
}

std::vector<CharSpan> chunk_document(std::string_view content, std::size_t budget,
                                     const UnitCounter& counter) {
  if (budget == 0) throw std::invalid_argument("chunk budget must be positive");
  const auto starts = counter.unit_starts(content);
  std::vector<CharSpan> out;
  for (std::size_t u = 0; u < starts.size(); u += budget) {
    const std::size_t end = u + budget < starts.size() ? starts[u + budget] : content.size();
    out.push_back({starts[u], end});
  }
  return out;
}

void MixConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  prob(fim_rate, "fim_rate");
  prob(ast_fraction, "ast_fraction");
  prob(psm_fraction, "psm_fraction");
  mask.validate();
  if (context_budget == 0) throw std::invalid_argument("context_budget must be positive");
  sentinels.validate();
}

TrainingRecord transform(std::string_view chunk, const ChunkContext& ctx, const MixConfig& cfg,
                         Rng& rng) {
  if (chunk.empty()) throw std::invalid_argument("cannot transform an empty chunk");

  TrainingRecord rec;
  rec.lang = ctx.lang.name;
  rec.source_id = ctx.source_id;
  rec.chunk_index = ctx.chunk_index;

  const double u_fim = rng.unit();
  const double u_ast = rng.unit();
  const double u_mode = rng.unit();

  auto as_l2r = [&] {
    rec.kind = RecordKind::l2r;
    rec.text.reserve(chunk.size() + cfg.sentinels.eot.size());
    rec.text.assign(chunk);
    rec.text += cfg.sentinels.eot;
    return rec;
  };

  if (!ctx.is_code || u_fim >= cfg.fim_rate) return as_l2r();

  rec.ast_requested = u_ast < cfg.ast_fraction;
  const FimMode mode = u_mode < cfg.psm_fraction ? FimMode::psm : FimMode::spm;
  MaskSpan mask;
  try {
    mask = rec.ast_requested ? select_mask(chunk, ctx.tree, cfg.mask, rng) : rand_char_mask(chunk, rng);
  } catch (const MaskDegenerate&) {
    rec.degenerate = true;
    return as_l2r();
  }

  const auto parts = split_document(chunk, mask.span);
  FimExample ex{std::string(parts.prefix), std::string(parts.middle), std::string(parts.suffix),
                mode, ctx.lang, mask.strategy, std::move(mask.node_kinds)};
  rec.kind = RecordKind::fim;
  rec.text = render(ex, cfg.sentinels);
  rec.strategy = mask.strategy;
  rec.mode = mode;
  rec.mask = mask.span;
  rec.fallback = mask.fallback;
  return rec;
}

}  // namespace fimkit
