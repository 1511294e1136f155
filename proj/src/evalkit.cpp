#include "fimkit/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "fimkit/utf8.hpp"

namespace fimkit {

ScoredMiddle ScoredMiddle::make(std::string id, std::string_view middle, std::vector<TokenScore> scores) {
  if (middle.empty()) throw EmptyMiddle();
  std::size_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& t = scores[i];
    if (t.text.empty()) throw CoverageMismatch("token " + std::to_string(i) + " is empty");
    if (!std::isfinite(t.logprob) || t.logprob > 0.0) {
      throw std::invalid_argument("token " + std::to_string(i) + " has logprob " + std::to_string(t.logprob));
    }
    if (middle.substr(pos, t.text.size()) != t.text) {
      throw CoverageMismatch("token " + std::to_string(i) + " does not match the middle at byte " +
                             std::to_string(pos));
    }
    pos += t.text.size();
  }
  if (pos != middle.size()) {
    throw CoverageMismatch("tokens cover " + std::to_string(pos) + " of " + std::to_string(middle.size()) +
                           " middle bytes");
  }
  ScoredMiddle sm;
  sm.id_ = std::move(id);
  sm.scores_ = std::move(scores);
  sm.chars_ = utf8::code_point_count(middle);
  return sm;
}

double ScoredMiddle::total_logprob() const {
  double sum = 0.0;
  for (const auto& t : scores_) sum += t.logprob;
  return sum;
}

double char_ppl(const ScoredMiddle& sm) {
  if (sm.middle_char_count() == 0) throw EmptyMiddle();
  return std::exp(-sm.total_logprob() / static_cast<double>(sm.middle_char_count()));
}

PplRecord score_record(const ScoredMiddle& sm, std::map<std::string, std::string> keys) {
  return {sm.id(), std::move(keys), char_ppl(sm), sm.total_logprob(), sm.middle_char_count()};
}

std::vector<GroupSummary> aggregate(const std::vector<PplRecord>& records,
                                    const std::vector<std::string>& key_names) {
  if (records.empty()) throw std::invalid_argument("nothing to aggregate");
  std::map<std::vector<std::string>, std::vector<const PplRecord*>> groups;
  for (const auto& r : records) {
    std::vector<std::string> key;
    for (const auto& name : key_names) {
      auto it = r.keys.find(name);
      key.push_back(it == r.keys.end() ? "" : it->second);
    }
    groups[key].push_back(&r);
  }
  std::vector<GroupSummary> out;
  for (const auto& [key, members] : groups) {
    GroupSummary g;
    g.key = key;
    g.count = members.size();
    std::vector<double> ppls;
    double lp = 0.0, ppl_sum = 0.0;
    std::size_t chars = 0;
    for (const auto* r : members) {
      ppls.push_back(r->ppl);
      ppl_sum += r->ppl;
      lp += r->total_logprob;
      chars += r->chars;
    }
    g.mean = ppl_sum / static_cast<double>(g.count);
    std::sort(ppls.begin(), ppls.end());
    const std::size_t h = ppls.size() / 2;
    g.median = ppls.size() % 2 ? ppls[h] : (ppls[h - 1] + ppls[h]) / 2.0;
    g.pooled = chars == 0 ? 0.0 : std::exp(-lp / static_cast<double>(chars));
    out.push_back(std::move(g));
  }
  return out;
}

std::string render_l2r_prompt(std::string_view prefix, std::string_view suffix) {
  std::string out;
  out.reserve(prefix.size() + suffix.size() + 2);
  out += suffix;
  out += "\n\n";
  out += prefix;
  return out;
}

std::string render_l2r_prompt(const FimExample& ex) { return render_l2r_prompt(ex.prefix, ex.suffix); }

std::string render_l2r_prompt(const BenchExample& ex, const ConflictMarkers& markers) {
  const auto ctx = conflict_context(ex, markers);
  return render_l2r_prompt(ctx.prefix, ctx.suffix);
}

namespace {

constexpr char32_t kPad = 0x110000;  // outside the code point range

struct HistoryHash {
  std::size_t operator()(const std::u32string& s) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (char32_t c : s) h = (h ^ c) * 1099511628211ull;
    return h;
  }
};

}  // namespace

ScoredMiddle ngram_score(std::string id, std::string_view middle, std::string_view context,
                         std::size_t order, double k) {
  if (order == 0) throw std::invalid_argument("n-gram order must be at least 1");
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("smoothing k must be positive");
  if (middle.empty()) throw EmptyMiddle();

  const auto ctx = utf8::decode(context);
  const auto mid = utf8::decode(middle);
  std::set<char32_t> alphabet(ctx.begin(), ctx.end());
  alphabet.insert(mid.begin(), mid.end());
  const double V = static_cast<double>(alphabet.size());

  const std::size_t h = order - 1;
  std::u32string stream(h, kPad);
  stream.append(ctx.begin(), ctx.end());

  struct Counts {
    std::size_t total = 0;
    std::unordered_map<char32_t, std::size_t> next;
  };
  std::unordered_map<std::u32string, Counts, HistoryHash> table;
  for (std::size_t i = h; i < stream.size(); ++i) {
    auto& c = table[stream.substr(i - h, h)];
    ++c.total;
    ++c.next[stream[i]];
  }

  std::vector<TokenScore> scores;
  scores.reserve(mid.size());
  for (char32_t cp : mid) {
    const std::u32string hist = stream.substr(stream.size() - h, h);
    double num = k, den = k * V;
    if (auto it = table.find(hist); it != table.end()) {
      den += static_cast<double>(it->second.total);
      if (auto jt = it->second.next.find(cp); jt != it->second.next.end()) num += static_cast<double>(jt->second);
    }
    std::string text;
    utf8::append(text, cp);
    scores.push_back({std::move(text), std::min(0.0, std::log(num / den))});
    stream.push_back(cp);
  }
  return ScoredMiddle::make(std::move(id), middle, std::move(scores));
}

}  // namespace fimkit
