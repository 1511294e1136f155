#include "fimkit/benchgen.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "fimkit/utf8.hpp"

namespace fimkit {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl + 1;
    out.push_back(text.substr(start, end - start));
    start = end;
  }
  return out;
}

std::string_view to_string(HunkKind k) {
  switch (k) {
    case HunkKind::insert:
      return "insert";
    case HunkKind::replace:
      return "replace";
    case HunkKind::remove:
      return "delete";
  }
  return "unknown";
}

namespace {

// Myers' O(ND) diff in its bisecting, linear-space form. Marks deleted lines
// of `a` and inserted lines of `b`.
class LineDiffer {
 public:
  LineDiffer(const std::vector<int>& a, const std::vector<int>& b)
      : a_(a), b_(b), deleted_(a.size(), false), inserted_(b.size(), false) {}

  void run() { compare(0, a_.size(), 0, b_.size()); }

  const std::vector<bool>& deleted() const { return deleted_; }
  const std::vector<bool>& inserted() const { return inserted_; }

 private:
  void compare(std::size_t a_lo, std::size_t a_hi, std::size_t b_lo, std::size_t b_hi) {
    while (a_lo < a_hi && b_lo < b_hi && a_[a_lo] == b_[b_lo]) ++a_lo, ++b_lo;
    while (a_lo < a_hi && b_lo < b_hi && a_[a_hi - 1] == b_[b_hi - 1]) --a_hi, --b_hi;
    if (a_lo == a_hi) {
      std::fill(inserted_.begin() + static_cast<std::ptrdiff_t>(b_lo),
                inserted_.begin() + static_cast<std::ptrdiff_t>(b_hi), true);
      return;
    }
    if (b_lo == b_hi) {
      std::fill(deleted_.begin() + static_cast<std::ptrdiff_t>(a_lo),
                deleted_.begin() + static_cast<std::ptrdiff_t>(a_hi), true);
      return;
    }
    bisect(a_lo, a_hi, b_lo, b_hi);
  }

  void bisect(std::size_t a_lo, std::size_t a_hi, std::size_t b_lo, std::size_t b_hi) {
    const long n = static_cast<long>(a_hi - a_lo);
    const long m = static_cast<long>(b_hi - b_lo);
    const long max_d = (n + m + 1) / 2;
    const long v_offset = max_d;
    const long v_length = 2 * max_d;
    std::vector<long> v1(static_cast<std::size_t>(v_length), -1);
    std::vector<long> v2(static_cast<std::size_t>(v_length), -1);
    v1[static_cast<std::size_t>(v_offset + 1)] = 0;
    v2[static_cast<std::size_t>(v_offset + 1)] = 0;
    const long delta = n - m;
    const bool front = (delta % 2) != 0;
    long k1start = 0, k1end = 0, k2start = 0, k2end = 0;
    auto A = [&](long i) { return a_[a_lo + static_cast<std::size_t>(i)]; };
    auto B = [&](long j) { return b_[b_lo + static_cast<std::size_t>(j)]; };
    auto at = [](std::vector<long>& v, long i) -> long& { return v[static_cast<std::size_t>(i)]; };

    for (long d = 0; d < max_d; ++d) {
      for (long k1 = -d + k1start; k1 <= d - k1end; k1 += 2) {
        const long k1_offset = v_offset + k1;
        long x1;
        if (k1 == -d || (k1 != d && at(v1, k1_offset - 1) < at(v1, k1_offset + 1))) {
          x1 = at(v1, k1_offset + 1);
        } else {
          x1 = at(v1, k1_offset - 1) + 1;
        }
        long y1 = x1 - k1;
        while (x1 < n && y1 < m && A(x1) == B(y1)) ++x1, ++y1;
        at(v1, k1_offset) = x1;
        if (x1 > n) {
          k1end += 2;
        } else if (y1 > m) {
          k1start += 2;
        } else if (front) {
          const long k2_offset = v_offset + delta - k1;
          if (k2_offset >= 0 && k2_offset < v_length && at(v2, k2_offset) != -1) {
            const long x2 = n - at(v2, k2_offset);
            if (x1 >= x2) return split(a_lo, a_hi, b_lo, b_hi, x1, y1);
          }
        }
      }
      for (long k2 = -d + k2start; k2 <= d - k2end; k2 += 2) {
        const long k2_offset = v_offset + k2;
        long x2;
        if (k2 == -d || (k2 != d && at(v2, k2_offset - 1) < at(v2, k2_offset + 1))) {
          x2 = at(v2, k2_offset + 1);
        } else {
          x2 = at(v2, k2_offset - 1) + 1;
        }
        long y2 = x2 - k2;
        while (x2 < n && y2 < m && A(n - x2 - 1) == B(m - y2 - 1)) ++x2, ++y2;
        at(v2, k2_offset) = x2;
        if (x2 > n) {
          k2end += 2;
        } else if (y2 > m) {
          k2start += 2;
        } else if (!front) {
          const long k1_offset = v_offset + delta - k2;
          if (k1_offset >= 0 && k1_offset < v_length && at(v1, k1_offset) != -1) {
            const long x1 = at(v1, k1_offset);
            const long y1 = v_offset + x1 - k1_offset;
            if (x1 >= n - x2) return split(a_lo, a_hi, b_lo, b_hi, x1, y1);
          }
        }
      }
    }
    // No commonality at all.
    std::fill(deleted_.begin() + static_cast<std::ptrdiff_t>(a_lo),
              deleted_.begin() + static_cast<std::ptrdiff_t>(a_hi), true);
    std::fill(inserted_.begin() + static_cast<std::ptrdiff_t>(b_lo),
              inserted_.begin() + static_cast<std::ptrdiff_t>(b_hi), true);
  }

  void split(std::size_t a_lo, std::size_t a_hi, std::size_t b_lo, std::size_t b_hi, long x, long y) {
    const std::size_t ax = a_lo + static_cast<std::size_t>(x);
    const std::size_t by = b_lo + static_cast<std::size_t>(y);
    compare(a_lo, ax, b_lo, by);
    compare(ax, a_hi, by, b_hi);
  }

  const std::vector<int>& a_;
  const std::vector<int>& b_;
  std::vector<bool> deleted_;
  std::vector<bool> inserted_;
};

}  // namespace

std::vector<DiffHunk> line_diff(std::string_view before, std::string_view after) {
  const auto a_lines = split_lines(before);
  const auto b_lines = split_lines(after);
  std::unordered_map<std::string_view, int> ids;
  auto encode = [&ids](const std::vector<std::string_view>& lines) {
    std::vector<int> out;
    out.reserve(lines.size());
    for (auto l : lines) out.push_back(ids.emplace(l, static_cast<int>(ids.size())).first->second);
    return out;
  };
  const auto a = encode(a_lines);
  const auto b = encode(b_lines);

  LineDiffer differ(a, b);
  differ.run();
  const auto& del = differ.deleted();
  const auto& ins = differ.inserted();

  std::vector<DiffHunk> hunks;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (i < a.size() && j < b.size() && !del[i] && !ins[j]) {
      ++i, ++j;
      continue;
    }
    const std::size_t i0 = i, j0 = j;
    while (i < a.size() && del[i]) ++i;
    while (j < b.size() && ins[j]) ++j;
    const HunkKind kind = i == i0 ? HunkKind::insert : (j == j0 ? HunkKind::remove : HunkKind::replace);
    hunks.push_back({kind, {i0, i}, {j0, j}});
  }
  return hunks;
}

std::string apply_hunks(std::string_view before, const std::vector<DiffHunk>& hunks,
                        std::string_view after) {
  const auto a = split_lines(before);
  const auto b = split_lines(after);
  std::string out;
  std::size_t cursor = 0;
  for (const auto& h : hunks) {
    if (h.before.begin < cursor || h.before.end > a.size() || h.after.end > b.size() ||
        h.before.begin > h.before.end || h.after.begin > h.after.end) {
      throw std::invalid_argument("hunks are unordered or out of range");
    }
    for (std::size_t k = cursor; k < h.before.begin; ++k) out += a[k];
    for (std::size_t k = h.after.begin; k < h.after.end; ++k) out += b[k];
    cursor = h.before.end;
  }
  for (std::size_t k = cursor; k < a.size(); ++k) out += a[k];
  return out;
}

std::string_view to_string(BenchSplit s) { return s == BenchSplit::add ? "Add" : "Edit"; }

BenchSplit parse_bench_split(std::string_view name) {
  if (name == "Add" || name == "add") return BenchSplit::add;
  if (name == "Edit" || name == "edit") return BenchSplit::edit;
  throw std::invalid_argument("unknown benchmark split '" + std::string(name) + "'");
}

std::string BenchExample::id() const {
  return repo + "@" + sha + ":" + path + "#" + std::to_string(hunk_index);
}

HunkKindMismatch::HunkKindMismatch(HunkKind expected, HunkKind got)
    : std::invalid_argument("expected a " + std::string(to_string(expected)) + " hunk, got " +
                            std::string(to_string(got))) {}

namespace {

std::string join(const std::vector<std::string_view>& lines, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t k = begin; k < end; ++k) out += lines[k];
  return out;
}

BenchExample example_from(const CommitFilePair& pair, const DiffHunk& hunk, const ContextOptions& ctx,
                          BenchSplit split) {
  const auto lines = split_lines(pair.after);
  if (hunk.after.end > lines.size() || hunk.after.begin > hunk.after.end) {
    throw std::invalid_argument("hunk outside the after text");
  }
  std::size_t first = 0, last = lines.size();
  if (ctx.line_radius) {
    first = hunk.after.begin > *ctx.line_radius ? hunk.after.begin - *ctx.line_radius : 0;
    last = std::min(lines.size(), hunk.after.end + *ctx.line_radius);
  }
  BenchExample ex;
  ex.split = split;
  ex.prefix = join(lines, first, hunk.after.begin);
  ex.middle = join(lines, hunk.after.begin, hunk.after.end);
  ex.suffix = join(lines, hunk.after.end, last);
  ex.repo = pair.repo;
  ex.sha = pair.sha;
  ex.path = pair.path;
  ex.lang = pair.lang;
  return ex;
}

}  // namespace

BenchExample make_add_example(const CommitFilePair& pair, const DiffHunk& hunk,
                              const ContextOptions& context) {
  if (hunk.kind != HunkKind::insert) throw HunkKindMismatch(HunkKind::insert, hunk.kind);
  return example_from(pair, hunk, context, BenchSplit::add);
}

BenchExample make_edit_example(const CommitFilePair& pair, const DiffHunk& hunk,
                               const ContextOptions& context) {
  if (hunk.kind != HunkKind::replace) throw HunkKindMismatch(HunkKind::replace, hunk.kind);
  const auto before = split_lines(pair.before);
  if (hunk.before.end > before.size() || hunk.before.begin > hunk.before.end) {
    throw std::invalid_argument("hunk outside the before text");
  }
  BenchExample ex = example_from(pair, hunk, context, BenchSplit::edit);
  ex.original = join(before, hunk.before.begin, hunk.before.end);
  return ex;
}

PromptContext conflict_context(const BenchExample& ex, const ConflictMarkers& markers) {
  if (ex.split != BenchSplit::edit) return {ex.prefix, ex.suffix};
  PromptContext out;
  out.prefix = ex.prefix + markers.original + ex.original.value_or("") + markers.separator;
  out.suffix = markers.updated + ex.suffix;
  return out;
}

std::string render_conflict_prompt(const BenchExample& ex, const SentinelSet& s,
                                   const ConflictMarkers& markers) {
  const PromptContext ctx = conflict_context(ex, markers);
  return s.pre + ctx.prefix + s.suf + ctx.suffix + s.mid;
}

std::size_t BenchStats::total(BenchSplit split) const {
  std::size_t n = 0;
  const std::string key(to_string(split));
  for (const auto& [lang, by_split] : counts) {
    if (auto it = by_split.find(key); it != by_split.end()) n += it->second;
  }
  return n;
}

std::string BenchStats::language_table() const {
  std::vector<std::pair<std::string, std::size_t>> langs;
  for (const auto& [lang, by_split] : counts) {
    std::size_t n = 0;
    for (const auto& [split, c] : by_split) n += c;
    langs.emplace_back(lang, n);
  }
  std::stable_sort(langs.begin(), langs.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  auto cell = [](const std::map<std::string, std::size_t>& m, const char* key) -> std::size_t {
    auto it = m.find(key);
    return it == m.end() ? 0 : it->second;
  };
  std::ostringstream os;
  os << std::left << std::setw(8) << "split";
  for (const auto& [lang, n] : langs) os << ' ' << std::setw(std::max<int>(8, static_cast<int>(lang.size()))) << lang;
  os << ' ' << "total\n";
  for (const char* split : {"Add", "Edit"}) {
    os << std::setw(8) << split;
    std::size_t row = 0;
    for (const auto& [lang, n] : langs) {
      const std::size_t c = cell(counts.at(lang), split);
      row += c;
      os << ' ' << std::setw(std::max<int>(8, static_cast<int>(lang.size()))) << c;
    }
    os << ' ' << row << '\n';
  }
  os << std::setw(8) << "all";
  std::size_t all = 0;
  for (const auto& [lang, n] : langs) {
    all += n;
    os << ' ' << std::setw(std::max<int>(8, static_cast<int>(lang.size()))) << n;
  }
  os << ' ' << all << '\n';
  return os.str();
}

namespace {

struct PairOutcome {
  std::vector<BenchExample> examples;
  BenchStats stats;
};

bool in_date_window(const std::string& ts, const BenchFilters& f) {
  const std::string day = ts.substr(0, 10);
  if (f.since && day < f.since->substr(0, 10)) return false;
  if (f.until && day > f.until->substr(0, 10)) return false;
  return true;
}

PairOutcome process_pair(const CommitFilePair& pair, const BenchFilters& filters,
                         const ContextOptions& context) {
  PairOutcome out;
  auto& st = out.stats;
  ++st.pairs;
  const std::string where = pair.repo + "@" + pair.sha + ":" + pair.path;
  try {
    if (pair.before == pair.after) {
      ++st.failed_pairs;
      st.log.push_back(where + ": before and after are identical");
      return out;
    }
    if (!utf8::is_valid(pair.before) || !utf8::is_valid(pair.after)) {
      ++st.failed_pairs;
      st.log.push_back(where + ": not valid UTF-8");
      return out;
    }
    if (!filters.langs.empty() && !filters.langs.count(pair.lang)) {
      ++st.filtered_language;
      return out;
    }
    if (!pair.timestamp.empty() && !in_date_window(pair.timestamp, filters)) {
      ++st.filtered_date;
      return out;
    }
    const auto hunks = line_diff(pair.before, pair.after);
    for (std::size_t h = 0; h < hunks.size(); ++h) {
      ++st.hunks;
      const auto& hunk = hunks[h];
      if (hunk.kind == HunkKind::remove) {
        ++st.skipped_deletions;
        st.log.push_back(where + "#" + std::to_string(h) + ": pure deletion skipped");
        continue;
      }
      BenchExample ex = hunk.kind == HunkKind::insert ? make_add_example(pair, hunk, context)
                                                      : make_edit_example(pair, hunk, context);
      ex.hunk_index = h;
      const std::size_t chars = utf8::code_point_count(ex.middle);
      if (chars < std::max<std::size_t>(1, filters.min_middle_chars) ||
          (filters.max_middle_chars && chars > *filters.max_middle_chars) ||
          (ex.original && *ex.original == ex.middle)) {
        ++st.filtered_length;
        continue;
      }
      ++st.counts[ex.lang][std::string(to_string(ex.split))];
      out.examples.push_back(std::move(ex));
    }
  } catch (const std::exception& e) {
    ++st.failed_pairs;
    st.log.push_back(where + ": " + e.what());
    out.examples.clear();
  }
  return out;
}

void merge_stats(BenchStats& into, const BenchStats& from) {
  into.pairs += from.pairs;
  into.hunks += from.hunks;
  into.skipped_deletions += from.skipped_deletions;
  into.filtered_language += from.filtered_language;
  into.filtered_date += from.filtered_date;
  into.filtered_length += from.filtered_length;
  into.failed_pairs += from.failed_pairs;
  for (const auto& [lang, m] : from.counts) {
    for (const auto& [split, n] : m) into.counts[lang][split] += n;
  }
  into.log.insert(into.log.end(), from.log.begin(), from.log.end());
}

}  // namespace

BenchResult build_benchmark(const std::vector<CommitFilePair>& pairs, const BenchFilters& filters,
                            const ContextOptions& context, unsigned workers) {
  std::vector<const CommitFilePair*> order;
  order.reserve(pairs.size());
  for (const auto& p : pairs) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(), [](const CommitFilePair* x, const CommitFilePair* y) {
    return std::tie(x->repo, x->sha, x->path) < std::tie(y->repo, y->sha, y->path);
  });

  std::vector<PairOutcome> outcomes(order.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      outcomes[i] = process_pair(*order[i], filters, context);
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work);
  }

  BenchResult result;
  for (auto& o : outcomes) {
    merge_stats(result.stats, o.stats);
    for (auto& ex : o.examples) result.examples.push_back(std::move(ex));
  }
  return result;
}

}  // namespace fimkit
