#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fimkit/benchgen.hpp"
#include "fimkit/fimgen.hpp"

namespace fimkit {

/// One scored token: its surface text inside the middle and its natural-log
/// probability.
struct TokenScore {
  std::string text;
  double logprob = 0.0;
};

class EmptyMiddle : public std::invalid_argument {
 public:
  EmptyMiddle() : std::invalid_argument("middle is empty") {}
};

class CoverageMismatch : public std::invalid_argument {
 public:
  explicit CoverageMismatch(const std::string& what) : std::invalid_argument(what) {}
};

class ScoredMiddle {
 public:
  /// Checks that the token texts reassemble `middle` exactly and that each
  /// logprob is finite and ≤ 0. A token may not be empty.
  static ScoredMiddle make(std::string id, std::string_view middle, std::vector<TokenScore> scores);

  const std::string& id() const { return id_; }
  const std::vector<TokenScore>& scores() const { return scores_; }
  std::size_t middle_char_count() const { return chars_; }
  double total_logprob() const;

 private:
  std::string id_;
  std::vector<TokenScore> scores_;
  std::size_t chars_ = 0;
};

/// exp(−Σ logprob / code points of the middle).
double char_ppl(const ScoredMiddle& sm);

struct PplRecord {
  std::string id;
  std::map<std::string, std::string> keys;  // e.g. split, lang
  double ppl = 0.0;
  double total_logprob = 0.0;
  std::size_t chars = 0;
};

PplRecord score_record(const ScoredMiddle& sm, std::map<std::string, std::string> keys);

struct GroupSummary {
  std::vector<std::string> key;  // values for the requested key names, in order
  std::size_t count = 0;
  double mean = 0.0;    // per-example average
  double median = 0.0;
  double pooled = 0.0;  // exp(−Σ all logprobs / Σ all chars)
};

/// Groups by the named keys (missing keys group as ""); an empty key list
/// yields one overall group. Groups are ordered by key. Throws
/// std::invalid_argument on empty input.
std::vector<GroupSummary> aggregate(const std::vector<PplRecord>& records,
                                    const std::vector<std::string>& key_names);

/// suffix ‖ "\n\n" ‖ prefix, for models trained without sentinels.
std::string render_l2r_prompt(std::string_view prefix, std::string_view suffix);
std::string render_l2r_prompt(const FimExample& ex);
/// Edit examples keep their conflict-marked context.
std::string render_l2r_prompt(const BenchExample& ex, const ConflictMarkers& markers = {});

/// Scores `middle` one code point per token with an add-k character n-gram
/// model fit on `context`. The alphabet is every code point in context or
/// middle; histories before the start of text are padded. History runs
/// across the context into the middle.
ScoredMiddle ngram_score(std::string id, std::string_view middle, std::string_view context,
                         std::size_t order, double k);

}  // namespace fimkit
