#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fimkit/evalkit.hpp"
#include "fimkit/rng.hpp"

using namespace fimkit;

namespace {

PplRecord rec(double ppl, std::string split, std::string lang, std::size_t chars = 10) {
  PplRecord r;
  r.id = split + lang + std::to_string(ppl);
  r.keys = {{"split", std::move(split)}, {"lang", std::move(lang)}};
  r.ppl = ppl;
  r.chars = chars;
  r.total_logprob = -std::log(ppl) * static_cast<double>(chars);
  return r;
}

// Random split of `text` into 1..4 byte pieces, never inside a code point.
std::vector<std::string> retokenize(Rng& rng, const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = std::min(text.size(), i + 1 + rng.below(4));
    while (j < text.size() && (static_cast<unsigned char>(text[j]) & 0xC0) == 0x80) ++j;
    out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

TEST_SUITE("evalkit") {
  TEST_CASE("closed forms") {
    CHECK(char_ppl(ScoredMiddle::make("a", "ab", {{"ab", std::log(0.5)}})) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(char_ppl(ScoredMiddle::make("b", "abc", {{"a", 0.0}, {"bc", 0.0}})) == 1.0);
    CHECK(char_ppl(ScoredMiddle::make("c", "abcdef", {{"abc", -1.0}, {"def", -2.0}})) ==
          doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  }

  TEST_CASE("characters are code points") {
    // 2 code points, 5 bytes
    const auto sm = ScoredMiddle::make("u", "\xC3\xA9\xE6\x97\xA5", {{"\xC3\xA9\xE6\x97\xA5", -2.0}});
    CHECK(sm.middle_char_count() == 2);
    CHECK(char_ppl(sm) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  }

  TEST_CASE("coverage and value checks") {
    CHECK_THROWS_AS(ScoredMiddle::make("e", "", {}), EmptyMiddle);
    CHECK_THROWS_AS(ScoredMiddle::make("m", "abc", {{"ab", -1.0}}), CoverageMismatch);
    CHECK_THROWS_AS(ScoredMiddle::make("m", "abc", {{"abcd", -1.0}}), CoverageMismatch);
    CHECK_THROWS_AS(ScoredMiddle::make("m", "abc", {{"ab", -1.0}, {"x", -1.0}}), CoverageMismatch);
    CHECK_THROWS_AS(ScoredMiddle::make("m", "ab", {{"", 0.0}, {"ab", -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(ScoredMiddle::make("m", "ab", {{"ab", 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(ScoredMiddle::make("m", "ab", {{"ab", std::nan("")}}), std::invalid_argument);
    CHECK_THROWS_AS(ScoredMiddle::make("m", "ab", {{"ab", -INFINITY}}), std::invalid_argument);
  }

  TEST_CASE("invariant under re-tokenization") {
    Rng rng(5, "retok");
    const std::string middle = "def f(x):\n    return x * 2  # d\xC3\xA9j\xC3\xA0\n";
    const double total = -17.25;
    const double ref = std::exp(-total / 35.0);
    REQUIRE(ScoredMiddle::make("r", middle, {{middle, total}}).middle_char_count() == 35);
    for (int trial = 0; trial < 500; ++trial) {
      const auto pieces = retokenize(rng, middle);
      std::vector<double> w(pieces.size());
      for (auto& x : w) x = rng.unit() + 0.01;
      const double sum = std::accumulate(w.begin(), w.end(), 0.0);
      std::vector<TokenScore> scores;
      for (std::size_t i = 0; i < pieces.size(); ++i) scores.push_back({pieces[i], total * w[i] / sum});
      CHECK(char_ppl(ScoredMiddle::make("r", middle, scores)) == doctest::Approx(ref).epsilon(1e-12));
    }
  }

  TEST_CASE("decreasing a logprob increases perplexity") {
    Rng rng(6, "mono");
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<TokenScore> a{{"ab", -rng.unit()}, {"cd", -rng.unit()}, {"e", -rng.unit()}};
      auto b = a;
      b[rng.below(3)].logprob -= 1e-3 + rng.unit();
      CHECK(char_ppl(ScoredMiddle::make("x", "abcde", b)) > char_ppl(ScoredMiddle::make("x", "abcde", a)));
    }
  }

  TEST_CASE("n single-char tokens of probability q give 1/q") {
    for (double q : {0.5, 0.25, 0.9, 0.01}) {
      for (std::size_t n : {1u, 7u, 100u}) {
        std::vector<TokenScore> s(n, {"z", std::log(q)});
        CHECK(char_ppl(ScoredMiddle::make("q", std::string(n, 'z'), s)) == doctest::Approx(1.0 / q).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("perplexity is at least one") {
    Rng rng(8, "ge1");
    for (int i = 0; i < 200; ++i) {
      CHECK(char_ppl(ScoredMiddle::make("g", "abc", {{"a", -5 * rng.unit()}, {"bc", -5 * rng.unit()}})) >= 1.0);
    }
  }

  TEST_CASE("score_record carries keys") {
    const auto r = score_record(ScoredMiddle::make("id1", "abcd", {{"abcd", -2.0}}), {{"split", "Add"}});
    CHECK(r.id == "id1");
    CHECK(r.keys.at("split") == "Add");
    CHECK(r.chars == 4);
    CHECK(r.total_logprob == -2.0);
    CHECK(r.ppl == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  }

  TEST_CASE("aggregate means") {
    const auto one = aggregate({rec(1.2, "Add", "py"), rec(1.4, "Add", "py")}, {});
    REQUIRE(one.size() == 1);
    CHECK(one[0].count == 2);
    CHECK(one[0].mean == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(one[0].median == doctest::Approx(1.3).epsilon(1e-12));
    const auto single = aggregate({rec(2.5, "Edit", "go")}, {"split"});
    CHECK(single[0].mean == 2.5);
    CHECK(single[0].pooled == doctest::Approx(2.5).epsilon(1e-12));
    CHECK_THROWS_AS(aggregate({}, {}), std::invalid_argument);
  }

  TEST_CASE("aggregate over a mixed-language table") {
    // hand-computed: Add/py {1.0, 2.0, 6.0}, Add/rs {3.0}, Edit/py {2.0, 4.0}
    const std::vector<PplRecord> rs{rec(1.0, "Add", "py", 10), rec(2.0, "Add", "py", 10), rec(6.0, "Add", "py", 20),
                                    rec(3.0, "Add", "rs", 5),  rec(2.0, "Edit", "py", 4), rec(4.0, "Edit", "py", 4)};
    const auto g = aggregate(rs, {"split", "lang"});
    REQUIRE(g.size() == 3);
    CHECK(g[0].key == std::vector<std::string>{"Add", "py"});
    CHECK(g[0].count == 3);
    CHECK(g[0].mean == doctest::Approx(3.0));
    CHECK(g[0].median == doctest::Approx(2.0));
    // pooled = exp((10 ln1 + 10 ln2 + 20 ln6) / 40)
    CHECK(g[0].pooled == doctest::Approx(std::exp((10 * std::log(2.0) + 20 * std::log(6.0)) / 40)).epsilon(1e-12));
    CHECK(g[1].key == std::vector<std::string>{"Add", "rs"});
    CHECK(g[1].mean == doctest::Approx(3.0));
    CHECK(g[2].key == std::vector<std::string>{"Edit", "py"});
    CHECK(g[2].mean == doctest::Approx(3.0));
    CHECK(g[2].median == doctest::Approx(3.0));
    CHECK(g[2].pooled == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));

    const auto by_split = aggregate(rs, {"split"});
    REQUIRE(by_split.size() == 2);
    CHECK(by_split[0].mean == doctest::Approx(3.0));
    CHECK(by_split[0].count == 4);
    const auto missing = aggregate(rs, {"repo"});
    REQUIRE(missing.size() == 1);
    CHECK(missing[0].key == std::vector<std::string>{""});
    CHECK(missing[0].mean == doctest::Approx(3.0));
  }

  TEST_CASE("aggregate is permutation invariant") {
    Rng rng(2, "perm");
    std::vector<PplRecord> rs;
    for (int i = 0; i < 60; ++i) rs.push_back(rec(1.0 + 5 * rng.unit(), i % 2 ? "Add" : "Edit", i % 3 ? "py" : "go"));
    const auto base = aggregate(rs, {"split", "lang"});
    for (int t = 0; t < 20; ++t) {
      for (std::size_t i = rs.size() - 1; i > 0; --i) std::swap(rs[i], rs[rng.below(i + 1)]);
      const auto again = aggregate(rs, {"split", "lang"});
      REQUIRE(again.size() == base.size());
      for (std::size_t g = 0; g < base.size(); ++g) {
        CHECK(again[g].key == base[g].key);
        CHECK(again[g].mean == doctest::Approx(base[g].mean).epsilon(1e-12));
        CHECK(again[g].median == base[g].median);
        CHECK(again[g].pooled == doctest::Approx(base[g].pooled).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("L2R prompt layout") {
    CHECK(render_l2r_prompt("a", "c") == "c\n\na");
    CHECK(render_l2r_prompt("a", "") == "\n\na");
    FimExample fx;
    fx.prefix = "p";
    fx.middle = "m";
    fx.suffix = "s";
    CHECK(render_l2r_prompt(fx) == "s\n\np");
    BenchExample add;
    add.prefix = "x\n";
    add.middle = "y\n";
    add.suffix = "z\n";
    CHECK(render_l2r_prompt(add) == "z\n\n\nx\n");
    BenchExample edit = add;
    edit.split = BenchSplit::edit;
    edit.original = "w\n";
    CHECK(render_l2r_prompt(edit) == ">>>>>>> UPDATED\nz\n\n\nx\n<<<<<<< ORIGINAL\nw\n=======\n");
  }

  TEST_CASE("L2R prompt splits back at the first blank line") {
    Rng rng(3, "l2r");
    for (int t = 0; t < 2000; ++t) {
      std::string prefix, suffix;
      for (std::size_t i = rng.below(20); i > 0; --i) prefix += static_cast<char>('a' + rng.below(26));
      for (std::size_t i = rng.below(20); i > 0; --i) suffix += rng.chance(0.2) ? ' ' : static_cast<char>('a' + rng.below(26));
      const auto p = render_l2r_prompt(prefix, suffix);
      const auto at = p.find("\n\n");
      REQUIRE(at != std::string::npos);
      CHECK(p.substr(0, at) == suffix);
      CHECK(p.substr(at + 2) == prefix);
    }
  }

  TEST_CASE("ngram: huge k tends to the uniform model") {
    const std::string ctx = "abcabcabd";  // alphabet {a, b, c, d} plus 'e' below
    const auto sm = ngram_score("u", "abe", ctx, 1, 1e12);
    CHECK(char_ppl(sm) == doctest::Approx(5.0).epsilon(1e-6));
    for (const auto& t : sm.scores()) CHECK(t.logprob == doctest::Approx(std::log(1.0 / 5)).epsilon(1e-6));
    const auto tri = ngram_score("u", "abe", ctx, 3, 1e12);
    CHECK(char_ppl(tri) == doctest::Approx(5.0).epsilon(1e-6));
  }

  TEST_CASE("ngram: a deterministic context tends to perplexity one") {
    const std::string ctx = "r" + std::string(500, 'q');
    double prev = INFINITY;
    for (double k : {1.0, 1e-2, 1e-4, 1e-8}) {
      const double p = char_ppl(ngram_score("d", "qqqq", ctx, 2, k));
      CHECK(p < prev);
      prev = p;
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("ngram: a repeated motif scores below random text") {
    std::string motif = "for (int i = 0; i < n; ++i) sum += v[i];\n";
    std::string ctx;
    for (int i = 0; i < 40; ++i) ctx += motif;
    Rng rng(12, "ngram-rand");
    std::string random;
    for (std::size_t i = 0; i < motif.size(); ++i) random += static_cast<char>(' ' + rng.below(95));
    for (std::size_t order : {1u, 2u, 3u, 5u}) {
      CAPTURE(order);
      CHECK(char_ppl(ngram_score("m", motif, ctx, order, 0.5)) < char_ppl(ngram_score("r", random, ctx, order, 0.5)));
    }
  }

  TEST_CASE("ngram: one token per code point and valid arguments") {
    const auto sm = ngram_score("c", "h\xC3\xA9!", "h\xC3\xA9h\xC3\xA9", 2, 0.1);
    REQUIRE(sm.scores().size() == 3);
    CHECK(sm.scores()[1].text == "\xC3\xA9");
    for (const auto& t : sm.scores()) CHECK(t.logprob <= 0.0);
    CHECK_THROWS_AS(ngram_score("c", "a", "a", 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(ngram_score("c", "a", "a", 2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ngram_score("c", "", "a", 2, 0.5), EmptyMiddle);
    CHECK(char_ppl(ngram_score("c", "xyz", "", 3, 1.0)) == doctest::Approx(3.0));
  }
}
