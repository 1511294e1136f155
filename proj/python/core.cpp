#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fimkit/benchgen.hpp"
#include "fimkit/evalkit.hpp"
#include "fimkit/masking.hpp"
#include "fimkit/pipeline.hpp"
#include "fimkit/records.hpp"

namespace py = pybind11;
using namespace fimkit;

namespace {

const GrammarRegistry& registry() {
  // rebuilt when the grammar directory changes
  static std::unique_ptr<GrammarRegistry> r;
  static std::filesystem::path dir;
  const auto want = default_grammar_directory();
  if (!r || dir != want) {
    r = std::make_unique<GrammarRegistry>(want);
    dir = want;
  }
  return *r;
}

py::dict mask_one(const std::string& text, const std::string& lang, std::uint64_t seed, const std::string& stream,
                  std::uint64_t index, double single_node_fraction, int max_resample) {
  const LanguageId id = lang.empty() ? registry().detect(stream) : LanguageId(lang);
  const auto doc = SourceDocument::make(stream, id, text);
  Parser parser(registry());
  const auto tree = parser.try_parse(doc);
  MaskConfig cfg;
  cfg.single_node_fraction = single_node_fraction;
  cfg.max_resample_attempts = max_resample;
  cfg.validate();
  Rng rng(seed, stream, index);
  const auto m = select_mask(text, tree ? &*tree : nullptr, cfg, rng);
  py::dict out;
  out["strategy"] = std::string(to_string(m.strategy));
  out["start"] = m.span.start;
  out["end"] = m.span.end;
  out["node_kinds"] = m.node_kinds;
  out["fallback"] = m.fallback == MaskFallback::none       ? py::object(py::none())
                    : m.fallback == MaskFallback::unparsed ? py::object(py::str("unparsed"))
                                                           : py::object(py::str("ast_failed"));
  out["middle"] = py::bytes(text.substr(m.span.start, m.span.size())).attr("decode")("utf-8");
  return out;
}

py::tuple generate_corpus(const std::filesystem::path& corpus, std::uint64_t seed, unsigned workers, double fim_rate,
                          double ast_fraction, double psm_fraction, double single_node_fraction,
                          std::size_t context_budget) {
  GenerateOptions opts;
  opts.seed = seed;
  opts.workers = workers;
  opts.mix.fim_rate = fim_rate;
  opts.mix.ast_fraction = ast_fraction;
  opts.mix.psm_fraction = psm_fraction;
  opts.mix.mask.single_node_fraction = single_node_fraction;
  opts.mix.context_budget = context_budget;
  std::vector<std::string> lines;
  GenStats stats;
  {
    py::gil_scoped_release release;
    auto source = open_corpus(corpus);
    stats = generate(*source, opts, registry(), [&](const TrainingRecord& r) { lines.push_back(to_jsonl(r)); });
  }
  return py::make_tuple(lines, to_json(stats).dump());
}

py::tuple bench_from_repo(const std::filesystem::path& repos, std::optional<std::string> since,
                          std::optional<std::string> until, std::vector<std::string> langs, std::size_t min_middle,
                          std::optional<std::size_t> max_middle, unsigned workers) {
  BenchResult result;
  {
    py::gil_scoped_release release;
    GitRange range;
    range.since = since;
    range.until = until;
    std::vector<CommitFilePair> pairs;
    for (const auto& repo : find_repositories(repos)) {
      auto more = read_git_history(repo, range, registry());
      pairs.insert(pairs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    BenchFilters filters;
    filters.langs = {langs.begin(), langs.end()};
    filters.min_middle_chars = min_middle;
    filters.max_middle_chars = max_middle;
    filters.since = since;
    filters.until = until;
    result = build_benchmark(pairs, filters, {}, workers);
  }
  std::vector<std::string> lines;
  for (const auto& ex : result.examples) lines.push_back(to_json(ex).dump());
  return py::make_tuple(lines, to_json(result.stats).dump());
}

double ppl(const std::string& middle, const std::vector<std::pair<std::string, double>>& tokens) {
  std::vector<TokenScore> scores;
  for (const auto& [text, lp] : tokens) scores.push_back({text, lp});
  return char_ppl(ScoredMiddle::make("", middle, std::move(scores)));
}

std::vector<std::pair<std::string, double>> ngram(const std::string& middle, const std::string& context,
                                                  std::size_t order, double k) {
  std::vector<std::pair<std::string, double>> out;
  const auto sm = ngram_score("", middle, context, order, k);
  for (const auto& t : sm.scores()) out.emplace_back(t.text, t.logprob);
  return out;
}

std::vector<py::tuple> diff(const std::string& before, const std::string& after) {
  std::vector<py::tuple> out;
  for (const auto& h : line_diff(before, after)) {
    out.push_back(py::make_tuple(std::string(to_string(h.kind)), py::make_tuple(h.before.begin, h.before.end),
                                 py::make_tuple(h.after.begin, h.after.end)));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "fimkit native core";

  py::register_exception<InvalidUtf8>(m, "InvalidUtf8", PyExc_ValueError);
  py::register_exception<EmptyMiddle>(m, "EmptyMiddle", PyExc_ValueError);
  py::register_exception<CoverageMismatch>(m, "CoverageMismatch", PyExc_ValueError);

  m.def("set_grammar_dir", [](const std::filesystem::path& p) { set_default_grammar_directory(p); });
  m.def("grammar_dir", [] { return default_grammar_directory(); });
  m.def("detect_language", [](const std::string& path) { return registry().detect(path).name; });

  m.def("mask_one", &mask_one, py::arg("text"), py::arg("lang") = "", py::arg("seed") = 0,
        py::arg("stream") = "", py::arg("index") = 0, py::arg("single_node_fraction") = 0.5,
        py::arg("max_resample") = 8);
  m.def("generate", &generate_corpus, py::arg("corpus"), py::arg("seed") = 0, py::arg("workers") = 1,
        py::arg("fim_rate") = 0.7, py::arg("ast_fraction") = 0.9, py::arg("psm_fraction") = 0.5,
        py::arg("single_node_fraction") = 0.5, py::arg("context_budget") = 8192);
  m.def("build_benchmark", &bench_from_repo, py::arg("repos"), py::arg("since") = py::none(),
        py::arg("until") = py::none(), py::arg("langs") = std::vector<std::string>{}, py::arg("min_middle") = 1,
        py::arg("max_middle") = py::none(), py::arg("workers") = 1);
  m.def("line_diff", &diff, py::arg("before"), py::arg("after"));
  m.def("char_ppl", &ppl, py::arg("middle"), py::arg("tokens"));
  m.def("ngram_score", &ngram, py::arg("middle"), py::arg("context"), py::arg("order") = 3, py::arg("k") = 0.5);
  m.def(
      "render_l2r_prompt",
      [](const std::string& prefix, const std::string& suffix) { return render_l2r_prompt(prefix, suffix); },
      py::arg("prefix"), py::arg("suffix"));
}
