#include "synth.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "fimkit/rng.hpp"

namespace fimkit::testing {

namespace {

enum class Style { python, ruby, braces };

struct LangDef {
  std::string name;
  std::string ext;
  Style style;
  std::string header;
  std::string footer;
  int base_indent;  // extra indent for members (java class)
};

const std::vector<LangDef>& defs() {
  static const std::vector<LangDef> d = {
      {"python", "py", Style::python, "", "", 0},
      {"rust", "rs", Style::braces, "", "", 0},
      {"go", "go", Style::braces, "package main\n\n", "", 0},
      {"java", "java", Style::braces, "class Generated {\n", "}\n", 1},
      {"javascript", "js", Style::braces, "", "", 0},
      {"typescript", "ts", Style::braces, "", "", 0},
      {"c", "c", Style::braces, "#include <stdio.h>\n\n", "", 0},
      {"cpp", "cpp", Style::braces, "#include <cstdio>\n\nnamespace generated {\n\n", "}  // namespace generated\n",
       0},
      {"ruby", "rb", Style::ruby, "", "", 0},
  };
  return d;
}

const LangDef& def_of(const std::string& lang) {
  for (const auto& d : defs()) {
    if (d.name == lang) return d;
  }
  throw std::invalid_argument("no generator for " + lang);
}

const char* const kWords[] = {"count", "total", "value", "index", "limit", "acc", "step", "delta", "width", "depth"};
const char* const kNotes[] = {"adjust the running total", "naïve bound, refine later", "größer als null",
                              "check the limit", "単純なループ", "fast path", "keep it small", "déjà vu"};

class Writer {
 public:
  Writer(const LangDef& d, Rng& rng) : d_(d), rng_(rng) {}

  std::string program(std::size_t target) {
    out_ = d_.header;
    std::size_t k = 0;
    do {
      function(k++);
    } while (out_.size() < target);
    out_ += d_.footer;
    return std::move(out_);
  }

 private:
  std::string pick(const char* const* arr, std::size_t n) { return arr[rng_.below(n)]; }

  void line(const std::string& s) {
    out_.append(static_cast<std::size_t>(indent_) * (d_.name == "go" ? 1 : 4), d_.name == "go" ? '\t' : ' ');
    out_ += s;
    out_ += '\n';
  }

  std::string var() { return locals_[rng_.below(locals_.size())]; }

  std::string expr(int depth) {
    const auto r = rng_.below(depth > 1 ? 3 : 5);
    switch (r) {
      case 0:
        return std::to_string(rng_.below(100));
      case 1:
      case 2:
        return var();
      case 3: {
        static const char* ops[] = {" + ", " - ", " * "};
        std::string s = expr(depth + 1) + ops[rng_.below(3)] + expr(depth + 1);
        return rng_.below(2) ? "(" + s + ")" : s;
      }
      default:
        if (functions_ == 0) return var();
        return "f" + std::to_string(rng_.below(functions_)) + "(" + expr(depth + 1) + ", " + expr(depth + 1) + ")";
    }
  }

  std::string cond() {
    static const char* cmp[] = {" < ", " > ", " == ", " != "};
    return var() + cmp[rng_.below(4)] + expr(2);
  }

  std::string decl(const std::string& v) {
    const auto& n = d_.name;
    if (n == "python" || n == "ruby") return v + " = 0";
    if (n == "rust") return "let mut " + v + ": i64 = 0;";
    if (n == "go") return "var " + v + " int = 0";
    if (n == "javascript") return "let " + v + " = 0;";
    if (n == "typescript") return "let " + v + ": number = 0;";
    return "int " + v + " = 0;";
  }

  std::string semi() const { return d_.style == Style::braces && d_.name != "go" ? ";" : ""; }

  std::string comment(const std::string& text) const {
    return (d_.style == Style::braces ? "// " : "# ") + text;
  }

  std::string print(const std::string& text) const {
    const auto& n = d_.name;
    const std::string lit = "\"" + text + "\"";
    if (n == "python") return "print(" + lit + ")";
    if (n == "ruby") return "puts " + lit;
    if (n == "rust") return "println!(" + lit + ");";
    if (n == "go") return "println(" + lit + ")";
    if (n == "java") return "System.out.println(" + lit + ");";
    if (n == "javascript" || n == "typescript") return "console.log(" + lit + ");";
    if (n == "cpp") return "std::printf(" + lit + ");";
    return "printf(" + lit + ");";
  }

  void open(const std::string& head) {
    if (d_.style == Style::python) {
      line(head + ":");
    } else if (d_.style == Style::ruby) {
      line(head);
    } else {
      line(head + " {");
    }
    ++indent_;
  }

  void close() {
    --indent_;
    if (d_.style == Style::ruby) line("end");
    if (d_.style == Style::braces) line("}");
  }

  void else_branch() {
    --indent_;
    if (d_.style == Style::python) {
      line("else:");
    } else if (d_.style == Style::ruby) {
      line("else");
    } else {
      line("} else {");
    }
    ++indent_;
  }

  std::string if_head(const std::string& c) const {
    if (d_.style == Style::braces && d_.name != "go" && d_.name != "rust") return "if (" + c + ")";
    return "if " + c;
  }

  std::string while_head(const std::string& c) const {
    if (d_.name == "go") return "for " + c;
    if (d_.style == Style::braces && d_.name != "rust") return "while (" + c + ")";
    return "while " + c;
  }

  void statements(int depth, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) statement(depth);
  }

  void statement(int depth) {
    const auto r = rng_.below(depth >= 2 ? 4 : 7);
    switch (r) {
      case 0:
      case 1:
        line(var() + " = " + expr(0) + semi());
        break;
      case 2:
        line(comment(pick(kNotes, std::size(kNotes))));
        line(var() + " = " + var() + " + " + std::to_string(1 + rng_.below(9)) + semi());
        break;
      case 3:
        line(print(pick(kNotes, std::size(kNotes))));
        break;
      case 4:
        open(if_head(cond()));
        statements(depth + 1, 1 + rng_.below(2));
        if (rng_.below(2)) {
          else_branch();
          statements(depth + 1, 1 + rng_.below(2));
        }
        close();
        break;
      case 5:
        open(while_head(cond()));
        statements(depth + 1, 1 + rng_.below(2));
        close();
        break;
      default:
        open(if_head(cond()));
        line("return " + expr(1) + semi());
        close();
        break;
    }
  }

  void function(std::size_t k) {
    const std::string name = "f" + std::to_string(k);
    const auto& n = d_.name;
    std::string head;
    if (n == "python") head = "def " + name + "(a, b)";
    if (n == "ruby") head = "def " + name + "(a, b)";
    if (n == "rust") head = "fn " + name + "(a: i64, b: i64) -> i64";
    if (n == "go") head = "func " + name + "(a int, b int) int";
    if (n == "java") head = "static int " + name + "(int a, int b)";
    if (n == "javascript") head = "function " + name + "(a, b)";
    if (n == "typescript") head = "function " + name + "(a: number, b: number): number";
    if (n == "c" || n == "cpp") head = "int " + name + "(int a, int b)";

    indent_ = d_.base_indent;
    open(head);
    locals_ = {"a", "b"};
    const std::size_t extra = 1 + rng_.below(3);
    for (std::size_t i = 0; i < extra; ++i) {
      const std::string v = kWords[(k + i) % std::size(kWords)];
      if (std::find(locals_.begin(), locals_.end(), v) != locals_.end()) continue;
      line(decl(v));
      locals_.push_back(v);
    }
    statements(0, 2 + rng_.below(4));
    line("return " + expr(0) + semi());
    close();
    out_ += '\n';
    ++functions_;
  }

  const LangDef& d_;
  Rng& rng_;
  std::string out_;
  int indent_ = 0;
  std::vector<std::string> locals_;
  std::size_t functions_ = 0;
};

}  // namespace

const std::vector<std::string>& synth_languages() {
  static const std::vector<std::string> langs = [] {
    std::vector<std::string> v;
    for (const auto& d : defs()) v.push_back(d.name);
    return v;
  }();
  return langs;
}

std::string synth_extension(const std::string& lang) { return def_of(lang).ext; }

std::string synth_program(const std::string& lang, std::uint64_t seed, std::size_t target_bytes) {
  Rng rng(seed, "synth:" + lang);
  return Writer(def_of(lang), rng).program(target_bytes);
}

std::string break_program(const std::string& program, std::uint64_t seed) {
  Rng rng(seed, "break");
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i + 1 < program.size(); ++i) {
    if (program[i] == '\n') starts.push_back(i + 1);
  }
  std::string out = program;
  // Drop the last closing delimiter of the file.
  const auto close = out.find_last_of(")}]");
  if (close != std::string::npos) out.erase(close, 1);
  static const char* const kGarbage[] = {"    ) ( ] = = : {{ @@\n", "    = = ) ; ] } (\n", "    \"unterminated ( [\n"};
  const std::size_t at = starts[1 + rng.below(starts.size() - 1)];
  out.insert(std::min(at, out.size()), kGarbage[rng.below(std::size(kGarbage))]);
  return out;
}

namespace {

std::vector<RawDocument> corpus(std::size_t files, std::uint64_t seed, std::size_t target_bytes,
                                const std::vector<std::string>& langs, bool broken) {
  std::vector<RawDocument> out;
  out.reserve(files);
  char dir[32], file[32];
  for (std::size_t i = 0; i < files; ++i) {
    const auto& lang = langs[i % langs.size()];
    std::snprintf(dir, sizeof dir, "d%04zu", i / 100);
    std::snprintf(file, sizeof file, "f%05zu", i);
    std::string content = synth_program(lang, seed * 1000003 + i, target_bytes);
    if (broken) content = break_program(content, seed * 1000003 + i);
    out.push_back({std::string(dir) + "/" + file + "." + synth_extension(lang), lang, std::move(content)});
  }
  return out;
}

}  // namespace

std::vector<RawDocument> synth_corpus(std::size_t files, std::uint64_t seed, std::size_t target_bytes,
                                      const std::vector<std::string>& langs) {
  return corpus(files, seed, target_bytes, langs, false);
}

std::vector<RawDocument> broken_corpus(std::size_t files, std::uint64_t seed, std::size_t target_bytes,
                                       const std::vector<std::string>& langs) {
  return corpus(files, seed, target_bytes, langs, true);
}

}  // namespace fimkit::testing
