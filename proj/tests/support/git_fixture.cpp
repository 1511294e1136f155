#include "git_fixture.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <unistd.h>

namespace fimkit::testing {

namespace {

namespace fs = std::filesystem;

void write(const fs::path& file, const std::string& text) {
  fs::create_directories(file.parent_path());
  std::ofstream f(file, std::ios::binary);
  f << text;
}

void git(const fs::path& dir, const std::string& args, const std::string& date = "") {
  std::string cmd = "cd '" + dir.string() + "' && ";
  if (!date.empty()) cmd += "GIT_AUTHOR_DATE='" + date + "' GIT_COMMITTER_DATE='" + date + "' ";
  cmd += "git -c user.name=fixture -c user.email=fixture@example.com -c commit.gpgsign=false "
         "-c init.defaultBranch=main " + args + " >/dev/null 2>&1";
  if (std::system(cmd.c_str()) != 0) throw std::runtime_error("git failed: " + args);
}

void commit(const fs::path& dir, int day, const std::string& message) {
  const std::string date = "2024-01-0" + std::to_string(day) + "T12:00:00+00:00";
  git(dir, "add -A");
  git(dir, "commit -q -m '" + message + "'", date);
}

}  // namespace

void make_fixture_repo(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  git(dir, "init -q");

  const std::string calc1 = "def add(a, b):\n    return a + b\n\n\ndef sub(a, b):\n    return a - b\n";
  const std::string util1 = "fn clamp(x: i32) -> i32 {\n    if x < 0 {\n        return 0;\n    }\n    x\n}\n";
  write(dir / "calc.py", calc1);
  write(dir / "src/util.rs", util1);
  write(dir / "README.md", "# calc\n");
  commit(dir, 1, "initial");

  const std::string calc2 =
      "def add(a, b):\n    # sum two numbers\n    return a + b\n\n\ndef sub(a, b):\n    return a - b\n";
  write(dir / "calc.py", calc2);
  commit(dir, 2, "comment add");

  const std::string calc3 = calc2 + "\n\ndef mul(a, b):\n    return a * b\n";
  write(dir / "calc.py", calc3);
  write(dir / "README.md", "# calc\n\nArithmetic helpers.\n");
  commit(dir, 3, "mul");

  const std::string util2 = "fn clamp(x: i32) -> i32 {\n    if x < 1 {\n        return 1;\n    }\n    x\n}\n";
  write(dir / "src/util.rs", util2);
  commit(dir, 4, "clamp at one");

  write(dir / "src/util.rs", "fn zero() -> i32 {\n    0\n}\n\n" + util2);
  commit(dir, 5, "zero");

  const std::string calc4 =
      "def add(a, b):\n    # sum two numbers\n    return a + b\n\n\ndef sub(a, b):\n"
      "    result = a - b\n    return result\n\n\ndef mul(a, b):\n    return a * b\n";
  write(dir / "calc.py", calc4);
  commit(dir, 6, "sub via local");

  const std::string calc5 =
      "def add(a, b):\n    return a + b\n\n\ndef sub(a, b):\n"
      "    result = a - b\n    return result\n\n\ndef mul(a, b):\n    return a * b\n";
  write(dir / "calc.py", calc5);
  commit(dir, 7, "drop comment");
}

fs::path fixture_path(const std::string& name) { return fs::path(FIMKIT_FIXTURE_DIR) / name; }

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fimkit_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace fimkit::testing
