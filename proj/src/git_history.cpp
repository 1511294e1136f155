#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fimkit/benchgen.hpp"

namespace fimkit {

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int status = 0;
  std::string out;
};

// Runs argv without a shell, capturing stdout. stderr is discarded.
RunResult run(const std::vector<std::string>& argv) {
  int fds[2];
  if (pipe(fds) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    const int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(fds[1]);
  RunResult r;
  char buf[65536];
  for (;;) {
    const ssize_t n = read(fds[0], buf, sizeof buf);
    if (n > 0) {
      r.out.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  close(fds[0]);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string git_checked(const fs::path& repo, std::vector<std::string> args) {
  std::vector<std::string> argv{"git", "-C", repo.string(), "-c", "core.quotepath=off"};
  argv.insert(argv.end(), args.begin(), args.end());
  auto r = run(argv);
  if (r.status != 0) {
    std::string cmd;
    for (const auto& a : argv) cmd += (cmd.empty() ? "" : " ") + a;
    throw std::runtime_error("'" + cmd + "' exited with status " + std::to_string(r.status));
  }
  return std::move(r.out);
}

std::optional<std::string> git_blob(const fs::path& repo, const std::string& spec) {
  auto r = run({"git", "-C", repo.string(), "show", spec});
  if (r.status != 0) return std::nullopt;
  return std::move(r.out);
}

bool is_code(const LanguageId& lang) { return lang.name != "unknown" && !is_natural_language(lang); }

bool looks_binary(const std::string& s) { return s.find('\0') != std::string::npos; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

}  // namespace

std::vector<CommitFilePair> read_git_history(const fs::path& repo, const GitRange& range,
                                             const GrammarRegistry& registry) {
  std::vector<std::string> log{"log", "--no-merges", "--reverse", "--format=%H%x09%cI"};
  // git reads a bare date as that day at the current time of day, so the
  // window is applied here on the committer date instead.
  const auto day = [](const std::string& s) { return s.substr(0, 10); };
  if (range.revisions) log.push_back(*range.revisions);
  const std::string commits = git_checked(repo, log);

  const std::string repo_name = fs::weakly_canonical(repo).filename().string();
  std::vector<CommitFilePair> out;
  std::istringstream lines(commits);
  std::string line;
  while (std::getline(lines, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    const std::string sha = line.substr(0, tab);
    const std::string when = line.substr(tab + 1);
    if (range.since && day(when) < day(*range.since)) continue;
    if (range.until && day(when) > day(*range.until)) continue;

    // -z output alternates status and path, NUL separated.
    const std::string changes =
        git_checked(repo, {"diff-tree", "--no-commit-id", "-r", "--name-status", "-z", sha});
    std::vector<std::string> fields;
    for (std::size_t pos = 0; pos < changes.size();) {
      const auto nul = changes.find('\0', pos);
      const auto end = nul == std::string::npos ? changes.size() : nul;
      fields.push_back(changes.substr(pos, end - pos));
      pos = end + 1;
    }
    for (std::size_t i = 0; i + 1 < fields.size(); i += 2) {
      const std::string& status = fields[i];
      if (status.empty()) continue;
      if (status[0] == 'R' || status[0] == 'C') {
        ++i;  // two paths follow
        continue;
      }
      if (status != "M") continue;
      const std::string& path = fields[i + 1];
      const LanguageId lang = registry.detect(path);
      if (!is_code(lang)) continue;
      auto before = git_blob(repo, sha + "^:" + path);
      auto after = git_blob(repo, sha + ":" + path);
      if (!before || !after || looks_binary(*before) || looks_binary(*after)) continue;
      out.push_back({repo_name, sha, path, lang.name, std::move(*before), std::move(*after), when});
    }
  }
  return out;
}

std::vector<fs::path> find_repositories(const fs::path& path) {
  auto is_repo = [](const fs::path& p) { return fs::exists(p / ".git"); };
  if (!fs::is_directory(path)) throw std::runtime_error("not a directory: " + path.string());
  if (is_repo(path)) return {path};
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_directory() && is_repo(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CommitFilePair> read_pair_directory(const fs::path& dir, const GrammarRegistry& registry) {
  const fs::path before_root = dir / "before";
  const fs::path after_root = dir / "after";
  if (!fs::is_directory(before_root) || !fs::is_directory(after_root)) {
    throw std::runtime_error(dir.string() + " must contain before/ and after/");
  }
  std::vector<std::string> rels;
  for (const auto& entry : fs::recursive_directory_iterator(after_root)) {
    if (entry.is_regular_file()) rels.push_back(fs::relative(entry.path(), after_root).generic_string());
  }
  std::sort(rels.begin(), rels.end());
  const std::string repo_name = fs::weakly_canonical(dir).filename().string();
  std::vector<CommitFilePair> out;
  for (const auto& rel : rels) {
    if (!fs::is_regular_file(before_root / rel)) continue;
    auto before = read_file(before_root / rel);
    auto after = read_file(after_root / rel);
    if (before == after) continue;
    out.push_back({repo_name, "working", rel, registry.detect(rel).name, std::move(before), std::move(after), ""});
  }
  return out;
}

}  // namespace fimkit
