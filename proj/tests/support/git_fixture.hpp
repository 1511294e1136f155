#pragma once

// A small git repository with a known history, built commit by commit with
// pinned author dates.
//
//   c1 2024-01-01  calc.py, src/util.rs, README.md created
//   c2 2024-01-02  calc.py: comment line inserted in add()
//   c3 2024-01-03  calc.py: mul() appended; README.md edited
//   c4 2024-01-04  src/util.rs: two lines of clamp() replaced
//   c5 2024-01-05  src/util.rs: zero() inserted at the top
//   c6 2024-01-06  calc.py: sub() body replaced by two lines
//   c7 2024-01-07  calc.py: the comment from c2 deleted

#include <filesystem>
#include <string>

namespace fimkit::testing {

/// Creates the repository in `dir` (removed first if present). Throws
/// std::runtime_error when git fails.
void make_fixture_repo(const std::filesystem::path& dir);

/// Path of a file under tests/fixtures.
std::filesystem::path fixture_path(const std::string& name);

/// Fresh scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace fimkit::testing
