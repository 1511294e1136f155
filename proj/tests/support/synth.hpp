#pragma once

// Deterministic generator of small, syntactically valid programs in several
// languages, plus corrupted variants that no longer parse.

#include <cstdint>
#include <string>
#include <vector>

#include "fimkit/pipeline.hpp"

namespace fimkit::testing {

/// Languages the generator can emit.
const std::vector<std::string>& synth_languages();

std::string synth_extension(const std::string& lang);

/// A program of roughly `target_bytes` bytes (never less than one function).
std::string synth_program(const std::string& lang, std::uint64_t seed, std::size_t target_bytes);

/// The program with a garbage line spliced in and one closing delimiter
/// dropped.
std::string break_program(const std::string& program, std::uint64_t seed);

/// `files` documents cycling through `langs`, paths like "d0012/f0012.py".
std::vector<RawDocument> synth_corpus(std::size_t files, std::uint64_t seed, std::size_t target_bytes,
                                      const std::vector<std::string>& langs = synth_languages());

std::vector<RawDocument> broken_corpus(std::size_t files, std::uint64_t seed, std::size_t target_bytes,
                                       const std::vector<std::string>& langs = synth_languages());

}  // namespace fimkit::testing
