#ifndef SCOPECOMPLETE_TESTS_PROGRAM_GEN_H_
#define SCOPECOMPLETE_TESTS_PROGRAM_GEN_H_

#include <random>
#include <string>
#include <vector>

#include "scopecomplete/document.h"

namespace scopecomplete::gen {

// Indentation-family program from a small construct grammar: headers,
// statements, comments, blank lines, irregular dedents and empty bodies.
// No strings, brackets or continuations.
std::vector<std::string> indent_program(std::mt19937& rng, int max_lines);

// Brace-family program: functions, conditionals, loops, anonymous blocks,
// `} else {`, one-line blocks, missing or surplus closers. No strings or
// comments.
std::string brace_program(std::mt19937& rng, int max_lines);

std::string join_lines(const std::vector<std::string>& lines);

// Uniform valid cursor in `doc`.
Cursor random_cursor(std::mt19937& rng, const Document& doc);

// Random model-like output for the given family.
std::string model_output(std::mt19937& rng, LanguageFamily family);

// Splits `s` into random chunks (possibly empty ones).
std::vector<std::string> random_chunks(std::mt19937& rng, const std::string& s);

int uniform(std::mt19937& rng, int lo, int hi);
bool chance(std::mt19937& rng, double p);

}  // namespace scopecomplete::gen

#endif  // SCOPECOMPLETE_TESTS_PROGRAM_GEN_H_
