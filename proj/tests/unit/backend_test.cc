#include "scopecomplete/backend.h"

#include <gtest/gtest.h>

#include <random>

#include "scopecomplete/text.h"
#include "support/program_gen.h"

namespace scopecomplete {
namespace {

TEST(BuildPrompt, SplitsAtCursor) {
  const Document doc("def f():\n    return 1\n", LanguageFamily::kIndentScoped);
  const FimPrompt p = build_prompt(doc, {1, 4}, true);
  EXPECT_EQ(p.prefix, "def f():\n    ");
  EXPECT_EQ(p.suffix, "return 1\n");
  EXPECT_TRUE(p.multi_line);
  EXPECT_EQ(p.family, LanguageFamily::kIndentScoped);
}

TEST(BuildPrompt, WindowsKeepTextNearCursor) {
  const Document doc("abcdef\xc3\xa9ghij", LanguageFamily::kBraceScoped);
  const FimPrompt p = build_prompt(doc, {0, 7}, false, {3, 2});
  EXPECT_EQ(p.prefix, "ef\xc3\xa9");
  EXPECT_EQ(p.suffix, "gh");
}

TEST(BuildPrompt, WindowDisciplineOnLargeDocuments) {
  std::mt19937 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Document doc(gen::brace_program(rng, 400),
                       LanguageFamily::kBraceScoped);
    const Cursor c = gen::random_cursor(rng, doc);
    const FimPrompt p = build_prompt(doc, c, true, {500, 200});
    EXPECT_LE(text::code_point_count(p.prefix), 500u);
    EXPECT_LE(text::code_point_count(p.suffix), 200u);
    const std::size_t at = doc.offset_of(c);
    EXPECT_TRUE(doc.text().substr(0, at).ends_with(p.prefix));
    EXPECT_TRUE(doc.text().substr(at).starts_with(p.suffix));
  }
}

TEST(CancellationToken, CopiesShareState) {
  CancellationToken a;
  const CancellationToken b = a;
  EXPECT_FALSE(b.cancelled());
  a.cancel();
  EXPECT_TRUE(b.cancelled());
}

TEST(GenerationLimits, NewlineStopAndTokenCap) {
  GenerationParams single;
  EXPECT_EQ(apply_generation_limits("x + 1\ny", single), "x + 1");
  single.max_tokens = 2;
  EXPECT_EQ(apply_generation_limits("x + 1", single), "x +");
  GenerationParams multi;
  multi.stop_at_newline = false;
  multi.max_tokens = 120;
  multi.stop = {"\n\n\n"};
  EXPECT_EQ(apply_generation_limits("a\nb\n\n\nc", multi), "a\nb");
  EXPECT_EQ(apply_generation_limits("abcdef", multi, 4), "abcd");
}

TEST(GenerationLimits, StreamingEqualsBatch) {
  std::mt19937 rng(17);
  const std::string alphabet = "ab (x)\n  ;#";
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    const int n = gen::uniform(rng, 0, 80);
    for (int k = 0; k < n; ++k) {
      s.push_back(alphabet[gen::uniform(rng, 0, alphabet.size() - 1)]);
    }
    GenerationParams params;
    params.stop_at_newline = gen::chance(rng, 0.5);
    params.max_tokens = gen::uniform(rng, 1, 30);
    if (gen::chance(rng, 0.3)) params.stop = {"##"};
    const std::size_t cap =
        gen::chance(rng, 0.3) ? gen::uniform(rng, 1, 40) : std::string::npos;
    LimitTracker tracker(params, cap);
    std::string streamed;
    for (const std::string& chunk : gen::random_chunks(rng, s)) {
      const std::string emitted = tracker.admit(chunk);
      if (tracker.done()) ASSERT_TRUE(tracker.admit("zz").empty());
      streamed += emitted;
    }
    streamed += tracker.finish();
    ASSERT_EQ(streamed, apply_generation_limits(s, params, cap))
        << "input: " << s;
  }
}

}  // namespace
}  // namespace scopecomplete
