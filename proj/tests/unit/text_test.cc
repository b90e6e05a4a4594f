#include "scopecomplete/text.h"

#include <gtest/gtest.h>

namespace scopecomplete::text {
namespace {

TEST(Text, CodePointsCountMultibyteOnce) {
  EXPECT_EQ(code_point_count("abc"), 3u);
  EXPECT_EQ(code_point_count("h\xc3\xa9llo"), 5u);  // é
  EXPECT_EQ(code_point_count("\xe2\x82\xac"), 1u);  // €
  // Stray continuation byte counts on its own.
  EXPECT_EQ(code_point_count("\x80z"), 2u);
}

TEST(Text, ByteOffsetOfColumnClamps) {
  EXPECT_EQ(byte_offset_of_column("h\xc3\xa9llo", 2), 3u);
  EXPECT_EQ(byte_offset_of_column("ab", 10), 2u);
}

TEST(Text, HeadAndTailByCodePoint) {
  EXPECT_EQ(tail_code_points("ab\xc3\xa9", 1), "\xc3\xa9");
  EXPECT_EQ(head_code_points("\xc3\xa9xy", 2), "\xc3\xa9x");
  EXPECT_EQ(tail_code_points("ab", 5), "ab");
}

TEST(Text, SplitLinesKeepsTrailingEmptyLine) {
  EXPECT_EQ(split_lines("a\nb\n"),
            (std::vector<std::string_view>{"a", "b", ""}));
  EXPECT_EQ(split_lines(""), (std::vector<std::string_view>{""}));
}

TEST(Text, IndentWidthWithTabs) {
  EXPECT_EQ(indent_width("    x"), 4);
  EXPECT_EQ(indent_width("\t x", 1), 2);
  EXPECT_EQ(indent_width("\t x", 4), 5);
}

TEST(Text, TrimAndBlank) {
  EXPECT_EQ(trim("  a b \t"), "a b");
  EXPECT_EQ(trim_right("  a  "), "  a");
  EXPECT_TRUE(is_blank(" \t\r"));
  EXPECT_FALSE(is_blank(" x"));
}

TEST(Text, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(to_hex(0xabcULL), "0000000000000abc");
}

}  // namespace
}  // namespace scopecomplete::text
