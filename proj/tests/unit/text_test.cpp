#include "expltk/text.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace expltk::text {
namespace {

using expltk::testing::Gen;

TEST(Utf8, DecodesMultiByteSequences) {
  const std::string s = "aé€😀";
  std::size_t pos = 0;
  EXPECT_EQ(decode_next(s, pos), U'a');
  EXPECT_EQ(decode_next(s, pos), U'é');
  EXPECT_EQ(decode_next(s, pos), U'€');
  EXPECT_EQ(decode_next(s, pos), U'😀');
  EXPECT_EQ(pos, s.size());
}

TEST(Utf8, MalformedByteBecomesReplacementAndAdvancesOne) {
  const std::string s = "\xC3x";
  std::size_t pos = 0;
  EXPECT_EQ(decode_next(s, pos), kInvalidCodepoint);
  EXPECT_EQ(pos, 1u);
  EXPECT_EQ(decode_next(s, pos), U'x');
}

TEST(Utf8, AppendRoundTripsRandomCodepoints) {
  Gen gen(11);
  for (int i = 0; i < 2000; ++i) {
    char32_t cp = static_cast<char32_t>(gen.integer(1, 0x10FFFF));
    if (cp >= 0xD800 && cp <= 0xDFFF) continue;
    std::string s;
    append_utf8(s, cp);
    std::size_t pos = 0;
    EXPECT_EQ(decode_next(s, pos), cp);
    EXPECT_EQ(pos, s.size());
  }
}

TEST(Utf8, FloorCodepointNeverSplitsASequence) {
  const std::string s = "żółw";
  for (std::size_t i = 0; i <= s.size(); ++i) {
    const std::size_t f = floor_codepoint(s, i);
    EXPECT_LE(f, i);
    if (f < s.size()) EXPECT_NE(static_cast<unsigned char>(s[f]) & 0xC0, 0x80);
  }
}

TEST(CaseFolding, FoldsLatinGreekCyrillic) {
  EXPECT_EQ(fold_case("KRAKÓW"), "kraków");
  EXPECT_EQ(fold_case("ŁÓDŹ"), "łódź");
  EXPECT_EQ(fold_case("ΑΘΗΝΑ"), "αθηνα");
  EXPECT_EQ(fold_case("МОСКВА"), "москва");
  EXPECT_EQ(fold_case("東京"), "東京");
}

TEST(Normalize, CollapsesWhitespaceAndTrims) {
  EXPECT_EQ(normalize("  The\tRiver \n Sambre  "), "the river sambre");
  EXPECT_EQ(normalize(""), "");
  EXPECT_EQ(normalize(" \t "), "");
}

TEST(Normalize, LooseDropsPunctuation) {
  EXPECT_EQ(normalize_loose("Cervantes."), "cervantes");
  EXPECT_EQ(normalize_loose("Saint-Exupéry"), normalize_loose("saint exupéry"));
  EXPECT_EQ(normalize_loose("“Don Quixote”"), "don quixote");
}

TEST(Normalize, IsIdempotent) {
  Gen gen(5);
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (int w = gen.integer(0, 8); w > 0; --w) {
      s += gen.word(0, 6);
      s += gen.coin() ? " " : gen.coin() ? "\t\n" : ".,";
    }
    EXPECT_EQ(normalize(normalize(s)), normalize(s));
    EXPECT_EQ(normalize_loose(normalize_loose(s)), normalize_loose(s));
  }
}

TEST(Words, SplitsOnUnicodeWhitespace) {
  const auto w = words("a b  c d");
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(w[0], "a");
  EXPECT_EQ(w[3], "d");
  EXPECT_TRUE(words("   ").empty());
}

TEST(Punct, Classification) {
  EXPECT_TRUE(is_all_punct(",.;"));
  EXPECT_TRUE(is_all_punct("«»"));
  EXPECT_FALSE(is_all_punct("a."));
  EXPECT_TRUE(is_space(U' '));
  EXPECT_FALSE(is_punct(U'é'));
  EXPECT_EQ(trim("  x y \t"), "x y");
}

}  // namespace
}  // namespace expltk::text
