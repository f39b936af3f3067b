#include <gtest/gtest.h>

#include "takedown/text.hpp"

using namespace takedown;

TEST(NormalizeChars, StripsCasePunctuationAndWhitespace) {
    EXPECT_EQ(normalize_chars("Hello, World!\n"), "helloworld");
    EXPECT_EQ(normalize_chars(""), "");
    EXPECT_EQ(normalize_chars("a  b\tc"), "abc");
    EXPECT_EQ(normalize_chars("A-B_C"), "abc");
}

TEST(NormalizeChars, HandlesUnicodePunctuationAndSpaces) {
    // curly apostrophe (U+2019), em dash (U+2014), no-break space (U+00A0)
    EXPECT_EQ(normalize_chars("don’t—stop"), "dontstop");
    EXPECT_EQ(normalize_chars("a b"), "ab");
    EXPECT_EQ(normalize_chars("“Quoted”"), "quoted");
}

TEST(NormalizeWords, LowercasesAndStripsPunctuation) {
    EXPECT_EQ(normalize_words("Hello, World!"), (std::vector<std::string>{"hello", "world"}));
    EXPECT_EQ(normalize_words("don't stop"), (std::vector<std::string>{"dont", "stop"}));
    EXPECT_TRUE(normalize_words("  ").empty());
    EXPECT_TRUE(normalize_words("").empty());
    EXPECT_EQ(normalize_words("U.S. economy"), (std::vector<std::string>{"us", "economy"}));
}

TEST(NormalizeWords, PurePunctuationTokenVanishes) {
    EXPECT_EQ(normalize_words("a -- b"), (std::vector<std::string>{"a", "b"}));
}

TEST(SplitWhitespace, KeepsRawTokens) {
    EXPECT_EQ(split_whitespace("A b  C.\nd"), (std::vector<std::string>{"A", "b", "C.", "d"}));
    EXPECT_TRUE(split_whitespace(" \t\n").empty());
}

TEST(JoinWords, RoundTripsSingleSpaces) {
    std::vector<std::string> words{"a", "b.", "C"};
    EXPECT_EQ(join_words(words), "a b. C");
    EXPECT_EQ(split_whitespace(join_words(words)), words);
}

TEST(Utf8, DecodeEncodeRoundTrip) {
    std::string s = "café 日本語 \U0001f600";
    std::string out;
    for (char32_t cp : decode_all(s)) encode_utf8(cp, out);
    EXPECT_EQ(out, s);
}

TEST(Utf8, InvalidBytesDecodeAsReplacement) {
    std::string bad = "a\xffz";
    std::vector<char32_t> cps = decode_all(bad);
    ASSERT_EQ(cps.size(), 3u);
    EXPECT_EQ(cps[0], U'a');
    EXPECT_EQ(cps[1], 0xfffdu);
    EXPECT_EQ(cps[2], U'z');
}
