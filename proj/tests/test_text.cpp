#include "nmtlab/error.hpp"
#include "nmtlab/text.hpp"

#include <gtest/gtest.h>

using namespace nmtlab;

TEST(Utf8, DecodesMultibyteScalars) {
    const auto s = text::decode_utf8("a\xC3\xA9\xE4\xB8\xAD\xF0\x9F\x98\x80");
    ASSERT_TRUE(s);
    EXPECT_EQ(*s, std::u32string(U"aé中\U0001F600"));
    EXPECT_EQ(text::encode_utf8(*s), "a\xC3\xA9\xE4\xB8\xAD\xF0\x9F\x98\x80");
}

TEST(Utf8, RejectsMalformedInput) {
    EXPECT_FALSE(text::decode_utf8("\xC0\xAF"));          // overlong
    EXPECT_FALSE(text::decode_utf8("\xED\xA0\x80"));      // surrogate
    EXPECT_FALSE(text::decode_utf8("\xE4\xB8"));          // truncated
    EXPECT_FALSE(text::decode_utf8("\xF4\x90\x80\x80"));  // above U+10FFFF
    EXPECT_FALSE(text::decode_utf8("\x80"));
}

TEST(Utf8, ThrowCarriesLine) {
    try {
        text::decode_utf8_or_throw("\xFF", 7);
        FAIL();
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.line(), 7u);
    }
}

TEST(Utf8, CharsSplitsPerScalar) {
    EXPECT_EQ(text::utf8_chars("h\xC3\xA9"), (std::vector<std::string>{"h", "\xC3\xA9"}));
}

TEST(Text, SplitAndTrim) {
    EXPECT_EQ(text::split_ws("  a\tb  c \r"), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(text::trim("  x y \n"), "x y");
    EXPECT_EQ(text::join({"a", "b"}, "-"), "a-b");
}
