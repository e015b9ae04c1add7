#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "vlmc/seqio.hpp"

using namespace vlmc;

TEST_CASE("tokenized decoding infers the alphabet in first-seen order") {
    auto [seq, alphabet] = decode_text("1 2 1 2", std::nullopt, SeqFileMode::tokenized);
    CHECK(seq == Sequence{0, 1, 0, 1});
    CHECK(alphabet.size() == 2);
    CHECK(alphabet.token(0) == "1");
    CHECK(alphabet.token(1) == "2");
}

TEST_CASE("char mode treats newlines as separators") {
    auto [seq, alphabet] = decode_text("ab\nba", std::nullopt, SeqFileMode::chars);
    CHECK(seq == Sequence{0, 1, 1, 0});
    CHECK(alphabet.token(0) == "a");
    CHECK(alphabet.token(1) == "b");
}

TEST_CASE("unknown token against a supplied alphabet is an error") {
    const Alphabet alphabet({"1", "2"});
    CHECK_THROWS(decode_text("1 3", alphabet, SeqFileMode::tokenized));
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS(decode_text("", std::nullopt, SeqFileMode::tokenized));
    CHECK_THROWS(decode_text("\n \n", std::nullopt, SeqFileMode::tokenized));
    CHECK_THROWS(decode_text("1 1 1", std::nullopt, SeqFileMode::tokenized)); // |A| < 2
    CHECK_THROWS(Alphabet({"1"}));
    CHECK_THROWS(Alphabet({"1", "1"}));
}

TEST_CASE("alphabet encode/decode round-trips indices") {
    const Alphabet alphabet({"a", "bb", "c"});
    for (Symbol i = 0; i < alphabet.size(); ++i)
        CHECK(alphabet.encode(alphabet.token(i)) == i);
    CHECK_FALSE(alphabet.encode("zz").has_value());
}

TEST_CASE("write/load round-trip preserves the index array") {
    const Alphabet alphabet({"1", "2", "10"});
    std::mt19937_64 rng(7);
    Sequence seq(300);
    for (auto& s : seq) s = static_cast<Symbol>(rng() % 3);

    const auto path = std::filesystem::temp_directory_path() / "vlmc_seqio_roundtrip.txt";
    write_sequence(path.string(), seq, alphabet);
    auto [loaded, same] = load_sequence(path.string(), alphabet, SeqFileMode::tokenized);
    CHECK(loaded == seq);
    std::filesystem::remove(path);
}

TEST_CASE("context display and parse invert each other") {
    const Alphabet compact({"1", "2"});
    Context ctx;
    ctx.push_back(0);
    ctx.push_back(1);
    CHECK(context_display(ctx, compact) == "12");
    CHECK(context_parse("12", compact) == ctx);

    const Alphabet wide({"aa", "b"});
    CHECK(context_display(ctx, wide) == "aa b");
    CHECK(context_parse("aa b", wide) == ctx);
}
