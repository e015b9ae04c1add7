#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "vlmc/count_trie.hpp"

using namespace vlmc;

namespace {

// Independent oracle: direct enumeration over all positions.
std::vector<std::uint32_t> brute_counts(const Sequence& seq, const Context& s, int alpha) {
    std::vector<std::uint32_t> counts(alpha, 0);
    const std::size_t len = s.size();
    for (std::size_t i = len; i < seq.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < len; ++j)
            if (seq[i - len + j] != static_cast<Symbol>(static_cast<unsigned char>(s[j]))) {
                match = false;
                break;
            }
        if (match) ++counts[seq[i]];
    }
    return counts;
}

std::vector<Context> all_strings(int alpha, int max_len) {
    std::vector<Context> out{Context{}};
    std::vector<Context> level{Context{}};
    for (int d = 1; d <= max_len; ++d) {
        std::vector<Context> next;
        for (const Context& s : level)
            for (int a = 0; a < alpha; ++a) {
                Context t = s;
                t.push_back(static_cast<char>(a));
                next.push_back(t);
                out.push_back(std::move(t));
            }
        level = std::move(next);
    }
    return out;
}

Sequence from_digits(std::initializer_list<int> digits) {
    Sequence s;
    for (int d : digits) s.push_back(static_cast<Symbol>(d));
    return s;
}

} // namespace

TEST_CASE("counts of 1212 match direct enumeration") {
    const Sequence seq = from_digits({0, 1, 0, 1}); // tokens 1,2,1,2
    const CountTrie trie(seq, 2, 2);

    CHECK(trie.counts_of("") == std::vector<std::uint32_t>{2, 2});
    CHECK(trie.counts_of(Context(1, 0)) == std::vector<std::uint32_t>{0, 2});   // "1"
    CHECK(trie.counts_of(Context(1, 1)) == std::vector<std::uint32_t>{1, 0});   // "2"
    CHECK(trie.counts_of(Context{'\0', '\1'}) == std::vector<std::uint32_t>{1, 0}); // "12"
    CHECK(trie.counts_of(Context{'\1', '\0'}) == std::vector<std::uint32_t>{0, 1}); // "21"
    CHECK(trie.find(Context{'\0', '\0'}) == -1); // "11" never occurred
    CHECK(trie.counts_of(Context{'\0', '\0'}) == std::vector<std::uint32_t>{0, 0});
}

TEST_CASE("single-symbol sequence yields a root-only trie") {
    const Sequence seq = from_digits({0});
    const CountTrie trie(seq, 2, 2);
    CHECK(trie.node_count() == 1);
    CHECK(trie.counts_of("") == std::vector<std::uint32_t>{1, 0});
}

TEST_CASE("constant sequence counts") {
    const Sequence seq = from_digits({0, 0, 0, 0});
    const CountTrie trie(seq, 2, 1);
    CHECK(trie.counts_of("") == std::vector<std::uint32_t>{4, 0});
    CHECK(trie.counts_of(Context(1, 0)) == std::vector<std::uint32_t>{3, 0});
}

TEST_CASE("out-of-depth queries are rejected") {
    const CountTrie trie(from_digits({0, 1, 0, 1}), 2, 2);
    CHECK_THROWS_AS(trie.counts_of(Context(3, 0)), std::out_of_range);
}

TEST_CASE("exhaustive agreement with the enumeration oracle on random sequences") {
    std::mt19937_64 rng(20240811);
    for (int trial = 0; trial < 40; ++trial) {
        const int alpha = 2 + static_cast<int>(rng() % 2);
        const int n = 1 + static_cast<int>(rng() % 50);
        const int depth = static_cast<int>(rng() % 5);
        Sequence seq(static_cast<std::size_t>(n));
        for (auto& s : seq) s = static_cast<Symbol>(rng() % alpha);
        const CountTrie trie(seq, alpha, depth);

        for (const Context& s : all_strings(alpha, depth))
            CHECK(trie.counts_of(s) == brute_counts(seq, s, alpha));
    }
}

TEST_CASE("per-depth totals and parent-child consistency") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int alpha = 2;
        const int n = 10 + static_cast<int>(rng() % 41);
        const int depth = 4;
        Sequence seq(static_cast<std::size_t>(n));
        for (auto& s : seq) s = static_cast<Symbol>(rng() % alpha);
        const CountTrie trie(seq, alpha, depth);

        const auto strings = all_strings(alpha, depth);
        for (int d = 0; d <= depth && d <= n; ++d) {
            std::uint64_t total = 0;
            for (const Context& s : strings) {
                if (static_cast<int>(s.size()) != d) continue;
                for (std::uint32_t c : trie.counts_of(s)) total += c;
            }
            CHECK(total == static_cast<std::uint64_t>(n - d));
        }

        for (const Context& v : strings) {
            if (static_cast<int>(v.size()) >= depth) continue;
            const auto pv = trie.counts_of(v);
            std::uint64_t child_total = 0, v_total = 0;
            for (std::uint32_t c : pv) v_total += c;
            std::vector<std::uint64_t> child_sum(alpha, 0);
            for (int a = 0; a < alpha; ++a) {
                Context av(1, static_cast<char>(a));
                av += v;
                const auto pav = trie.counts_of(av);
                std::uint64_t t = 0;
                for (int b = 0; b < alpha; ++b) {
                    child_sum[static_cast<std::size_t>(b)] += pav[static_cast<std::size_t>(b)];
                    t += pav[static_cast<std::size_t>(b)];
                }
                CHECK(t <= v_total);
                child_total += t;
            }
            for (int b = 0; b < alpha; ++b)
                CHECK(child_sum[static_cast<std::size_t>(b)] <= pv[static_cast<std::size_t>(b)]);
            CHECK(child_total <= v_total);
        }
    }
}
