#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "vlmc/estimators.hpp"

using namespace vlmc;
using doctest::Approx;

namespace {

Context ctx(std::initializer_list<int> symbols) {
    Context c;
    for (int s : symbols) c.push_back(static_cast<char>(s));
    return c;
}

Sequence alternating(int n) {
    Sequence s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = static_cast<Symbol>(i % 2);
    return s;
}

Sequence constant(int n) { return Sequence(static_cast<std::size_t>(n), 0); }

ContextSet set_of(std::initializer_list<Context> cs) { return ContextSet(cs.begin(), cs.end()); }

} // namespace

TEST_CASE("complete tree enumeration counts") {
    CHECK(enumerate_complete_trees(2, 0).size() == 1);
    CHECK(enumerate_complete_trees(2, 1).size() == 2);
    CHECK(enumerate_complete_trees(2, 2).size() == 5);
    CHECK(enumerate_complete_trees(2, 3).size() == 26);
    CHECK(enumerate_complete_trees(3, 2).size() == 9);
    CHECK_THROWS(enumerate_complete_trees(2, 5));
}

TEST_CASE("partition validation reports the violated condition") {
    JointPartition ok;
    ok.sigma0 = set_of({ctx({0}), ctx({1})});
    CHECK_FALSE(validate_partition(ok, 2).has_value());

    JointPartition overlap;
    overlap.sigma0 = set_of({ctx({0})});
    overlap.sigma1 = set_of({ctx({0})});
    overlap.sigma2 = set_of({ctx({1})});
    auto v1 = validate_partition(overlap, 2);
    REQUIRE(v1.has_value());
    CHECK(v1->condition == "T1");

    JointPartition incomplete;
    incomplete.sigma0 = set_of({ctx({0})});
    auto v2 = validate_partition(incomplete, 2);
    REQUIRE(v2.has_value());
    CHECK(v2->condition == "T2");

    JointPartition suffix;
    suffix.sigma1 = set_of({ctx({0}), ctx({1}), ctx({0, 1})});
    suffix.sigma2 = set_of({Context{}});
    auto v3 = validate_partition(suffix, 2);
    REQUIRE(v3.has_value());
    CHECK(v3->condition == "T2");
}

TEST_CASE("single fit on an alternating sample selects the depth-1 tree") {
    const CountTrie trie(alternating(16), 2, 2);
    const SingleFit fit = fit_single(trie, PenaltyConfig{1.0}, 2);
    CHECK(fit.tree == set_of({ctx({0}), ctx({1})}));
    CHECK(fit.score == Approx(-4.0).epsilon(1e-12)); // two deterministic leaves, two penalties
    REQUIRE(fit.theta.at(ctx({0})).has_value());
    CHECK(fit.theta.at(ctx({0}))->at(1) == Approx(1.0));
}

TEST_CASE("single fit on a constant sample keeps the root") {
    const CountTrie trie(constant(4), 2, 2);
    const SingleFit fit = fit_single(trie, PenaltyConfig{1.0}, 2);
    CHECK(fit.tree == set_of({Context{}}));
}

TEST_CASE("single fit recovers memorylessness of a fair coin") {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        const Sequence seq = testutil::random_sequence(rng, 10000, 2);
        const CountTrie trie(seq, 2, 4);
        const SingleFit fit = fit_single(trie, PenaltyConfig{1.0}, 4);
        hits += fit.tree == set_of({Context{}});
    }
    CHECK(hits >= 18);
}

TEST_CASE("joint fit pools identical constant samples at the root") {
    const CountTrie t(constant(4), 2, 2);
    const EstimationResult fit = fit_joint(t, t, PenaltyConfig{1.0}, 2);
    CHECK(fit.partition.sigma0 == set_of({Context{}}));
    CHECK(fit.partition.sigma1.empty());
    CHECK(fit.partition.sigma2.empty());
    CHECK(fit.score == Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("joint fit shares the depth-1 tree of two alternating samples") {
    const CountTrie tx(alternating(32), 2, 2);
    const CountTrie ty(alternating(32), 2, 2);
    const EstimationResult fit = fit_joint(tx, ty, PenaltyConfig{1.0}, 2);
    CHECK(fit.partition.sigma0 == set_of({ctx({0}), ctx({1})}));
    CHECK(fit.partition.sigma1.empty());
    CHECK(fit.partition.sigma2.empty());
}

TEST_CASE("oracle agrees with itself on tiny instances") {
    const CountTrie t(constant(4), 2, 2);
    const EstimationResult fit = oracle_fit_joint(t, t, PenaltyConfig{1.0}, 2);
    CHECK(fit.partition.sigma0 == set_of({Context{}}));
    CHECK_THROWS(oracle_fit_joint(t, t, PenaltyConfig{1.0}, 5));
}

TEST_CASE("joint fit matches the exhaustive maximizer on random instances") {
    std::mt19937_64 rng(20240811);
    const double lambdas[] = {0.5, 1.0, 2.0};
    for (int trial = 0; trial < 80; ++trial) {
        const int n = 10 + static_cast<int>(rng() % 191);
        const int m = 10 + static_cast<int>(rng() % 191);
        Sequence x, y;
        if (trial % 2 == 0) {
            x = testutil::random_sequence(rng, n, 2);
            y = testutil::random_sequence(rng, m, 2);
        } else {
            x = testutil::random_markov_sequence(rng, n, 0.3, 0.7);
            y = testutil::random_markov_sequence(rng, m, 0.3, 0.6);
        }
        const CountTrie tx(x, 2, 2), ty(y, 2, 2);
        const PenaltyConfig pen{lambdas[trial % 3]};

        const EstimationResult fast = fit_joint(tx, ty, pen, 2);
        const EstimationResult slow = oracle_fit_joint(tx, ty, pen, 2);
        CHECK(std::abs(fast.score - slow.score) <= 1e-9);

        // Both returned partitions must reach the same maximum.
        CHECK(std::abs(criterion(fast.partition, tx, ty, pen) - slow.score) <= 1e-9);
        CHECK(std::abs(criterion(slow.partition, tx, ty, pen) - slow.score) <= 1e-9);
    }
}

TEST_CASE("recursion root value equals the recomputed criterion") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const CountTrie tx(testutil::random_markov_sequence(rng, 60 + static_cast<int>(rng() % 200), 0.2, 0.8),
                           2, 4);
        const CountTrie ty(testutil::random_sequence(rng, 60 + static_cast<int>(rng() % 200), 2), 2, 4);
        const PenaltyConfig pen{1.0};
        const EstimationResult fit = fit_joint(tx, ty, pen, 4);
        CHECK(std::abs(fit.score - criterion(fit.partition, tx, ty, pen)) <= 1e-9);
        CHECK_FALSE(validate_partition(fit.partition, 2).has_value());
    }
}

TEST_CASE("root split defers to the single-sample fits") {
    // Strongly different sources make the root choose a split.
    const CountTrie tx(alternating(64), 2, 3);
    const CountTrie ty(constant(64), 2, 3);
    const PenaltyConfig pen{1.0};
    const EstimationResult fit = fit_joint(tx, ty, pen, 3, true);
    REQUIRE(fit.scores.has_value());
    const auto& root = fit.scores->entries.front();
    REQUIRE(root.context.empty());
    if (root.chi_xy == 2) {
        ContextSet tau_x = fit.partition.sigma0;
        tau_x.insert(fit.partition.sigma1.begin(), fit.partition.sigma1.end());
        CHECK(tau_x == fit_single(tx, pen, 3).tree);
        ContextSet tau_y = fit.partition.sigma0;
        tau_y.insert(fit.partition.sigma2.begin(), fit.partition.sigma2.end());
        CHECK(tau_y == fit_single(ty, pen, 3).tree);
    }
    CHECK(root.chi_xy == 2);
}

TEST_CASE("score table satisfies the recursion inequalities") {
    std::mt19937_64 rng(123);
    const CountTrie tx(testutil::random_markov_sequence(rng, 200, 0.3, 0.7), 2, 3);
    const CountTrie ty(testutil::random_markov_sequence(rng, 150, 0.4, 0.6), 2, 3);
    const PenaltyConfig pen{1.0};
    const EstimationResult fit = fit_joint(tx, ty, pen, 3, true);
    REQUIRE(fit.scores.has_value());
    const double bn = pen.beta(tx.seq_length(), 2);
    const double bm = pen.beta(ty.seq_length(), 2);
    const double bnm = pen.beta(tx.seq_length() + ty.seq_length(), 2);
    for (const auto& e : fit.scores->entries) {
        const double rxy = log_ml_pooled(tx.counts_of(e.context), ty.counts_of(e.context)) - bnm;
        CHECK(e.vxy >= rxy - 1e-12);
        CHECK(e.vxy >= e.vx + e.vy - 1e-12);
        const double rx = log_ml_term(tx.counts_of(e.context)) - bn;
        const double ry = log_ml_term(ty.counts_of(e.context)) - bm;
        CHECK(e.vx >= rx - 1e-12);
        CHECK(e.vy >= ry - 1e-12);
        CHECK((e.chi_x == 0 || e.chi_x == 1));
        CHECK((e.chi_y == 0 || e.chi_y == 1));
        CHECK((e.chi_xy >= 1 && e.chi_xy <= 3));
    }
}

TEST_CASE("every proper suffix of a fitted context was observed") {
    std::mt19937_64 rng(321);
    for (int trial = 0; trial < 25; ++trial) {
        const CountTrie tx(testutil::random_markov_sequence(rng, 40 + static_cast<int>(rng() % 100), 0.2, 0.9),
                           2, 5);
        const CountTrie ty(testutil::random_sequence(rng, 40 + static_cast<int>(rng() % 100), 2), 2, 5);
        const EstimationResult fit = fit_joint(tx, ty, PenaltyConfig{1.0}, 5);
        ContextSet all = fit.partition.sigma0;
        all.insert(fit.partition.sigma1.begin(), fit.partition.sigma1.end());
        all.insert(fit.partition.sigma2.begin(), fit.partition.sigma2.end());
        for (const Context& s : all)
            for (std::size_t i = 1; i <= s.size(); ++i) {
                const Context suffix = s.substr(i);
                std::uint64_t pooled = 0;
                for (std::uint32_t c : tx.counts_of(suffix)) pooled += c;
                for (std::uint32_t c : ty.counts_of(suffix)) pooled += c;
                CHECK(pooled > 0);
            }
    }
}

TEST_CASE("identical inputs produce identical partitions") {
    std::mt19937_64 rng(55);
    const Sequence x = testutil::random_markov_sequence(rng, 300, 0.25, 0.75);
    const Sequence y = testutil::random_markov_sequence(rng, 200, 0.3, 0.6);
    const CountTrie tx(x, 2, 4), ty(y, 2, 4);
    const EstimationResult a = fit_joint(tx, ty, PenaltyConfig{1.0}, 4);
    const EstimationResult b = fit_joint(tx, ty, PenaltyConfig{1.0}, 4);
    CHECK(a.partition == b.partition);
    CHECK(a.score == b.score);
}

TEST_CASE("estimated contexts permute along with the alphabet") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const Sequence x = testutil::random_markov_sequence(rng, 150, 0.2, 0.7);
        const Sequence y = testutil::random_markov_sequence(rng, 120, 0.5, 0.8);
        Sequence px(x.size()), py(y.size());
        for (std::size_t i = 0; i < x.size(); ++i) px[i] = static_cast<Symbol>(1 - x[i]);
        for (std::size_t i = 0; i < y.size(); ++i) py[i] = static_cast<Symbol>(1 - y[i]);
        const CountTrie tx(x, 2, 3), ty(y, 2, 3), ptx(px, 2, 3), pty(py, 2, 3);
        const EstimationResult plain = fit_joint(tx, ty, PenaltyConfig{1.0}, 3);
        const EstimationResult flipped = fit_joint(ptx, pty, PenaltyConfig{1.0}, 3);

        auto flip = [](const ContextSet& in) {
            ContextSet out;
            for (const Context& s : in) {
                Context t = s;
                for (char& c : t) c = static_cast<char>(1 - c);
                out.insert(t);
            }
            return out;
        };
        CHECK(flipped.partition.sigma0 == flip(plain.partition.sigma0));
        CHECK(flipped.partition.sigma1 == flip(plain.partition.sigma1));
        CHECK(flipped.partition.sigma2 == flip(plain.partition.sigma2));
    }
}
