#include <gtest/gtest.h>

#include <random>

#include "common/fixtures.hpp"
#include "vmm/bictw.hpp"

using namespace vmm;
using namespace vmm::testing;

TEST(BiCtw, CodeWidth) {
    EXPECT_EQ(BiCtwPredictor::code_width(2), 1u);
    EXPECT_EQ(BiCtwPredictor::code_width(5), 3u);
    EXPECT_EQ(BiCtwPredictor::code_width(256), 8u);
    EXPECT_EQ(BiCtwPredictor::code_width(257), 9u);
}

TEST(BiCtw, BigEndianCodewords) {
    BiCtwPredictor p(5, {});
    EXPECT_EQ(p.codeword(4), (Sequence{1, 0, 0}));
    EXPECT_EQ(p.codeword(1), (Sequence{0, 0, 1}));
    EXPECT_EQ(p.to_bits(Sequence{3, 2}), (Sequence{0, 1, 1, 0, 1, 0}));
}

TEST(BiCtw, NormalizesOverValidCodewords) {
    std::mt19937_64 rng(1);
    for (int it = 0; it < 1000; ++it) {
        const std::size_t k = 2 + rng() % 5;
        BiCtwPredictor p(k, {rng() % 7, 0.5, false});
        p.train({structured_sequence(1 + rng() % 40, k, rng)});
        const Sequence ctx = random_sequence(rng() % 6, k, rng);
        double sum = 0.0;
        for (Symbol s = 0; s < k; ++s) sum += p.prob(s, ctx);
        ASSERT_NEAR(sum, 1.0, 1e-9) << "k=" << k;
    }
}

TEST(BiCtw, DistributionMatchesProb) {
    std::mt19937_64 rng(2);
    BiCtwPredictor p(6, {6, 0.5, false});
    p.train({structured_sequence(80, 6, rng)});
    auto s = p.session(Sequence{1, 2});
    const auto d = s->distribution(6);
    for (Symbol x = 0; x < 6; ++x) EXPECT_NEAR(d[x], s->prob(x), 1e-15);
}

TEST(BiCtw, PowerOfTwoAlphabetEqualsBitChainRule) {
    std::mt19937_64 rng(3);
    for (int it = 0; it < 50; ++it) {
        BiCtwPredictor p(4, {4, 0.5, false});
        p.train({structured_sequence(60, 4, rng)});
        CtwPredictor bits(2, {4, 0.5, false});
        bits.restore(p.tree(), p.tail());
        const Sequence history = random_sequence(3, 4, rng);
        const Sequence test = random_sequence(10, 4, rng);
        EXPECT_NEAR(sequence_log_prob(p, test, history), sequence_log_prob(bits, p.to_bits(test), p.to_bits(history)),
                    1e-9);
    }
}

TEST(BiCtw, BinaryAlphabetEqualsCtw) {
    std::mt19937_64 rng(4);
    const Sequence q = structured_sequence(50, 2, rng);
    BiCtwPredictor a(2, {3, 0.5, false});
    CtwPredictor b(2, {3, 0.5, false});
    a.train({q});
    b.train({q});
    const Sequence t = random_sequence(20, 2, rng);
    EXPECT_NEAR(sequence_log_prob(a, t), sequence_log_prob(b, t), 1e-12);
}
