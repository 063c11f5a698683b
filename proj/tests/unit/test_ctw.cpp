#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "common/fixtures.hpp"
#include "vmm/ctw.hpp"
#include "vmm/kt.hpp"

using namespace vmm;
using namespace vmm::testing;

TEST(Kt, FigureLeafValue) { EXPECT_EQ(kt_conditional(0, 3, 0, 0.5), 1.0 / 8.0); }

TEST(Kt, ComplementSumsToOne) {
    for (std::uint64_t a = 0; a < 6; ++a)
        for (std::uint64_t b = 0; b < 6; ++b)
            EXPECT_DOUBLE_EQ(kt_conditional(a, b, 0) + kt_conditional(a, b, 1), 1.0);
}

namespace {

double kt_block(std::uint64_t zeros, std::uint64_t ones) {
    KtCounter c;
    double p = 1.0;
    for (std::uint64_t i = 0; i < zeros; ++i) {
        p *= kt_conditional(c, 0);
        c.add(0);
    }
    for (std::uint64_t i = 0; i < ones; ++i) {
        p *= kt_conditional(c, 1);
        c.add(1);
    }
    return p;
}

// Dirichlet(1/2, 1/2) integral with theta = sin^2(u), midpoint rule.
double kt_integral(std::uint64_t zeros, std::uint64_t ones) {
    const int n = 200000;
    const double pi = std::acos(-1.0);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) * (pi / 2) / n;
        const double t = std::sin(u) * std::sin(u);
        sum += std::pow(1 - t, static_cast<double>(zeros)) * std::pow(t, static_cast<double>(ones));
    }
    return sum * (pi / 2) / n * 2 / pi;
}

}  // namespace

TEST(Kt, SequentialFormMatchesDirichletIntegral) {
    EXPECT_NEAR(kt_block(2, 2), 3.0 / 128.0, 1e-15);
    for (std::uint64_t a = 0; a < 5; ++a)
        for (std::uint64_t b = 0; b < 5; ++b) EXPECT_NEAR(kt_block(a, b), kt_integral(a, b), 1e-9);
}

TEST(ContextTree, FigureCounts) {
    const Sequence q = Alphabet::binary().encode("101011010");
    CtwPredictor p(2, {2, 0.5, false});
    p.train({q});
    const auto& t = p.tree();
    const Alphabet b = Alphabet::binary();
    auto counts = [&](const char* s) { return t.counts(b.encode(s)); };
    EXPECT_EQ(counts(""), (KtCounter{3, 4}));
    EXPECT_EQ(counts("0"), (KtCounter{0, 3}));
    EXPECT_EQ(counts("1"), (KtCounter{3, 1}));
    EXPECT_EQ(counts("00"), (KtCounter{0, 0}));
    EXPECT_EQ(counts("10"), (KtCounter{0, 3}));
    EXPECT_EQ(counts("01"), (KtCounter{2, 1}));
    EXPECT_EQ(counts("11"), (KtCounter{1, 0}));
}

TEST(TreeSources, ModelCounts) {
    const std::size_t expected[] = {1, 2, 5, 26, 677};
    for (std::size_t d = 0; d <= 4; ++d) EXPECT_EQ(enumerate_models(d).size(), expected[d]);
    EXPECT_THROW(enumerate_models(5), DataError);
}

TEST(TreeSources, WeightsSumToOne) {
    for (std::size_t d = 0; d <= 3; ++d) {
        double sum = 0.0;
        for (const auto& m : enumerate_models(d)) sum += m.weight();
        EXPECT_NEAR(sum, 1.0, 1e-12) << "D=" << d;
    }
}

TEST(TreeSources, CostOfFullTreeAndRoot) {
    for (const auto& m : enumerate_models(2)) {
        if (m.suffixes.size() == 1) {
            EXPECT_EQ(m.cost, 1);
        }
        if (m.suffixes.size() == 4) {
            EXPECT_EQ(m.cost, 3);
        }
    }
}

TEST(Ctw, MixtureOracleExhaustive) {
    for (std::size_t d = 1; d <= 2; ++d)
        for (std::size_t n = 0; n <= 6; ++n)
            for (const auto& train : all_binary(n)) {
                CtwPredictor p(2, {d, 0.5, false});
                p.train({train});
                for (std::size_t t = 1; t <= 4; ++t)
                    for (const auto& test : all_binary(t)) {
                        const Sequence history = all_binary(d)[(n + t) % (std::size_t{1} << d)];
                        const double oracle = oracle_mixture(train, history, test, d);
                        ASSERT_NEAR(p.sequence_prob(test, history), oracle, 1e-10);
                        ASSERT_NEAR(std::exp2(sequence_log_prob(p, test, history)), oracle, 1e-10);
                    }
            }
}

TEST(Ctw, ConditionalsSumToOne) {
    std::mt19937_64 rng(2);
    for (int it = 0; it < 300; ++it) {
        CtwPredictor p(2, {rng() % 6, 0.5, false});
        p.train({structured_sequence(rng() % 40, 2, rng)});
        auto s = p.session(random_sequence(rng() % 8, 2, rng));
        for (Symbol x : random_sequence(10, 2, rng)) {
            ASSERT_NEAR(s->prob(0) + s->prob(1), 1.0, 1e-12);
            s->consume(x);
        }
    }
}

TEST(Ctw, SessionMarkAndRollbackRestoreState) {
    std::mt19937_64 rng(4);
    CtwPredictor p(2, {4, 0.5, false});
    p.train({structured_sequence(60, 2, rng)});
    CtwSession s(p.tree(), 0.5, false, Sequence{0, 1, 1, 0});
    s.update(1, 1);
    const double before0 = s.log_prob(0);
    const double block = s.log_block_prob();
    const auto m = s.mark();
    s.update(0, 0);
    s.update(1, 1);
    s.rollback(m);
    EXPECT_EQ(s.log_prob(0), before0);
    EXPECT_EQ(s.log_block_prob(), block);
}

TEST(Ctw, AdaptiveModeUpdatesCounts) {
    CtwPredictor frozen(2, {0, 0.5, false});
    CtwPredictor adaptive(2, {0, 0.5, true});
    frozen.train({Sequence{}});
    adaptive.train({Sequence{}});
    auto f = frozen.session({});
    auto a = adaptive.session({});
    f->consume(1);
    a->consume(1);
    EXPECT_DOUBLE_EQ(f->prob(1), 0.5);
    EXPECT_DOUBLE_EQ(a->prob(1), 0.75);
}

TEST(Ctw, RejectsNonBinaryAlphabet) { EXPECT_THROW(CtwPredictor(3, {}), DataError); }

TEST(Ctw, ContextLongerThanDepthUsesSuffix) {
    CtwPredictor p(2, {2, 0.5, false});
    p.train({Alphabet::binary().encode("101011010")});
    EXPECT_EQ(p.prob(1, Sequence{0, 0, 0, 1, 0}), p.prob(1, Sequence{1, 0}));
}
