#include <gtest/gtest.h>

#include "vmm/core.hpp"

using namespace vmm;

TEST(Alphabet, IndexAndDecode) {
    const Alphabet a = Alphabet::from_chars("abcdr");
    EXPECT_EQ(a.size(), 5u);
    EXPECT_EQ(a.index("r"), 4u);
    EXPECT_EQ(a.decode(a.encode("abracadabra")), "abracadabra");
    EXPECT_THROW(a.index("z"), DataError);
}

TEST(Alphabet, RejectsTooSmallOrDuplicate) {
    EXPECT_THROW(Alphabet(std::vector<std::string>{"a"}), DataError);
    EXPECT_THROW(Alphabet(std::vector<std::string>{"a", "b", "a"}), DataError);
}

TEST(Alphabet, Bytes) {
    const Alphabet b = Alphabet::bytes();
    EXPECT_EQ(b.size(), 256u);
    EXPECT_EQ(b.index(std::string(1, '\xff')), 255u);
}

TEST(Validate, OutOfRangeSymbol) {
    EXPECT_NO_THROW(validate(Sequence{0, 1, 2}, 3));
    EXPECT_THROW(validate(Sequence{0, 3}, 3), DataError);
}

TEST(SubsequenceAfterContext, PaperExample) {
    const Alphabet b = Alphabet::binary();
    EXPECT_EQ(b.decode(subsequence_after_context(b.encode("101011010"), b.encode("101"))), "010");
}

TEST(SubsequenceAfterContext, EmptyContextIsWholeSequence) {
    const Sequence q{1, 0, 1};
    EXPECT_EQ(subsequence_after_context(q, {}), q);
}

TEST(SubsequenceAfterContext, ContextLongerThanSequence) {
    EXPECT_TRUE(subsequence_after_context(Sequence{1, 0}, Sequence{1, 0, 1}).empty());
    EXPECT_TRUE(subsequence_after_context(Sequence{1, 0}, Sequence{1, 0}).empty());
}

TEST(HalfSplit, CeilingGoesToTraining) {
    auto [a, b] = half_split(Sequence{1, 2, 3, 4, 5});
    EXPECT_EQ(a, (Sequence{1, 2, 3}));
    EXPECT_EQ(b, (Sequence{4, 5}));
    EXPECT_THROW(half_split(Sequence{1}), DataError);
}

namespace {

/// P(sym) = table[sym], regardless of context.
class FixedPredictor : public Predictor {
public:
    explicit FixedPredictor(std::vector<double> t) : t_(std::move(t)) {}
    std::size_t alphabet_size() const override { return t_.size(); }
    void train(const std::vector<Sequence>&) override {}
    double prob(Symbol s, SequenceView) const override { return t_[s]; }
    std::unique_ptr<Session> session(SequenceView h) const override {
        return std::make_unique<ContextSession>(*this, h);
    }

private:
    std::vector<double> t_;
};

}  // namespace

TEST(LogLoss, UniformBinaryIsOneBit) {
    FixedPredictor p({0.5, 0.5});
    EXPECT_DOUBLE_EQ(average_log_loss(p, Sequence{0, 1, 1, 0}), 1.0);
}

TEST(LogLoss, EmptyTestIsAnError) {
    FixedPredictor p({0.5, 0.5});
    EXPECT_THROW(average_log_loss(p, Sequence{}), DataError);
}

TEST(LogLoss, ZeroProbabilityIsNumericFailure) {
    FixedPredictor p({1.0, 0.0});
    try {
        sequence_log_prob(p, Sequence{0, 0, 1});
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_EQ(e.position(), 2u);
    }
}

TEST(LogLoss, DeterministicPredictorHasZeroLoss) {
    FixedPredictor p({1.0, 0.0});
    EXPECT_EQ(average_log_loss(p, Sequence{0, 0, 0}), 0.0);
}

TEST(TailOf, SpansSequences) {
    EXPECT_EQ(tail_of({{1, 2}, {3}}, 2), (Sequence{2, 3}));
    EXPECT_EQ(tail_of({{1}}, 3), (Sequence{1}));
}

TEST(PaddedContext, PadsWithZeroAndPrefersHistory) {
    EXPECT_EQ(padded_context(Sequence{5, 6}, Sequence{7}, 4), (Sequence{0, 5, 6, 7}));
    EXPECT_EQ(padded_context(Sequence{5, 6}, Sequence{7, 8, 9}, 2), (Sequence{8, 9}));
    EXPECT_EQ(padded_context(Sequence{5, 6}, Sequence{}, 0), Sequence{});
}

TEST(LogAddExp, MatchesDirect) {
    EXPECT_NEAR(log_add_exp(std::log(0.25), std::log(0.5)), std::log(0.75), 1e-15);
    EXPECT_EQ(log_add_exp(-std::numeric_limits<double>::infinity(), 1.0), 1.0);
}

TEST(Warnings, HandlerCanBeReplaced) {
    std::vector<std::string> seen;
    auto old = warning_handler();
    set_warning_handler([&](std::string_view m) { seen.emplace_back(m); });
    warn("hello");
    set_warning_handler(old);
    ASSERT_EQ(seen.size(), 1u);
    EXPECT_EQ(seen[0], "hello");
}
