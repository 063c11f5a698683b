#ifndef VMM_TEST_FIXTURES_HPP
#define VMM_TEST_FIXTURES_HPP

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vmm/bictw.hpp"
#include "vmm/core.hpp"
#include "vmm/ctw.hpp"
#include "vmm/dectw.hpp"
#include "vmm/kt.hpp"
#include "vmm/registry.hpp"

namespace vmm::testing {

inline const Alphabet& abracadabra_alphabet() {
    static const Alphabet a = Alphabet::from_chars("abcdr");
    return a;
}

inline Sequence abracadabra() { return abracadabra_alphabet().encode("abracadabra"); }

struct LzRow {
    std::size_t m;
    std::size_t s;
    std::vector<std::string> phrases;
};

/// Phrases parsed from abracadabra, in parse order.
inline const std::vector<LzRow>& lzms_table() {
    static const std::vector<LzRow> rows{
        {0, 0, {"a", "b", "r", "ac", "ad", "ab", "ra"}},
        {0, 1, {"a", "b", "r", "ac", "ad", "ab", "ra", "br", "aca", "d", "abr"}},
        {1, 0, {"a", "ab", "b", "br", "r", "ra", "ac", "c", "ca", "ad", "d", "da", "abr"}},
        {1, 1, {"a", "ab", "b", "br", "r", "ra", "ac", "c", "ca", "ad", "d", "da", "abr", "bra", "aca", "ada", "abra"}},
        {2, 0, {"a", "ab", "abr", "b", "br", "bra", "r", "ra", "rac", "ac", "aca", "c", "ca", "cad", "ad", "ada", "d",
                "da", "dab", "abra"}},
        {2, 1, {"a", "ab", "abr", "b", "br", "bra", "r", "ra", "rac", "ac", "aca", "c", "ca", "cad", "ad", "ada", "d",
                "da", "dab", "abra", "brac", "acad", "adab"}},
        {2, 2, {"a", "ab", "abr", "b", "br", "bra", "r", "ra", "rac", "ac", "aca", "c", "ca", "cad", "ad", "ada", "d",
                "da", "dab", "abra", "brac", "acad", "adab", "raca", "cada", "dabr"}},
    };
    return rows;
}

template <typename Rng>
Sequence random_sequence(std::size_t n, std::size_t k, Rng& rng) {
    std::uniform_int_distribution<std::size_t> d(0, k - 1);
    Sequence s(n);
    for (auto& x : s) x = static_cast<Symbol>(d(rng));
    return s;
}

/// Sequence of low-entropy runs so that deep contexts get revisited.
template <typename Rng>
Sequence structured_sequence(std::size_t n, std::size_t k, Rng& rng) {
    std::uniform_int_distribution<std::size_t> d(0, k - 1);
    std::bernoulli_distribution repeat(0.7);
    Sequence s;
    while (s.size() < n) {
        if (s.size() >= 3 && repeat(rng)) {
            s.push_back(s[s.size() - 3]);
        } else {
            s.push_back(static_cast<Symbol>(d(rng)));
        }
    }
    return s;
}

/// Every binary sequence of length exactly n, in lexicographic order.
inline std::vector<Sequence> all_binary(std::size_t n) {
    std::vector<Sequence> out;
    for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) {
        Sequence s(n);
        for (std::size_t j = 0; j < n; ++j) s[j] = (v >> (n - 1 - j)) & 1U;
        out.push_back(std::move(s));
    }
    return out;
}

/// Number of positions i >= D of `train` whose preceding |s| symbols equal s
/// and whose symbol is `bit`.
inline std::uint64_t oracle_count(const Sequence& train, const Sequence& s, std::size_t depth, Symbol bit) {
    std::uint64_t n = 0;
    for (std::size_t i = depth; i < train.size(); ++i) {
        if (train[i] != bit) continue;
        bool match = true;
        for (std::size_t j = 0; j < s.size() && match; ++j) match = train[i - s.size() + j] == s[j];
        if (match) ++n;
    }
    return n;
}

/// Mixture over all D-bounded tree sources of the frozen-count KT
/// probability of `test` (with `history`, |history| = D, preceding it).
inline double oracle_mixture(const Sequence& train, const Sequence& history, const Sequence& test, std::size_t depth,
                             double alpha = kt_alpha) {
    const Sequence joined = concat(history, test);
    double total = 0.0;
    for (const auto& model : enumerate_models(depth)) {
        double p = model.weight();
        for (std::size_t i = 0; i < test.size(); ++i) {
            const std::size_t pos = depth + i;
            for (const auto& s : model.suffixes) {
                bool match = true;
                for (std::size_t j = 0; j < s.size() && match; ++j) match = joined[pos - s.size() + j] == s[j];
                if (!match) continue;
                p *= kt_conditional(oracle_count(train, s, depth, 0), oracle_count(train, s, depth, 1),
                                    static_cast<int>(test[i]), alpha);
                break;
            }
        }
        total += p;
    }
    return total;
}

/// log2 P(test | history) computed without sessions: the normalized block
/// probability for the CTW family, the product of conditionals otherwise.
inline double reference_log2(Algorithm alg, const Predictor& p, const Sequence& test, const Sequence& history) {
    if (alg == Algorithm::ctw) return std::log2(dynamic_cast<const CtwPredictor&>(p).sequence_prob(test, history));
    if (alg == Algorithm::bictw) {
        const auto& b = dynamic_cast<const BiCtwPredictor&>(p);
        CtwPredictor bits(2, b.params());
        bits.restore(b.tree(), b.tail());
        return std::log2(bits.sequence_prob(b.to_bits(test), b.to_bits(history)));
    }
    if (alg == Algorithm::dectw) {
        const auto& d = dynamic_cast<const DeCtwPredictor&>(p);
        double ln = 0.0;
        for (const auto& c : d.components()) {
            Sequence proj;
            for (Symbol s : history)
                if (c.local[s] >= 0) proj.push_back(static_cast<Symbol>(c.local[s]));
            Sequence contexts = padded_context(c.tail, proj, d.params().depth);
            std::vector<int> bits;
            for (Symbol s : test)
                if (c.local[s] >= 0) {
                    contexts.push_back(static_cast<Symbol>(c.local[s]));
                    bits.push_back(static_cast<int>(c.side[s]));
                }
            if (!bits.empty()) ln += ctw_log_block_prob(c.tree, d.params().alpha, contexts, bits);
        }
        return ln / std::log(2.0);
    }
    double chain = 0.0;
    Sequence ctx = history;
    for (Symbol x : test) {
        chain += std::log2(p.prob(x, ctx));
        ctx.push_back(x);
    }
    return chain;
}

/// Collects warnings while alive, then restores the previous handler.
class CaptureWarnings {
public:
    CaptureWarnings() : saved_(warning_handler()) {
        set_warning_handler([this](std::string_view m) { messages.emplace_back(m); });
    }
    ~CaptureWarnings() { set_warning_handler(saved_); }
    CaptureWarnings(const CaptureWarnings&) = delete;
    CaptureWarnings& operator=(const CaptureWarnings&) = delete;

    std::vector<std::string> messages;

private:
    WarningHandler saved_;
};

/// A small valid parameter vector for each algorithm, for alphabets of size <= 6.
inline std::vector<std::pair<Algorithm, Params>> small_configs(std::size_t k) {
    std::vector<std::pair<Algorithm, Params>> out{
        {Algorithm::lz78, {}},
        {Algorithm::lzms, {{"M", 2}, {"S", 1}}},
        {Algorithm::ppmc, {{"D", 3}}},
        {Algorithm::ppmc, {{"D", 2}, {"base", 1}}},
        {Algorithm::ppmc, {{"D", 2}, {"exclusion", 0}}},
        {Algorithm::bictw, {{"D", 5}}},
        {Algorithm::dectw, {{"D", 3}}},
        {Algorithm::pst, {{"Pmin", 0.0}, {"gamma", 0.02}, {"D", 4}}},
        {Algorithm::pststar, {{"Nmin", 1}, {"hits", 1}, {"gamma", 0.02}, {"D", 4}}},
    };
    if (k == 2) out.push_back({Algorithm::ctw, {{"D", 3}}});
    return out;
}

}  // namespace vmm::testing

#endif  // VMM_TEST_FIXTURES_HPP
