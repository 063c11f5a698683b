#ifndef VMM_BICTW_HPP
#define VMM_BICTW_HPP

#include <bit>
#include <cmath>
#include <memory>
#include <vector>

#include "vmm/ctw.hpp"

namespace vmm {

/// Binary CTW run over fixed-width big-endian codewords of the symbol index.
/// Depth is measured in bits. When k is not a power of two the mass of the
/// unused codewords is renormalized away.
class BiCtwPredictor : public Predictor {
public:
    BiCtwPredictor(std::size_t alphabet_size, CtwParams params)
        : k_(alphabet_size), width_(code_width(alphabet_size)), params_(params), tree_(params.depth, 2) {
        if (k_ < 2) throw DataError("BI-CTW needs at least two symbols");
        // codewords >= k form <= width dyadic blocks, each given by a bit prefix
        if (!std::has_single_bit(k_)) {
            for (std::size_t j = width_; j-- > 0;) {
                if ((k_ >> j) & 1U) continue;
                invalid_prefixes_.push_back(prefix_bits((k_ >> j) | 1U, width_ - j));
            }
            invalid_prefixes_.push_back(prefix_bits(k_, width_));
        }
    }

    static std::size_t code_width(std::size_t k) {
        std::size_t w = 0;
        while ((std::size_t{1} << w) < k) ++w;
        return w;
    }

    std::size_t alphabet_size() const override { return k_; }
    std::size_t width() const noexcept { return width_; }
    const CtwParams& params() const noexcept { return params_; }
    const ContextTree& tree() const noexcept { return tree_; }
    const Sequence& tail() const noexcept { return tail_; }

    Sequence codeword(Symbol s) const { return prefix_bits(s, width_); }

    Sequence to_bits(SequenceView seq) const {
        Sequence out;
        out.reserve(seq.size() * width_);
        for (Symbol s : seq) {
            for (std::size_t j = width_; j-- > 0;) out.push_back((s >> j) & 1U);
        }
        return out;
    }

    void train(const std::vector<Sequence>& sequences) override {
        tree_ = ContextTree(params_.depth, 2);
        std::vector<Sequence> streams;
        for (const auto& q : sequences) {
            validate(q, k_);
            streams.push_back(to_bits(q));
            std::vector<int> bits(streams.back().begin(), streams.back().end());
            train_context_tree(tree_, streams.back(), bits);
        }
        tail_ = tail_of(streams, params_.depth);
    }

    void restore(ContextTree tree, Sequence tail) {
        tree_ = std::move(tree);
        tail_ = std::move(tail);
    }

    double prob(Symbol sym, SequenceView context) const override { return session(context)->prob(sym); }

    std::unique_ptr<Session> session(SequenceView history) const override {
        const Sequence bits = to_bits(history);
        return std::make_unique<CodeSession>(
            *this, CtwSession(tree_, params_.alpha, params_.adaptive, padded_context(tail_, bits, params_.depth)));
    }

private:
    static Sequence prefix_bits(std::size_t value, std::size_t len) {
        Sequence out(len);
        for (std::size_t j = 0; j < len; ++j) out[j] = (value >> (len - 1 - j)) & 1U;
        return out;
    }

    class CodeSession : public Session {
    public:
        CodeSession(const BiCtwPredictor& p, CtwSession s) : p_(p), s_(std::move(s)) {}

        double prob(Symbol sym) const override {
            if (sym >= p_.k_) return 0.0;
            return std::exp(log_mass(p_.codeword(sym))) / normalizer();
        }

        std::vector<double> distribution(std::size_t alphabet_size) const override {
            const double z = normalizer();
            std::vector<double> out(alphabet_size);
            for (std::size_t s = 0; s < alphabet_size; ++s)
                out[s] = std::exp(log_mass(p_.codeword(static_cast<Symbol>(s)))) / z;
            return out;
        }

        void consume(Symbol sym) override {
            for (Symbol b : p_.codeword(sym)) s_.update(static_cast<int>(b), b);
        }

    private:
        // log P(prefix bits | consumed); the session is restored afterwards
        double log_mass(const Sequence& prefix) const {
            const std::size_t m = s_.mark();
            double lp = 0.0;
            for (Symbol b : prefix) {
                lp += s_.log_prob(static_cast<int>(b));
                s_.update(static_cast<int>(b), b);
            }
            s_.rollback(m);
            return lp;
        }

        double normalizer() const {
            double invalid = 0.0;
            for (const auto& prefix : p_.invalid_prefixes_) invalid += std::exp(log_mass(prefix));
            return 1.0 - invalid;
        }

        const BiCtwPredictor& p_;
        mutable CtwSession s_;
    };

    std::size_t k_;
    std::size_t width_;
    CtwParams params_;
    ContextTree tree_;
    Sequence tail_;
    std::vector<Sequence> invalid_prefixes_;
};

}  // namespace vmm

#endif  // VMM_BICTW_HPP
