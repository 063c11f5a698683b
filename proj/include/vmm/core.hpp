#ifndef VMM_CORE_HPP
#define VMM_CORE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace vmm {

using Symbol = std::uint32_t;
using Sequence = std::vector<Symbol>;
using SequenceView = std::span<const Symbol>;

/// Input that cannot be used: bad alphabet, bad symbol, bad parameters.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A predictor produced a conditional probability that is not strictly positive.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::size_t position)
        : std::runtime_error(what), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// Warnings are routed through a replaceable sink so tools and tests can
// capture or silence them.
using WarningHandler = std::function<void(std::string_view)>;

inline WarningHandler& warning_handler() {
    static WarningHandler handler = [](std::string_view msg) {
        std::clog << "warning: " << msg << '\n';
    };
    return handler;
}

inline void set_warning_handler(WarningHandler handler) { warning_handler() = std::move(handler); }

inline void warn(std::string_view msg) {
    if (warning_handler()) warning_handler()(msg);
}

/// Finite symbol set with a fixed token <-> index mapping.
class Alphabet {
public:
    Alphabet() = default;

    explicit Alphabet(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
        if (tokens_.size() < 2) throw DataError("alphabet needs at least two symbols");
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            if (!index_.emplace(tokens_[i], static_cast<Symbol>(i)).second)
                throw DataError("duplicate alphabet symbol '" + tokens_[i] + "'");
        }
    }

    /// One symbol per character of `chars`, in order.
    static Alphabet from_chars(std::string_view chars) {
        std::vector<std::string> tokens;
        for (char c : chars) tokens.emplace_back(1, c);
        return Alphabet(std::move(tokens));
    }

    /// All 256 byte values; symbol i is the byte with value i.
    static Alphabet bytes() {
        std::vector<std::string> tokens;
        for (int i = 0; i < 256; ++i) tokens.emplace_back(1, static_cast<char>(i));
        return Alphabet(std::move(tokens));
    }

    static Alphabet binary() { return from_chars("01"); }

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::string& symbol(Symbol i) const { return tokens_.at(i); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    Symbol index(std::string_view token) const {
        auto it = index_.find(std::string(token));
        if (it == index_.end()) throw DataError("symbol '" + std::string(token) + "' not in alphabet");
        return it->second;
    }

    bool contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

    /// Encode a string whose characters are single-character tokens.
    Sequence encode(std::string_view text) const {
        Sequence out;
        out.reserve(text.size());
        for (char c : text) out.push_back(index(std::string_view(&c, 1)));
        return out;
    }

    std::string decode(SequenceView seq) const {
        std::string out;
        for (Symbol s : seq) out += symbol(s);
        return out;
    }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.tokens_ == b.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, Symbol> index_;
};

inline void validate(SequenceView seq, std::size_t alphabet_size) {
    for (std::size_t i = 0; i < seq.size(); ++i)
        if (seq[i] >= alphabet_size)
            throw DataError("symbol index " + std::to_string(seq[i]) + " at position " + std::to_string(i) +
                            " outside alphabet of size " + std::to_string(alphabet_size));
}

inline Sequence concat(SequenceView a, SequenceView b) {
    Sequence out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

/// Sequential scoring state. One per evaluation; not shared between threads.
class Session {
public:
    virtual ~Session() = default;

    /// Conditional probability of `sym` given everything consumed so far.
    virtual double prob(Symbol sym) const = 0;

    /// Append `sym` to the context.
    virtual void consume(Symbol sym) = 0;

    /// Full conditional distribution over the alphabet.
    virtual std::vector<double> distribution(std::size_t alphabet_size) const {
        std::vector<double> out(alphabet_size);
        for (std::size_t s = 0; s < alphabet_size; ++s) out[s] = prob(static_cast<Symbol>(s));
        return out;
    }
};

/// Common contract of every trained sequence model.
///
/// Training is single-writer; after `train` returns the predictor is frozen and
/// `prob` / `session` may be called concurrently.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual std::size_t alphabet_size() const = 0;

    /// Train on a set of sequences. Contexts never cross sequence boundaries.
    virtual void train(const std::vector<Sequence>& sequences) = 0;

    /// P(sym | context).
    virtual double prob(Symbol sym, SequenceView context) const = 0;

    /// A scoring session whose initial context is `history`.
    virtual std::unique_ptr<Session> session(SequenceView history) const = 0;
};

/// Session for predictors whose conditional is a pure function of the
/// context: keeps the full context and calls Predictor::prob.
class ContextSession : public Session {
public:
    ContextSession(const Predictor& predictor, SequenceView history)
        : predictor_(predictor), context_(history.begin(), history.end()) {}

    double prob(Symbol sym) const override { return predictor_.prob(sym, context_); }
    void consume(Symbol sym) override { context_.push_back(sym); }

private:
    const Predictor& predictor_;
    Sequence context_;
};

/// log2 P(test | history); throws NumericError on a non-positive conditional.
inline double sequence_log_prob(const Predictor& predictor, SequenceView test, SequenceView history = {}) {
    auto sess = predictor.session(history);
    double total = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const double p = sess->prob(test[i]);
        if (!(p > 0.0) || !std::isfinite(p))
            throw NumericError("non-positive conditional probability " + std::to_string(p) + " at test position " +
                                   std::to_string(i),
                               i);
        total += std::log2(p);
        sess->consume(test[i]);
    }
    return total;
}

/// Average log-loss in bits per symbol.
inline double average_log_loss(const Predictor& predictor, SequenceView test, SequenceView history = {}) {
    if (test.empty()) throw DataError("average log-loss of an empty test sequence");
    return -sequence_log_prob(predictor, test, history) / static_cast<double>(test.size());
}

/// First ceil(n/2) symbols train, the rest test.
inline std::pair<Sequence, Sequence> half_split(SequenceView seq) {
    if (seq.size() < 2) throw DataError("half split needs at least two symbols");
    const std::size_t n_train = (seq.size() + 1) / 2;
    return {Sequence(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(n_train)),
            Sequence(seq.begin() + static_cast<std::ptrdiff_t>(n_train), seq.end())};
}

/// Symbols that immediately follow each (possibly overlapping) occurrence of
/// `context` in `q`, in order of occurrence.
inline Sequence subsequence_after_context(SequenceView q, SequenceView context) {
    Sequence out;
    if (context.size() >= q.size()) return out;
    for (std::size_t i = context.size(); i < q.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < context.size() && match; ++j)
            match = q[i - context.size() + j] == context[j];
        if (match) out.push_back(q[i]);
    }
    return out;
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

/// Last `n` symbols of the concatenation of `sequences` (or fewer if short).
inline Sequence tail_of(const std::vector<Sequence>& sequences, std::size_t n) {
    Sequence out;
    for (auto it = sequences.rbegin(); it != sequences.rend() && out.size() < n; ++it) {
        const std::size_t take = std::min(n - out.size(), it->size());
        out.insert(out.begin(), it->end() - static_cast<std::ptrdiff_t>(take), it->end());
    }
    return out;
}

/// Context of exactly `n` symbols: the end of `tail ++ history`, left-padded
/// with symbol 0 if that is still too short.
inline Sequence padded_context(SequenceView tail, SequenceView history, std::size_t n) {
    Sequence joined;
    if (history.size() < n) {
        joined.assign(tail.begin(), tail.end());
        joined.insert(joined.end(), history.begin(), history.end());
    } else {
        joined.assign(history.end() - static_cast<std::ptrdiff_t>(n), history.end());
    }
    if (joined.size() > n) joined.erase(joined.begin(), joined.end() - static_cast<std::ptrdiff_t>(n));
    if (joined.size() < n) joined.insert(joined.begin(), n - joined.size(), Symbol{0});
    return joined;
}

}  // namespace vmm

#endif  // VMM_CORE_HPP
