#ifndef VMM_LZ_HPP
#define VMM_LZ_HPP

#include <algorithm>
#include <deque>
#include <memory>
#include <utility>
#include <vector>

#include "vmm/core.hpp"
#include "vmm/count_trie.hpp"

namespace vmm {

struct LzMsParams {
    std::size_t back_shift = 0;  // M
    std::size_t shifts = 0;      // S: extra input-shifting passes
};

/// LZ78 phrase trie over a k-ary alphabet.
///
/// Only internal nodes (dictionary phrases plus the root) are materialized.
/// A missing child is an implicit leaf with count 1, so a node's count is the
/// number of leaves below it and the root of an empty dictionary holds k.
class LzTrie {
public:
    using NodeId = CountTrie::NodeId;

    explicit LzTrie(std::size_t alphabet_size = 2) : k_(alphabet_size) { trie_.node(CountTrie::root).count = k_; }

    std::size_t alphabet_size() const noexcept { return k_; }
    const CountTrie& trie() const noexcept { return trie_; }
    std::size_t phrase_count() const noexcept { return trie_.size() - 1; }

    /// Dictionary phrases in the order they were parsed.
    std::vector<Sequence> phrases() const {
        std::vector<Sequence> out;
        out.reserve(phrase_count());
        for (NodeId id = 1; id < trie_.size(); ++id) out.push_back(trie_.path(id));
        return out;
    }

    /// Internal child of `id` for `sym`, or CountTrie::none if it is a leaf.
    NodeId internal_child(NodeId id, Symbol sym) const { return trie_.child(id, sym); }

    std::uint64_t child_count(NodeId id, Symbol sym) const {
        const NodeId c = trie_.child(id, sym);
        return c == CountTrie::none ? 1 : trie_.node(c).count;
    }

    std::uint64_t total_count(NodeId id) const { return trie_.node(id).count; }

    /// Parse one phrase of `q` starting at `start`. Returns the end position
    /// (one past the new phrase's last symbol), or 0 if the input ran out
    /// while still inside the dictionary.
    std::size_t parse_phrase(SequenceView q, std::size_t start) {
        NodeId cur = CountTrie::root;
        for (std::size_t pos = start; pos < q.size(); ++pos) {
            const NodeId next = trie_.child(cur, q[pos]);
            if (next != CountTrie::none) {
                cur = next;
                continue;
            }
            const NodeId fresh = trie_.add_child(cur, q[pos]);
            trie_.node(fresh).count = k_;
            for (NodeId up = cur; up != CountTrie::none; up = trie_.node(up).parent) trie_.node(up).count += k_ - 1;
            return pos + 1;
        }
        return 0;
    }

    static LzTrie from_trie(std::size_t alphabet_size, CountTrie trie) {
        LzTrie t(alphabet_size);
        t.trie_ = std::move(trie);
        return t;
    }

    friend bool operator==(const LzTrie&, const LzTrie&) = default;

private:
    std::size_t k_;
    CountTrie trie_;
};

/// Input shifting (S extra passes from offsets 1..S) and back-shift parsing
/// (resume min(M, |phrase|) symbols before the end of each phrase) into one
/// shared dictionary. Each sequence is parsed on its own.
inline LzTrie lzms_parse(const std::vector<Sequence>& sequences, std::size_t alphabet_size, LzMsParams params) {
    LzTrie trie(alphabet_size);
    for (const auto& q : sequences) {
        validate(q, alphabet_size);
        for (std::size_t pass = 0; pass <= params.shifts && pass < q.size(); ++pass) {
            std::size_t pos = pass;
            while (pos < q.size()) {
                const std::size_t end = trie.parse_phrase(q, pos);
                if (end == 0) break;
                pos = end - std::min(params.back_shift, end - pos);
            }
        }
    }
    return trie;
}

inline LzTrie lzms_parse(SequenceView q, std::size_t alphabet_size, LzMsParams params) {
    return lzms_parse(std::vector<Sequence>{Sequence(q.begin(), q.end())}, alphabet_size, params);
}

/// Plain LZ78 incremental parse: the phrase list in parse order plus its trie.
/// A trailing partial phrase already in the dictionary is discarded.
inline std::pair<std::vector<Sequence>, LzTrie> lz78_parse(SequenceView q, std::size_t alphabet_size) {
    validate(q, alphabet_size);
    LzTrie trie(alphabet_size);
    std::size_t pos = 0;
    while (pos < q.size()) {
        const std::size_t end = trie.parse_phrase(q, pos);
        if (end == 0) break;
        pos = end;
    }
    return {trie.phrases(), std::move(trie)};
}

/// Traversal state for LZ prediction. Steps down the trie one context symbol
/// at a time; on hitting a leaf it restarts from the node reached by tracing
/// the last M consumed symbols from the root (the root itself when M = 0 or
/// the trace does not end on an internal node).
class LzCursor {
public:
    LzCursor(const LzTrie& trie, std::size_t back_shift) : trie_(&trie), m_(back_shift) {}

    void step(Symbol sym) {
        if (m_ > 0) {
            recent_.push_back(sym);
            if (recent_.size() > m_) recent_.pop_front();
        }
        const auto next = trie_->internal_child(node_, sym);
        if (next != CountTrie::none) {
            node_ = next;
            return;
        }
        node_ = CountTrie::root;
        for (Symbol s : recent_) {
            const auto c = trie_->internal_child(node_, s);
            if (c == CountTrie::none) {
                node_ = CountTrie::root;
                break;
            }
            node_ = c;
        }
    }

    double prob(Symbol sym) const {
        return static_cast<double>(trie_->child_count(node_, sym)) / static_cast<double>(trie_->total_count(node_));
    }

    LzTrie::NodeId node() const noexcept { return node_; }

private:
    const LzTrie* trie_;
    std::size_t m_;
    LzTrie::NodeId node_ = CountTrie::root;
    std::deque<Symbol> recent_;
};

inline double lzms_prob(const LzTrie& trie, Symbol sym, SequenceView context, std::size_t back_shift) {
    LzCursor cur(trie, back_shift);
    for (Symbol s : context) cur.step(s);
    return cur.prob(sym);
}

inline double lz78_prob(const LzTrie& trie, Symbol sym, SequenceView context) {
    return lzms_prob(trie, sym, context, 0);
}

/// LZ78 (M = S = 0) and LZ-MS predictor.
class LzPredictor : public Predictor {
public:
    LzPredictor(std::size_t alphabet_size, LzMsParams params) : params_(params), trie_(alphabet_size) {}

    std::size_t alphabet_size() const override { return trie_.alphabet_size(); }
    const LzMsParams& params() const noexcept { return params_; }
    const LzTrie& trie() const noexcept { return trie_; }
    void set_trie(LzTrie trie) { trie_ = std::move(trie); }

    void train(const std::vector<Sequence>& sequences) override {
        trie_ = lzms_parse(sequences, trie_.alphabet_size(), params_);
    }

    double prob(Symbol sym, SequenceView context) const override {
        return lzms_prob(trie_, sym, context, params_.back_shift);
    }

    std::unique_ptr<Session> session(SequenceView history) const override {
        auto s = std::make_unique<CursorSession>(*this);
        for (Symbol h : history) s->consume(h);
        return s;
    }

private:
    class CursorSession : public Session {
    public:
        explicit CursorSession(const LzPredictor& p) : cursor_(p.trie_, p.params_.back_shift) {}
        double prob(Symbol sym) const override { return cursor_.prob(sym); }
        void consume(Symbol sym) override { cursor_.step(sym); }

    private:
        LzCursor cursor_;
    };

    LzMsParams params_;
    LzTrie trie_;
};

}  // namespace vmm

#endif  // VMM_LZ_HPP
