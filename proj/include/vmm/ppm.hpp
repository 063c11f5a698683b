#ifndef VMM_PPM_HPP
#define VMM_PPM_HPP

#include <algorithm>
#include <deque>
#include <memory>
#include <vector>

#include "vmm/core.hpp"
#include "vmm/count_trie.hpp"

namespace vmm {

enum class PpmBase { uniform, training_frequency };

struct PpmParams {
    std::size_t order = 5;  // D
    bool exclusion = true;
    PpmBase base = PpmBase::uniform;
};

/// PPM-C over a counted trie of depth D + 1: the node for path s.sigma holds
/// N(s sigma), the number of occurrences of s sigma in training.
class PpmPredictor : public Predictor {
public:
    using NodeId = CountTrie::NodeId;

    PpmPredictor(std::size_t alphabet_size, PpmParams params)
        : k_(alphabet_size), params_(params), unigram_(alphabet_size, 0) {}

    std::size_t alphabet_size() const override { return k_; }
    const PpmParams& params() const noexcept { return params_; }
    const CountTrie& trie() const noexcept { return trie_; }
    const Sequence& tail() const noexcept { return tail_; }

    void train(const std::vector<Sequence>& sequences) override {
        trie_ = CountTrie();
        std::fill(unigram_.begin(), unigram_.end(), 0);
        const std::size_t max_len = params_.order + 1;
        for (const auto& q : sequences) {
            validate(q, k_);
            for (Symbol s : q) ++unigram_[s];
            // every substring of length <= D+1 is counted once per occurrence
            for (std::size_t start = 0; start < q.size(); ++start) {
                NodeId cur = CountTrie::root;
                for (std::size_t j = start; j < q.size() && j - start < max_len; ++j) {
                    cur = trie_.child_or_add(cur, q[j]);
                    ++trie_.node(cur).count;
                }
            }
        }
        trie_.node(CountTrie::root).count = 0;
        for (auto c : unigram_) trie_.node(CountTrie::root).count += c;
        tail_ = tail_of(sequences, params_.order);
        build_links();
    }

    /// Restore a trained state (trie counts plus training tail).
    void restore(CountTrie trie, Sequence tail) {
        trie_ = std::move(trie);
        tail_ = std::move(tail);
        std::fill(unigram_.begin(), unigram_.end(), 0);
        for (const auto& [sym, id] : trie_.node(CountTrie::root).children) unigram_.at(sym) = trie_.node(id).count;
        build_links();
    }

    /// N(path); 0 if the path is absent.
    std::uint64_t count(SequenceView path) const {
        const NodeId id = trie_.find(path);
        return id == CountTrie::none ? 0 : trie_.node(id).count;
    }

    /// Evaluates the escape recursion on the length-D suffix of `context`
    /// (shorter if the context is shorter).
    double prob(Symbol sym, SequenceView context) const override {
        const std::size_t longest = std::min(params_.order, context.size());
        for (std::size_t len = longest + 1; len-- > 0;) {
            const NodeId id = trie_.find(context.subspan(context.size() - len));
            if (id != CountTrie::none) return prob_from(id, sym);
        }
        return prob_from(CountTrie::root, sym);
    }

    std::unique_ptr<Session> session(SequenceView history) const override {
        auto s = std::make_unique<LinkSession>(*this);
        if (history.size() < params_.order) {
            const std::size_t need = params_.order - history.size();
            const std::size_t take = std::min(need, tail_.size());
            for (std::size_t i = tail_.size() - take; i < tail_.size(); ++i) s->consume(tail_[i]);
        }
        for (Symbol h : history) s->consume(h);
        return s;
    }

    /// Probability starting the escape chain at trie node `start`, which must
    /// be the node of the longest context suffix present in the trie.
    double prob_from(NodeId start, Symbol sym) const {
        std::vector<char> excluded;
        std::size_t n_excluded = 0;
        if (params_.exclusion) excluded.assign(k_, 0);
        double mult = 1.0;
        for (NodeId id = start;; id = links_[id]) {
            const auto& ch = trie_.node(id).children;
            if (!ch.empty()) {
                std::uint64_t total = 0;
                std::uint64_t hit = 0;
                std::size_t fresh = 0;
                bool found = false;
                for (const auto& [s, c] : ch) {
                    if (params_.exclusion && excluded[s]) continue;
                    total += trie_.node(c).count;
                    ++fresh;
                    if (s == sym) {
                        hit = trie_.node(c).count;
                        found = true;
                    }
                }
                const double distinct = static_cast<double>(ch.size());
                // exclusion on: once every symbol is accounted for no escape is possible
                const bool covered = params_.exclusion && n_excluded + fresh == k_;
                if (found) {
                    const double denom = covered ? static_cast<double>(total) : distinct + static_cast<double>(total);
                    return mult * static_cast<double>(hit) / denom;
                }
                if (covered) return 0.0;
                mult *= distinct / (distinct + static_cast<double>(total));
                if (params_.exclusion)
                    for (const auto& e : ch)
                        if (!excluded[e.first]) {
                            excluded[e.first] = 1;
                            ++n_excluded;
                        }
            }
            if (id == CountTrie::root) break;
        }
        return mult * base_prob(sym, excluded);
    }

private:
    double base_prob(Symbol sym, const std::vector<char>& excluded) const {
        if (params_.exclusion && excluded[sym]) return 0.0;
        if (params_.base == PpmBase::uniform) {
            std::size_t remaining = k_;
            if (params_.exclusion) remaining -= static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), 1));
            return 1.0 / static_cast<double>(remaining);
        }
        double total = 0.0;
        for (std::size_t s = 0; s < k_; ++s)
            if (!params_.exclusion || !excluded[s]) total += static_cast<double>(unigram_[s]) + 1.0;
        return (static_cast<double>(unigram_[sym]) + 1.0) / total;
    }

    // links_[n] is the node of path(n) without its first symbol
    void build_links() {
        links_.assign(trie_.size(), CountTrie::root);
        depth_limit_ = params_.order;
        std::deque<NodeId> queue{CountTrie::root};
        while (!queue.empty()) {
            const NodeId u = queue.front();
            queue.pop_front();
            for (const auto& [s, c] : trie_.node(u).children) {
                if (u == CountTrie::root) {
                    links_[c] = CountTrie::root;
                } else {
                    const NodeId l = trie_.child(links_[u], s);
                    links_[c] = l == CountTrie::none ? CountTrie::root : l;
                }
                queue.push_back(c);
            }
        }
    }

    /// Tracks the node of the longest context suffix (length <= D) present
    /// in the trie, advancing through suffix links.
    class LinkSession : public Session {
    public:
        explicit LinkSession(const PpmPredictor& p) : p_(p) {}

        double prob(Symbol sym) const override { return p_.prob_from(node_, sym); }

        void consume(Symbol sym) override {
            NodeId cand = node_;
            for (;;) {
                const NodeId c = p_.trie_.child(cand, sym);
                if (c != CountTrie::none) {
                    node_ = p_.trie_.node(c).depth > p_.depth_limit_ ? p_.links_[c] : c;
                    return;
                }
                if (cand == CountTrie::root) {
                    node_ = CountTrie::root;
                    return;
                }
                cand = p_.links_[cand];
            }
        }

    private:
        const PpmPredictor& p_;
        NodeId node_ = CountTrie::root;
    };

    std::size_t k_;
    PpmParams params_;
    CountTrie trie_;
    std::vector<std::uint64_t> unigram_;
    std::vector<NodeId> links_;
    std::size_t depth_limit_ = 0;
    Sequence tail_;
};

}  // namespace vmm

#endif  // VMM_PPM_HPP
