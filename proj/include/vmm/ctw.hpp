#ifndef VMM_CTW_HPP
#define VMM_CTW_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "vmm/core.hpp"
#include "vmm/kt.hpp"

namespace vmm {

/// Depth-bounded context tree with one binary counter per node.
///
/// Contexts may be over any arity (binary CTW uses arity 2, the decomposed
/// variant uses the size of the projected alphabet). Node for context
/// s_1..s_l is reached from the root by s_l, s_{l-1}, ..., s_1, i.e. the most
/// recent symbol first. Only paths seen in training are materialized.
class ContextTree {
public:
    using NodeId = std::uint32_t;
    static constexpr NodeId root = 0;
    static constexpr NodeId none = std::numeric_limits<NodeId>::max();

    struct Node {
        KtCounter counts;
        std::vector<std::pair<Symbol, NodeId>> children;  // sorted

        friend bool operator==(const Node&, const Node&) = default;
    };

    ContextTree(std::size_t depth = 0, std::size_t arity = 2) : depth_(depth), arity_(arity), nodes_(1) {}

    std::size_t depth() const noexcept { return depth_; }
    std::size_t arity() const noexcept { return arity_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_[id]; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }

    NodeId child(NodeId id, Symbol sym) const {
        const auto& ch = nodes_[id].children;
        auto it = std::lower_bound(ch.begin(), ch.end(), sym, [](const auto& e, Symbol s) { return e.first < s; });
        return (it != ch.end() && it->first == sym) ? it->second : none;
    }

    /// Count `bit` at every node along `context` (exactly depth() symbols,
    /// oldest first).
    void add(SequenceView context, int bit) {
        NodeId cur = root;
        nodes_[cur].counts.add(bit);
        for (std::size_t d = 0; d < depth_; ++d) {
            const Symbol s = context[depth_ - 1 - d];
            NodeId next = child(cur, s);
            if (next == none) {
                next = static_cast<NodeId>(nodes_.size());
                nodes_.emplace_back();
                auto& ch = nodes_[cur].children;
                auto it = std::lower_bound(ch.begin(), ch.end(), s,
                                           [](const auto& e, Symbol x) { return e.first < x; });
                ch.insert(it, {s, next});
            }
            cur = next;
            nodes_[cur].counts.add(bit);
        }
    }

    /// Counter of context `s` (oldest first); zero if never observed.
    KtCounter counts(SequenceView s) const {
        NodeId cur = root;
        for (std::size_t i = s.size(); i-- > 0;) {
            cur = child(cur, s[i]);
            if (cur == none) return {};
        }
        return nodes_[cur].counts;
    }

    static ContextTree from_nodes(std::size_t depth, std::size_t arity, std::vector<Node> nodes) {
        if (nodes.empty()) throw DataError("context tree: missing root");
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (const auto& [s, c] : nodes[i].children)
                if (c <= i || c >= nodes.size() || s >= arity) throw DataError("context tree: malformed node list");
        ContextTree t(depth, arity);
        t.nodes_ = std::move(nodes);
        return t;
    }

    friend bool operator==(const ContextTree&, const ContextTree&) = default;

private:
    std::size_t depth_;
    std::size_t arity_;
    std::vector<Node> nodes_;
};

/// Count every position of `contexts` that has depth() preceding symbols.
/// `bits[i]` is the outcome at position i.
inline void train_context_tree(ContextTree& tree, SequenceView contexts, std::span<const int> bits) {
    const std::size_t d = tree.depth();
    for (std::size_t i = d; i < contexts.size(); ++i) tree.add(contexts.subspan(i - d, d), bits[i]);
}

/// Incremental evaluation of the weighting recursion over a frozen tree.
///
/// Each visited context keeps log P_e (product of estimator conditionals for
/// the bits routed through it), log P_w, and the sum of its children's log P_w.
/// Unvisited subtrees contribute a factor 1.
class CtwSession {
public:
    CtwSession(const ContextTree& tree, double alpha, bool adaptive, Sequence context)
        : tree_(&tree), alpha_(alpha), adaptive_(adaptive), context_(std::move(context)) {
        if (context_.size() != tree.depth()) throw DataError("ctw session: context length must equal depth");
        nodes_.push_back(SNode{ContextTree::root, {}, 0.0, 0.0, 0.0, 0, 0});
        rebuild_path();
    }

    /// Natural log of P(bit | consumed prefix).
    double log_prob(int bit) const {
        const std::size_t depth = tree_->depth();
        double child_old = 0.0;
        double child_new = 0.0;
        for (std::size_t d = depth + 1; d-- > 0;) {
            const SNode& n = nodes_[path_[d]];
            const double le = n.log_est + log_kt(n, bit);
            double lw = le;
            if (d < depth) lw = log_half + log_add_exp(le, n.log_children - child_old + child_new);
            child_old = n.log_weighted;
            child_new = lw;
        }
        return child_new - child_old;
    }

    double prob(int bit) const { return std::exp(log_prob(bit)); }

    /// Route `bit` through the current context path, then shift
    /// `context_symbol` into the context.
    void update(int bit, Symbol context_symbol) {
        const std::size_t depth = tree_->depth();
        if (recording_) {
            Undo u;
            u.dropped = depth > 0 ? context_.front() : 0;
            u.saved.reserve(depth + 1);
            for (std::size_t d = 0; d <= depth; ++d) {
                const SNode& n = nodes_[path_[d]];
                u.saved.push_back({path_[d], n.log_est, n.log_weighted, n.log_children, n.add0, n.add1});
            }
            journal_.push_back(std::move(u));
        }
        double child_old = 0.0;
        double child_new = 0.0;
        for (std::size_t d = depth + 1; d-- > 0;) {
            SNode& n = nodes_[path_[d]];
            n.log_est += log_kt(n, bit);
            if (d < depth) n.log_children += child_new - child_old;
            const double lw = d < depth ? log_half + log_add_exp(n.log_est, n.log_children) : n.log_est;
            child_old = n.log_weighted;
            child_new = lw;
            n.log_weighted = lw;
            if (adaptive_) (bit ? n.add1 : n.add0) += 1;
        }
        if (depth > 0) {
            context_.erase(context_.begin());
            context_.push_back(context_symbol);
            rebuild_path();
        }
    }

    /// Natural log of the probability of everything consumed.
    double log_block_prob() const { return nodes_[0].log_weighted; }

    /// Start recording updates so they can be undone with rollback().
    std::size_t mark() {
        recording_ = true;
        return journal_.size();
    }

    void rollback(std::size_t mark) {
        const std::size_t depth = tree_->depth();
        while (journal_.size() > mark) {
            Undo& u = journal_.back();
            if (depth > 0) {
                context_.pop_back();
                context_.insert(context_.begin(), u.dropped);
            }
            for (const auto& s : u.saved) {
                SNode& n = nodes_[s.node];
                n.log_est = s.log_est;
                n.log_weighted = s.log_weighted;
                n.log_children = s.log_children;
                n.add0 = s.add0;
                n.add1 = s.add1;
            }
            journal_.pop_back();
        }
        if (mark == 0) recording_ = false;
        rebuild_path();
    }

    const Sequence& context() const noexcept { return context_; }

private:
    static constexpr double log_half = -0.69314718055994530942;

    struct SNode {
        ContextTree::NodeId train;
        std::vector<std::pair<Symbol, std::uint32_t>> children;
        double log_est;
        double log_weighted;
        double log_children;
        std::uint64_t add0;
        std::uint64_t add1;
    };

    struct Saved {
        std::uint32_t node;
        double log_est, log_weighted, log_children;
        std::uint64_t add0, add1;
    };

    struct Undo {
        Symbol dropped;
        std::vector<Saved> saved;
    };

    double log_kt(const SNode& n, int bit) const {
        std::uint64_t n0 = n.add0;
        std::uint64_t n1 = n.add1;
        if (n.train != ContextTree::none) {
            n0 += tree_->node(n.train).counts.n0;
            n1 += tree_->node(n.train).counts.n1;
        }
        return std::log(kt_conditional(n0, n1, bit, alpha_));
    }

    std::uint32_t child_or_add(std::uint32_t id, Symbol sym) {
        auto& ch = nodes_[id].children;
        auto it = std::lower_bound(ch.begin(), ch.end(), sym, [](const auto& e, Symbol s) { return e.first < s; });
        if (it != ch.end() && it->first == sym) return it->second;
        const ContextTree::NodeId parent_train = nodes_[id].train;
        const ContextTree::NodeId train =
            parent_train == ContextTree::none ? ContextTree::none : tree_->child(parent_train, sym);
        const auto fresh = static_cast<std::uint32_t>(nodes_.size());
        nodes_[id].children.insert(it, {sym, fresh});
        nodes_.push_back(SNode{train, {}, 0.0, 0.0, 0.0, 0, 0});
        return fresh;
    }

    void rebuild_path() {
        const std::size_t depth = tree_->depth();
        path_.resize(depth + 1);
        path_[0] = 0;
        for (std::size_t d = 0; d < depth; ++d) path_[d + 1] = child_or_add(path_[d], context_[depth - 1 - d]);
    }

    const ContextTree* tree_;
    double alpha_;
    bool adaptive_;
    Sequence context_;
    std::vector<SNode> nodes_;
    std::vector<std::uint32_t> path_;
    bool recording_ = false;
    std::vector<Undo> journal_;
};

/// Non-incremental evaluation of the weighting recursion with frozen counts:
/// natural log of P_CTW(bits). `contexts` holds depth() symbols of history
/// followed by one context symbol per outcome in `bits`.
inline double ctw_log_block_prob(const ContextTree& tree, double alpha, SequenceView contexts,
                                 std::span<const int> bits) {
    const std::size_t depth = tree.depth();
    if (contexts.size() != depth + bits.size()) throw DataError("ctw: contexts must be history plus one per bit");
    std::vector<std::size_t> all(bits.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    std::function<double(std::size_t, ContextTree::NodeId, const std::vector<std::size_t>&)> weighted =
        [&](std::size_t d, ContextTree::NodeId id, const std::vector<std::size_t>& positions) -> double {
        const KtCounter c = id == ContextTree::none ? KtCounter{} : tree.node(id).counts;
        double log_est = 0.0;
        for (std::size_t i : positions) log_est += std::log(kt_conditional(c, bits[i], alpha));
        if (d == depth) return log_est;
        std::vector<std::pair<Symbol, std::vector<std::size_t>>> groups;
        for (std::size_t i : positions) {
            const Symbol s = contexts[depth + i - d - 1];
            auto it = std::find_if(groups.begin(), groups.end(), [s](const auto& g) { return g.first == s; });
            if (it == groups.end()) {
                groups.push_back({s, {}});
                it = groups.end() - 1;
            }
            it->second.push_back(i);
        }
        double log_children = 0.0;
        for (const auto& [s, pos] : groups)
            log_children += weighted(d + 1, id == ContextTree::none ? ContextTree::none : tree.child(id, s), pos);
        return std::log(0.5) + log_add_exp(log_est, log_children);
    };
    return weighted(0, ContextTree::root, all);
}

struct CtwParams {
    std::size_t depth = 8;
    double alpha = kt_alpha;
    bool adaptive = false;  // default: counters frozen during scoring
};

/// Binary context-tree weighting predictor.
class CtwPredictor : public Predictor {
public:
    explicit CtwPredictor(std::size_t alphabet_size = 2, CtwParams params = {})
        : params_(params), tree_(params.depth, 2) {
        if (alphabet_size != 2) throw DataError("binary CTW requires a binary alphabet");
    }

    std::size_t alphabet_size() const override { return 2; }
    const CtwParams& params() const noexcept { return params_; }
    const ContextTree& tree() const noexcept { return tree_; }
    const Sequence& tail() const noexcept { return tail_; }

    void train(const std::vector<Sequence>& sequences) override {
        tree_ = ContextTree(params_.depth, 2);
        for (const auto& q : sequences) {
            validate(q, 2);
            std::vector<int> bits(q.begin(), q.end());
            train_context_tree(tree_, q, bits);
        }
        tail_ = tail_of(sequences, params_.depth);
    }

    void restore(ContextTree tree, Sequence tail) {
        tree_ = std::move(tree);
        tail_ = std::move(tail);
    }

    /// Single-step mixture: a fresh session with `context` as history.
    double prob(Symbol sym, SequenceView context) const override { return session(context)->prob(sym); }

    std::unique_ptr<Session> session(SequenceView history) const override {
        return std::make_unique<BitSession>(
            CtwSession(tree_, params_.alpha, params_.adaptive, padded_context(tail_, history, params_.depth)));
    }

    /// P_CTW(x | history) by the direct recursion.
    double sequence_prob(SequenceView x, SequenceView history) const {
        Sequence contexts = padded_context(tail_, history, params_.depth);
        contexts.insert(contexts.end(), x.begin(), x.end());
        std::vector<int> bits(x.begin(), x.end());
        return std::exp(ctw_log_block_prob(tree_, params_.alpha, contexts, bits));
    }

private:
    class BitSession : public Session {
    public:
        explicit BitSession(CtwSession s) : s_(std::move(s)) {}
        double prob(Symbol sym) const override { return s_.prob(static_cast<int>(sym)); }
        void consume(Symbol sym) override { s_.update(static_cast<int>(sym), sym); }

    private:
        CtwSession s_;
    };

    CtwParams params_;
    ContextTree tree_;
    Sequence tail_;
};

/// A D-bounded tree-source model: a complete and proper suffix set (contexts
/// written oldest symbol first) with its description cost
/// C_D(M) = |M| - 1 + |{s in M : |s| < D}|.
struct TreeSourceModel {
    std::vector<Sequence> suffixes;
    int cost = 0;

    double weight() const { return std::ldexp(1.0, -cost); }
};

/// Every complete and proper binary suffix set of depth <= D (D <= 4).
inline std::vector<TreeSourceModel> enumerate_models(std::size_t depth) {
    if (depth > 4) throw DataError("enumerate_models: depth above 4 is combinatorially infeasible");
    std::function<std::vector<std::vector<Sequence>>(const Sequence&)> prunings =
        [&](const Sequence& s) -> std::vector<std::vector<Sequence>> {
        std::vector<std::vector<Sequence>> out{{s}};
        if (s.size() == depth) return out;
        Sequence s0 = s, s1 = s;
        s0.insert(s0.begin(), 0);
        s1.insert(s1.begin(), 1);
        for (const auto& left : prunings(s0))
            for (const auto& right : prunings(s1)) {
                auto m = left;
                m.insert(m.end(), right.begin(), right.end());
                out.push_back(std::move(m));
            }
        return out;
    };
    std::vector<TreeSourceModel> models;
    for (auto& m : prunings({})) {
        TreeSourceModel model;
        const auto shallow = std::count_if(m.begin(), m.end(), [&](const Sequence& s) { return s.size() < depth; });
        model.cost = static_cast<int>(m.size()) - 1 + static_cast<int>(shallow);
        model.suffixes = std::move(m);
        models.push_back(std::move(model));
    }
    return models;
}

}  // namespace vmm

#endif  // VMM_CTW_HPP
