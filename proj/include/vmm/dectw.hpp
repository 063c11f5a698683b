#ifndef VMM_DECTW_HPP
#define VMM_DECTW_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <memory>
#include <queue>
#include <tuple>
#include <vector>

#include "vmm/ctw.hpp"

namespace vmm {

/// Full binary tree whose leaves are the alphabet symbols. Each internal node
/// poses the binary question "left subtree or right subtree?".
class DecompositionTree {
public:
    struct Node {
        int left = -1;  // -1 on leaves
        int right = -1;
        Symbol symbol = 0;            // leaves only
        std::vector<Symbol> symbols;  // sorted leaf labels below this node

        bool is_leaf() const noexcept { return left < 0; }
        friend bool operator==(const Node&, const Node&) = default;
    };

    DecompositionTree() = default;

    /// Validates shape: full binary, leaves a bijection onto 0..k-1.
    DecompositionTree(std::vector<Node> nodes, int root) : nodes_(std::move(nodes)), root_(root) {
        if (nodes_.empty() || root_ < 0 || static_cast<std::size_t>(root_) >= nodes_.size())
            throw DataError("decomposition tree: bad root");
        std::vector<int> seen;
        std::function<void(int)> walk = [&](int id) {
            const Node& n = nodes_.at(static_cast<std::size_t>(id));
            if (n.is_leaf()) {
                seen.push_back(static_cast<int>(n.symbol));
                return;
            }
            if (n.right < 0) throw DataError("decomposition tree: internal node with one child");
            walk(n.left);
            walk(n.right);
        };
        walk(root_);
        std::sort(seen.begin(), seen.end());
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (seen[i] != static_cast<int>(i)) throw DataError("decomposition tree: leaves must label 0..k-1 once");
        k_ = seen.size();
        if (k_ < 2) throw DataError("decomposition tree needs at least two symbols");
        leaf_of_.assign(k_, -1);
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].is_leaf()) leaf_of_[nodes_[i].symbol] = static_cast<int>(i);
        parent_.assign(nodes_.size(), -1);
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (!nodes_[i].is_leaf()) {
                parent_[static_cast<std::size_t>(nodes_[i].left)] = static_cast<int>(i);
                parent_[static_cast<std::size_t>(nodes_[i].right)] = static_cast<int>(i);
            }
    }

    std::size_t alphabet_size() const noexcept { return k_; }
    int root() const noexcept { return root_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }

    /// Internal nodes on the root-to-leaf path of `sym`, each with the branch
    /// (0 left, 1 right) taken towards `sym`.
    std::vector<std::pair<int, int>> path(Symbol sym) const {
        std::vector<std::pair<int, int>> out;
        int cur = leaf_of_.at(sym);
        for (int up = parent_[static_cast<std::size_t>(cur)]; up >= 0; cur = up, up = parent_[static_cast<std::size_t>(up)])
            out.push_back({up, node(up).right == cur ? 1 : 0});
        std::reverse(out.begin(), out.end());
        return out;
    }

    friend bool operator==(const DecompositionTree& a, const DecompositionTree& b) {
        return a.nodes_ == b.nodes_ && a.root_ == b.root_;
    }

private:
    std::vector<Node> nodes_;
    int root_ = -1;
    std::size_t k_ = 0;
    std::vector<int> leaf_of_;
    std::vector<int> parent_;
};

/// Huffman code tree of the symbol counts. The two lightest subtrees are
/// merged first; among equal counts the subtree with the higher minimum
/// symbol index goes first. Within a merge the subtree holding the lower
/// minimum symbol becomes the left (0) branch.
inline DecompositionTree huffman_decomposition(const std::vector<std::uint64_t>& counts) {
    if (counts.size() < 2) throw DataError("Huffman decomposition needs at least two symbols");
    using Item = std::tuple<std::uint64_t, Symbol, int>;  // count, min symbol, node
    auto later = [](const Item& a, const Item& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
    };
    std::priority_queue<Item, std::vector<Item>, decltype(later)> heap(later);
    std::vector<DecompositionTree::Node> nodes;
    for (std::size_t s = 0; s < counts.size(); ++s) {
        DecompositionTree::Node leaf;
        leaf.symbol = static_cast<Symbol>(s);
        leaf.symbols = {static_cast<Symbol>(s)};
        nodes.push_back(leaf);
        heap.emplace(counts[s], static_cast<Symbol>(s), static_cast<int>(s));
    }
    while (heap.size() > 1) {
        auto a = heap.top();
        heap.pop();
        auto b = heap.top();
        heap.pop();
        if (std::get<1>(b) < std::get<1>(a)) std::swap(a, b);
        DecompositionTree::Node inner;
        inner.left = std::get<2>(a);
        inner.right = std::get<2>(b);
        const auto& ls = nodes[static_cast<std::size_t>(inner.left)].symbols;
        const auto& rs = nodes[static_cast<std::size_t>(inner.right)].symbols;
        inner.symbols.reserve(ls.size() + rs.size());
        std::merge(ls.begin(), ls.end(), rs.begin(), rs.end(), std::back_inserter(inner.symbols));
        nodes.push_back(std::move(inner));
        heap.emplace(std::get<0>(a) + std::get<0>(b), std::get<1>(a), static_cast<int>(nodes.size() - 1));
    }
    const int root = std::get<2>(heap.top());
    return DecompositionTree(std::move(nodes), root);
}

/// Decomposed CTW: one context tree per internal decomposition node v, over
/// contexts drawn from the projection of the input onto v's symbols (depth
/// counts projected symbols), each node holding a binary left/right counter.
class DeCtwPredictor : public Predictor {
public:
    DeCtwPredictor(std::size_t alphabet_size, CtwParams params) : k_(alphabet_size), params_(params) {
        if (k_ < 2) throw DataError("DE-CTW needs at least two symbols");
    }

    std::size_t alphabet_size() const override { return k_; }
    const CtwParams& params() const noexcept { return params_; }
    const DecompositionTree& decomposition() const noexcept { return decomposition_; }

    struct Component {
        int node = -1;                // decomposition node id
        std::vector<int> local;       // global symbol -> local index, -1 if outside
        std::vector<Symbol> side;     // global symbol -> branch bit (valid where local >= 0)
        ContextTree tree;
        Sequence tail;                // last D projected symbols seen in training, local indices
    };

    const std::vector<Component>& components() const noexcept { return components_; }

    /// Huffman tree of the training counts, then one context tree per node.
    void train(const std::vector<Sequence>& sequences) override {
        std::vector<std::uint64_t> counts(k_, 0);
        for (const auto& q : sequences) {
            validate(q, k_);
            for (Symbol s : q) ++counts[s];
        }
        train_with(sequences, huffman_decomposition(counts));
    }

    void train_with(const std::vector<Sequence>& sequences, DecompositionTree tree) {
        if (tree.alphabet_size() != k_) throw DataError("decomposition tree does not match alphabet");
        decomposition_ = std::move(tree);
        build_components();
        for (auto& comp : components_) {
            comp.tree = ContextTree(params_.depth, comp_arity(comp));
            std::vector<Sequence> projected;
            for (const auto& q : sequences) {
                validate(q, k_);
                Sequence proj;
                std::vector<int> bits;
                for (Symbol s : q)
                    if (comp.local[s] >= 0) {
                        proj.push_back(static_cast<Symbol>(comp.local[s]));
                        bits.push_back(static_cast<int>(comp.side[s]));
                    }
                train_context_tree(comp.tree, proj, bits);
                projected.push_back(std::move(proj));
            }
            comp.tail = tail_of(projected, params_.depth);
        }
    }

    /// Restore a trained state.
    void restore(DecompositionTree tree, std::vector<ContextTree> trees, std::vector<Sequence> tails) {
        decomposition_ = std::move(tree);
        build_components();
        if (trees.size() != components_.size() || tails.size() != components_.size())
            throw DataError("DE-CTW state: component count mismatch");
        for (std::size_t i = 0; i < components_.size(); ++i) {
            components_[i].tree = std::move(trees[i]);
            components_[i].tail = std::move(tails[i]);
        }
    }

    double prob(Symbol sym, SequenceView context) const override { return session(context)->prob(sym); }

    std::unique_ptr<Session> session(SequenceView history) const override {
        std::vector<CtwSession> sessions;
        sessions.reserve(components_.size());
        for (const auto& comp : components_) {
            Sequence proj;
            for (Symbol s : history)
                if (comp.local.at(s) >= 0) proj.push_back(static_cast<Symbol>(comp.local[s]));
            sessions.emplace_back(comp.tree, params_.alpha, params_.adaptive,
                                  padded_context(comp.tail, proj, params_.depth));
        }
        return std::make_unique<PathSession>(*this, std::move(sessions));
    }

private:
    static std::size_t comp_arity(const Component& c) {
        return static_cast<std::size_t>(std::count_if(c.local.begin(), c.local.end(), [](int v) { return v >= 0; }));
    }

    void build_components() {
        components_.clear();
        comp_of_node_.assign(decomposition_.nodes().size(), -1);
        for (std::size_t i = 0; i < decomposition_.nodes().size(); ++i) {
            const auto& n = decomposition_.nodes()[i];
            if (n.is_leaf()) continue;
            Component c;
            c.node = static_cast<int>(i);
            c.local.assign(k_, -1);
            c.side.assign(k_, 0);
            for (std::size_t j = 0; j < n.symbols.size(); ++j) c.local[n.symbols[j]] = static_cast<int>(j);
            for (Symbol s : decomposition_.node(n.right).symbols) c.side[s] = 1;
            c.tree = ContextTree(params_.depth, n.symbols.size());
            comp_of_node_[i] = static_cast<int>(components_.size());
            components_.push_back(std::move(c));
        }
        paths_.clear();
        for (std::size_t s = 0; s < k_; ++s) {
            std::vector<std::pair<int, int>> p;
            for (const auto& [node, bit] : decomposition_.path(static_cast<Symbol>(s)))
                p.push_back({comp_of_node_[static_cast<std::size_t>(node)], bit});
            paths_.push_back(std::move(p));
        }
    }

    class PathSession : public Session {
    public:
        PathSession(const DeCtwPredictor& p, std::vector<CtwSession> s) : p_(p), sessions_(std::move(s)) {}

        double prob(Symbol sym) const override {
            double lp = 0.0;
            for (const auto& [comp, bit] : p_.paths_.at(sym))
                lp += sessions_[static_cast<std::size_t>(comp)].log_prob(bit);
            return std::exp(lp);
        }

        void consume(Symbol sym) override {
            for (const auto& [comp, bit] : p_.paths_.at(sym)) {
                const auto& c = p_.components_[static_cast<std::size_t>(comp)];
                sessions_[static_cast<std::size_t>(comp)].update(bit, static_cast<Symbol>(c.local[sym]));
            }
        }

    private:
        const DeCtwPredictor& p_;
        std::vector<CtwSession> sessions_;
    };

    std::size_t k_;
    CtwParams params_;
    DecompositionTree decomposition_;
    std::vector<Component> components_;
    std::vector<int> comp_of_node_;
    std::vector<std::vector<std::pair<int, int>>> paths_;  // per symbol: (component, bit)
};

}  // namespace vmm

#endif  // VMM_DECTW_HPP
