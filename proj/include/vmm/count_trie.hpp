#ifndef VMM_COUNT_TRIE_HPP
#define VMM_COUNT_TRIE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "vmm/core.hpp"

namespace vmm {

/// Counted trie shared by the LZ family and PPM-C.
///
/// Nodes are stored in creation order; node 0 is the root. What `count`
/// means is up to the owner (LZ: number of leaves below an internal node,
/// PPM: occurrence count of the node's path).
class CountTrie {
public:
    using NodeId = std::uint32_t;
    static constexpr NodeId root = 0;
    static constexpr NodeId none = std::numeric_limits<NodeId>::max();

    struct Node {
        NodeId parent = none;
        Symbol symbol = 0;
        std::uint32_t depth = 0;
        std::uint64_t count = 0;
        // sorted by symbol
        std::vector<std::pair<Symbol, NodeId>> children;

        friend bool operator==(const Node&, const Node&) = default;
    };

    CountTrie() : nodes_(1) {}

    std::size_t size() const noexcept { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_[id]; }
    Node& node(NodeId id) { return nodes_[id]; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }

    NodeId child(NodeId id, Symbol sym) const {
        const auto& ch = nodes_[id].children;
        auto it = std::lower_bound(ch.begin(), ch.end(), sym,
                                   [](const auto& e, Symbol s) { return e.first < s; });
        return (it != ch.end() && it->first == sym) ? it->second : none;
    }

    NodeId add_child(NodeId id, Symbol sym) {
        const NodeId fresh = static_cast<NodeId>(nodes_.size());
        Node n;
        n.parent = id;
        n.symbol = sym;
        n.depth = nodes_[id].depth + 1;
        nodes_.push_back(std::move(n));
        auto& ch = nodes_[id].children;
        auto it = std::lower_bound(ch.begin(), ch.end(), sym,
                                   [](const auto& e, Symbol s) { return e.first < s; });
        ch.insert(it, {sym, fresh});
        return fresh;
    }

    NodeId child_or_add(NodeId id, Symbol sym) {
        const NodeId c = child(id, sym);
        return c == none ? add_child(id, sym) : c;
    }

    /// Follow `path` from the root; `none` if it leaves the trie.
    NodeId find(SequenceView path) const {
        NodeId cur = root;
        for (Symbol s : path) {
            cur = child(cur, s);
            if (cur == none) return none;
        }
        return cur;
    }

    /// Symbols on the path from the root to `id`.
    Sequence path(NodeId id) const {
        Sequence out(nodes_[id].depth);
        for (NodeId cur = id; cur != root; cur = nodes_[cur].parent) out[nodes_[cur].depth - 1] = nodes_[cur].symbol;
        return out;
    }

    /// Rebuild from a node list in creation order (parents before children).
    static CountTrie from_nodes(std::vector<Node> nodes) {
        if (nodes.empty() || nodes[0].parent != none) throw DataError("count trie: missing root");
        CountTrie t;
        t.nodes_ = std::move(nodes);
        for (std::size_t i = 1; i < t.nodes_.size(); ++i)
            if (t.nodes_[i].parent >= i) throw DataError("count trie: parent after child");
        return t;
    }

    friend bool operator==(const CountTrie&, const CountTrie&) = default;

private:
    std::vector<Node> nodes_;
};

}  // namespace vmm

#endif  // VMM_COUNT_TRIE_HPP
