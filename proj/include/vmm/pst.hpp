#ifndef VMM_PST_HPP
#define VMM_PST_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <type_traits>
#include <vector>

#include "vmm/core.hpp"

namespace vmm {

struct PstParams {
    double p_min = 0.001;
    double alpha = 0.01;
    double gamma = 0.001;
    double r = 1.05;
    std::size_t depth = 12;
};

struct PstStarParams {
    std::size_t n_min = 2;
    std::uint64_t hits = 2;
    double alpha = 0.0;  // accepted for grid compatibility; hits replaces the threshold test
    double gamma = 0.001;
    double r = 1.05;
    std::size_t depth = 10;
};

/// (1 - k gamma) P + gamma.
inline std::vector<double> pst_smooth(const std::vector<double>& dist, double gamma) {
    const double k = static_cast<double>(dist.size());
    if (gamma < 0.0 || gamma * k >= 1.0)
        throw DataError("PST smoothing needs 0 <= gamma < 1/k (gamma=" + std::to_string(gamma) +
                        ", k=" + std::to_string(dist.size()) + ")");
    std::vector<double> out(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) out[i] = (1.0 - k * gamma) * dist[i] + gamma;
    return out;
}

/// Substring statistics gathered in the first construction stage. Nodes form
/// a trie in which a child prepends one symbol, so the parent of s is s with
/// its leftmost symbol removed.
class PstCandidates {
public:
    static constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();

    struct Node {
        std::uint32_t parent = none;
        Symbol symbol = 0;  // the prepended (leftmost) symbol
        std::size_t depth = 0;
        std::uint64_t count = 0;       // occurrences
        std::uint64_t sequences = 0;   // distinct training sequences containing it
        std::vector<std::pair<Symbol, std::uint64_t>> followers;  // sorted, N(s sigma)
        std::uint64_t follower_total = 0;
        bool candidate = false;
        std::vector<std::pair<Symbol, std::uint32_t>> children;  // sorted
    };

    PstCandidates() = default;

    /// Gather statistics up to length `depth`. `is_candidate(node, length)`
    /// marks candidates; `extend(node, length)` says whether to look at
    /// one-symbol extensions of a node, and must never reject a node with a
    /// candidate extension.
    template <typename CandidateFn, typename ExtendFn>
    PstCandidates(const std::vector<Sequence>& sequences, std::size_t alphabet_size, std::size_t depth,
                  CandidateFn is_candidate, ExtendFn extend)
        : k_(alphabet_size) {
        struct Occ {
            std::uint32_t seq;
            std::uint32_t start;
        };
        nodes_.emplace_back();
        Node& root = nodes_[0];
        root.candidate = true;
        std::vector<std::uint64_t> unigram(k_, 0);
        for (std::size_t j = 0; j < sequences.size(); ++j) {
            validate(sequences[j], k_);
            for (Symbol s : sequences[j]) ++unigram[s];
            root.count += sequences[j].size();
            if (!sequences[j].empty()) ++root.sequences;
        }
        for (std::size_t s = 0; s < k_; ++s)
            if (unigram[s]) root.followers.push_back({static_cast<Symbol>(s), unigram[s]});
        root.follower_total = root.count;

        // occurrences of the level-L nodes still to be extended
        std::vector<std::pair<std::uint32_t, std::vector<Occ>>> frontier;
        {
            std::vector<Occ> all;
            for (std::size_t j = 0; j < sequences.size(); ++j)
                for (std::size_t i = 0; i < sequences[j].size(); ++i)
                    all.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i + 1)});
            // position i+1 with length 0: prepending gives q[i]
            if (depth > 0) frontier.push_back({0, std::move(all)});
        }
        for (std::size_t len = 1; len <= depth && !frontier.empty(); ++len) {
            std::vector<std::pair<std::uint32_t, std::vector<Occ>>> next;
            for (auto& [parent, occs] : frontier) {
                std::map<Symbol, std::vector<Occ>> groups;
                for (const Occ& o : occs)
                    if (o.start > 0) groups[sequences[o.seq][o.start - 1]].push_back({o.seq, o.start - 1});
                for (auto& [sym, gocc] : groups) {
                    const auto id = static_cast<std::uint32_t>(nodes_.size());
                    Node n;
                    n.parent = parent;
                    n.symbol = sym;
                    n.depth = len;
                    n.count = gocc.size();
                    std::map<Symbol, std::uint64_t> fol;
                    std::uint32_t last_seq = none;
                    for (const Occ& o : gocc) {
                        if (o.seq != last_seq) ++n.sequences;
                        last_seq = o.seq;
                        const std::size_t after = o.start + len;
                        if (after < sequences[o.seq].size()) ++fol[sequences[o.seq][after]];
                    }
                    n.followers.assign(fol.begin(), fol.end());
                    for (const auto& f : n.followers) n.follower_total += f.second;
                    n.candidate = n.follower_total > 0 && is_candidate(n, len);
                    const bool grow = len < depth && extend(n, len);
                    nodes_.push_back(std::move(n));
                    nodes_[parent].children.push_back({sym, id});
                    if (grow) next.push_back({id, std::move(gocc)});
                }
            }
            frontier = std::move(next);
        }
    }

    std::size_t alphabet_size() const noexcept { return k_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const Node& node(std::uint32_t id) const { return nodes_.at(id); }

    std::uint32_t find(SequenceView s) const {
        std::uint32_t cur = 0;
        for (std::size_t i = s.size(); i-- > 0;) {
            cur = child(cur, s[i]);
            if (cur == none) return none;
        }
        return cur;
    }

    std::uint32_t child(std::uint32_t id, Symbol sym) const {
        const auto& ch = nodes_[id].children;
        auto it = std::lower_bound(ch.begin(), ch.end(), sym, [](const auto& e, Symbol s) { return e.first < s; });
        return (it != ch.end() && it->first == sym) ? it->second : none;
    }

    Sequence label(std::uint32_t id) const {
        Sequence out;
        for (; id != 0; id = nodes_[id].parent) out.push_back(nodes_[id].symbol);
        return out;
    }

    /// N(s sigma)
    std::uint64_t follower_count(std::uint32_t id, Symbol sym) const {
        const auto& f = nodes_[id].followers;
        auto it = std::lower_bound(f.begin(), f.end(), sym, [](const auto& e, Symbol s) { return e.first < s; });
        return (it != f.end() && it->first == sym) ? it->second : 0;
    }

    /// Empirical next-symbol distribution of node `id` (all zero if it has no followers).
    std::vector<double> empirical(std::uint32_t id) const {
        std::vector<double> out(k_, 0.0);
        const Node& n = nodes_[id];
        if (n.follower_total == 0) return out;
        for (const auto& [s, c] : n.followers)
            out[s] = static_cast<double>(c) / static_cast<double>(n.follower_total);
        return out;
    }

    std::vector<Sequence> candidate_labels() const {
        std::vector<Sequence> out;
        for (std::uint32_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].candidate) out.push_back(label(i));
        return out;
    }

private:
    std::size_t k_ = 0;
    std::vector<Node> nodes_;
};

inline std::uint64_t pst_positions(const std::vector<Sequence>& sequences, std::size_t len) {
    std::uint64_t total = 0;
    for (const auto& q : sequences)
        if (q.size() + 1 > len) total += q.size() + 1 - len;
    return total;
}

/// Candidates: substrings s with count(s) / sum_j (n_j - |s| + 1) >= Pmin.
inline PstCandidates pst_candidates(const std::vector<Sequence>& sequences, std::size_t alphabet_size,
                                    const PstParams& params) {
    std::vector<std::uint64_t> positions(params.depth + 2);
    for (std::size_t l = 0; l < positions.size(); ++l) positions[l] = pst_positions(sequences, l);
    // fewest positive positions at any length in (len, depth]
    std::vector<std::uint64_t> fewest(params.depth + 1, 0);
    for (std::size_t len = params.depth; len-- > 0;)
        fewest[len] = fewest[len + 1] > 0 ? fewest[len + 1] : positions[len + 1];
    auto passes = [&](std::uint64_t count, std::uint64_t pos) {
        return pos > 0 && static_cast<double>(count) / static_cast<double>(pos) >= params.p_min;
    };
    return PstCandidates(
        sequences, alphabet_size, params.depth,
        [&](const PstCandidates::Node& n, std::size_t len) { return passes(n.count, positions[len]); },
        [&](const PstCandidates::Node& n, std::size_t len) { return passes(n.count, fewest[len]); });
}

/// Candidates: substrings occurring in at least Nmin distinct sequences.
inline PstCandidates pst_star_candidates(const std::vector<Sequence>& sequences, std::size_t alphabet_size,
                                         const PstStarParams& params) {
    auto enough = [&](const PstCandidates::Node& n, std::size_t) { return n.sequences >= params.n_min; };
    return PstCandidates(sequences, alphabet_size, params.depth, enough, enough);
}

/// Suffix-closed tree of smoothed next-symbol distributions.
class PstTree {
public:
    struct Node {
        std::uint32_t parent = PstCandidates::none;
        Symbol symbol = 0;
        std::vector<std::pair<Symbol, std::uint32_t>> children;  // sorted
        std::vector<double> dist;

        friend bool operator==(const Node&, const Node&) = default;
    };

    PstTree() = default;

    static PstTree from_nodes(std::vector<Node> nodes, std::size_t alphabet_size) {
        if (nodes.empty()) throw DataError("PST: missing root");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].dist.size() != alphabet_size) throw DataError("PST: distribution size mismatch");
            for (const auto& [s, c] : nodes[i].children)
                if (c <= i || c >= nodes.size() || s >= alphabet_size) throw DataError("PST: malformed node list");
        }
        PstTree t;
        t.nodes_ = std::move(nodes);
        return t;
    }

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    std::uint32_t child(std::uint32_t id, Symbol sym) const {
        const auto& ch = nodes_[id].children;
        auto it = std::lower_bound(ch.begin(), ch.end(), sym, [](const auto& e, Symbol s) { return e.first < s; });
        return (it != ch.end() && it->first == sym) ? it->second : PstCandidates::none;
    }

    /// Deepest node whose label is a suffix of `context`.
    std::uint32_t lookup(SequenceView context) const {
        std::uint32_t cur = 0;
        for (std::size_t i = context.size(); i-- > 0;) {
            const std::uint32_t next = child(cur, context[i]);
            if (next == PstCandidates::none) break;
            cur = next;
        }
        return cur;
    }

    /// The node labelled exactly `s`, or none.
    std::uint32_t find(SequenceView s) const {
        std::uint32_t cur = 0;
        for (std::size_t i = s.size(); i-- > 0;) {
            cur = child(cur, s[i]);
            if (cur == PstCandidates::none) return cur;
        }
        return cur;
    }

    Sequence label(std::uint32_t id) const {
        Sequence out;
        for (; id != 0; id = nodes_[id].parent) out.push_back(nodes_[id].symbol);
        return out;
    }

    std::vector<Sequence> labels() const {
        std::vector<Sequence> out;
        for (std::uint32_t i = 0; i < nodes_.size(); ++i) out.push_back(label(i));
        return out;
    }

    double prob(Symbol sym, SequenceView context) const { return nodes_[lookup(context)].dist.at(sym); }

    friend bool operator==(const PstTree&, const PstTree&) = default;

private:
    friend PstTree pst_build_tree(const PstCandidates&, const std::vector<char>&, double);
    std::vector<Node> nodes_;
};

/// Keep the accepted candidates plus all their suffixes; smooth distributions.
inline PstTree pst_build_tree(const PstCandidates& cand, const std::vector<char>& accepted, double gamma) {
    const auto& cn = cand.nodes();
    std::vector<char> keep(cn.size(), 0);
    keep[0] = 1;
    for (std::uint32_t i = 1; i < cn.size(); ++i)
        if (accepted[i])
            for (std::uint32_t j = i; j != 0 && !keep[j]; j = cn[j].parent) keep[j] = 1;
    const std::size_t k = cand.alphabet_size();
    std::vector<std::uint32_t> remap(cn.size(), PstCandidates::none);
    PstTree t;
    // parents precede children in the candidate node list
    for (std::uint32_t i = 0; i < cn.size(); ++i) {
        if (!keep[i]) continue;
        remap[i] = static_cast<std::uint32_t>(t.nodes_.size());
        PstTree::Node n;
        n.symbol = cn[i].symbol;
        std::vector<double> emp = cand.empirical(i);
        if (cn[i].follower_total == 0) std::fill(emp.begin(), emp.end(), 1.0 / static_cast<double>(k));
        n.dist = pst_smooth(emp, gamma);
        if (i != 0) {
            n.parent = remap[cn[i].parent];
            t.nodes_[n.parent].children.push_back({n.symbol, remap[i]});
        }
        t.nodes_.push_back(std::move(n));
    }
    for (auto& n : t.nodes_) std::sort(n.children.begin(), n.children.end());
    return t;
}

namespace detail {

/// Condition (ii) for symbol `sym`: the conditional differs from the parent's
/// by a factor of at least r in either direction.
inline bool pst_ratio_passes(const PstCandidates& cand, std::uint32_t id, Symbol sym, double r) {
    const auto& n = cand.node(id);
    const auto& p = cand.node(n.parent);
    const double child = static_cast<double>(cand.follower_count(id, sym)) / static_cast<double>(n.follower_total);
    if (p.follower_total == 0) return true;
    const double parent = static_cast<double>(cand.follower_count(n.parent, sym)) / static_cast<double>(p.follower_total);
    if (parent == 0.0) return child > 0.0;
    const double ratio = child / parent;
    return ratio >= r || ratio <= 1.0 / r;
}

template <typename ThresholdFn>
std::vector<char> pst_accept(const PstCandidates& cand, double r, ThresholdFn threshold) {
    const auto& cn = cand.nodes();
    std::vector<char> accepted(cn.size(), 0);
    for (std::uint32_t i = 1; i < cn.size(); ++i) {
        if (!cn[i].candidate) continue;
        for (const auto& [sym, c] : cn[i].followers)
            if (threshold(cn[i], c) && pst_ratio_passes(cand, i, sym, r)) {
                accepted[i] = 1;
                break;
            }
    }
    return accepted;
}

}  // namespace detail

/// Second and third stages: accept s if some sigma has P(sigma|s) >= (1+alpha) gamma
/// and P(sigma|s) / P(sigma|suffix(s)) >= r or <= 1/r.
inline PstTree pst_grow(const PstCandidates& cand, const PstParams& params) {
    const double threshold = (1.0 + params.alpha) * params.gamma;
    auto accepted = detail::pst_accept(cand, params.r, [&](const PstCandidates::Node& n, std::uint64_t c) {
        return static_cast<double>(c) / static_cast<double>(n.follower_total) >= threshold;
    });
    return pst_build_tree(cand, accepted, params.gamma);
}

/// As pst_grow with condition (i) replaced by N(s sigma) >= hits.
inline PstTree pst_star_grow(const PstCandidates& cand, const PstStarParams& params) {
    auto accepted = detail::pst_accept(cand, params.r,
                                       [&](const PstCandidates::Node&, std::uint64_t c) { return c >= params.hits; });
    return pst_build_tree(cand, accepted, params.gamma);
}

inline void check_pst_common(std::size_t k, double gamma, double r) {
    if (!(gamma >= 0.0) || gamma * static_cast<double>(k) >= 1.0)
        throw DataError("PST gamma must satisfy 0 <= gamma < 1/k");
    if (!(r > 1.0)) throw DataError("PST ratio threshold r must exceed 1");
}

/// Predictor over a PST; `Params` is PstParams or PstStarParams.
template <typename Params>
class BasicPstPredictor : public Predictor {
public:
    BasicPstPredictor(std::size_t alphabet_size, Params params) : k_(alphabet_size), params_(params) {
        if (k_ < 2) throw DataError("PST needs at least two symbols");
        check_pst_common(k_, params_.gamma, params_.r);
        if constexpr (std::is_same_v<Params, PstParams>) {
            if (!(params_.p_min >= 0.0)) throw DataError("PST Pmin must be non-negative");
        } else {
            if (params_.n_min < 1) throw DataError("PST* Nmin must be at least 1");
            if (params_.hits < 1) throw DataError("PST* hits must be at least 1");
        }
        std::vector<double> uniform(k_, 1.0 / static_cast<double>(k_));
        tree_ = PstTree::from_nodes({PstTree::Node{PstCandidates::none, 0, {}, pst_smooth(uniform, params_.gamma)}}, k_);
    }

    std::size_t alphabet_size() const override { return k_; }
    const Params& params() const noexcept { return params_; }
    const PstTree& tree() const noexcept { return tree_; }

    void train(const std::vector<Sequence>& sequences) override {
        if constexpr (std::is_same_v<Params, PstParams>) {
            tree_ = pst_grow(pst_candidates(sequences, k_, params_), params_);
        } else {
            tree_ = pst_star_grow(pst_star_candidates(sequences, k_, params_), params_);
        }
    }

    void restore(PstTree tree) { tree_ = std::move(tree); }

    double prob(Symbol sym, SequenceView context) const override {
        const std::size_t take = std::min(context.size(), params_.depth);
        return tree_.prob(sym, context.subspan(context.size() - take));
    }

    std::unique_ptr<Session> session(SequenceView history) const override {
        return std::make_unique<ContextSession>(*this, history);
    }

private:
    std::size_t k_;
    Params params_;
    PstTree tree_;
};

using PstPredictor = BasicPstPredictor<PstParams>;
using PstStarPredictor = BasicPstPredictor<PstStarParams>;

}  // namespace vmm

#endif  // VMM_PST_HPP
