#ifndef VMM_ARTIFACT_HPP
#define VMM_ARTIFACT_HPP

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <iterator>
#include <string>
#include <typeinfo>

#include <json.hpp>

#include "vmm/io.hpp"
#include "vmm/registry.hpp"

namespace vmm {

inline constexpr int artifact_version = 1;

/// A trained predictor together with everything needed to use it again.
struct Artifact {
    Algorithm algorithm = Algorithm::lz78;
    Alphabet alphabet;
    Params params;  // effective parameter vector
    std::unique_ptr<Predictor> predictor;
    nlohmann::json metadata = nlohmann::json::object();
};

namespace detail {

using nlohmann::json;

inline json alphabet_to_json(const Alphabet& a) {
    if (a == Alphabet::bytes()) return "bytes";
    return a.tokens();
}

inline Alphabet alphabet_from_json(const json& j) {
    if (j.is_string() && j.get<std::string>() == "bytes") return Alphabet::bytes();
    return Alphabet(j.get<std::vector<std::string>>());
}

// rows of [parent, symbol, count] in creation order
inline json count_trie_to_json(const CountTrie& t) {
    json rows = json::array();
    for (const auto& n : t.nodes())
        rows.push_back({n.parent == CountTrie::none ? -1 : static_cast<long long>(n.parent), n.symbol, n.count});
    return rows;
}

inline CountTrie count_trie_from_json(const json& rows, std::size_t k) {
    if (!rows.is_array() || rows.empty()) throw DataError("artifact: bad trie");
    CountTrie t;
    t.node(CountTrie::root).count = rows[0].at(2).get<std::uint64_t>();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto parent = rows[i].at(0).get<long long>();
        const auto sym = rows[i].at(1).get<Symbol>();
        if (parent < 0 || static_cast<std::size_t>(parent) >= i || sym >= k) throw DataError("artifact: malformed trie");
        if (t.child(static_cast<CountTrie::NodeId>(parent), sym) != CountTrie::none)
            throw DataError("artifact: duplicate trie edge");
        const auto id = t.add_child(static_cast<CountTrie::NodeId>(parent), sym);
        t.node(id).count = rows[i].at(2).get<std::uint64_t>();
    }
    return t;
}

// per node: [n0, n1, sym, child, sym, child, ...]
inline json context_tree_to_json(const ContextTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
        json row = {n.counts.n0, n.counts.n1};
        for (const auto& [s, c] : n.children) {
            row.push_back(s);
            row.push_back(c);
        }
        nodes.push_back(std::move(row));
    }
    return {{"depth", t.depth()}, {"arity", t.arity()}, {"nodes", std::move(nodes)}};
}

inline ContextTree context_tree_from_json(const json& j) {
    std::vector<ContextTree::Node> nodes;
    for (const auto& row : j.at("nodes")) {
        if (row.size() < 2 || row.size() % 2 != 0) throw DataError("artifact: malformed context tree node");
        ContextTree::Node n;
        n.counts.n0 = row[0].get<std::uint64_t>();
        n.counts.n1 = row[1].get<std::uint64_t>();
        for (std::size_t i = 2; i < row.size(); i += 2)
            n.children.push_back({row[i].get<Symbol>(), row[i + 1].get<ContextTree::NodeId>()});
        nodes.push_back(std::move(n));
    }
    return ContextTree::from_nodes(j.at("depth").get<std::size_t>(), j.at("arity").get<std::size_t>(), std::move(nodes));
}

inline json pst_tree_to_json(const PstTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes())
        nodes.push_back({{"parent", n.parent == PstCandidates::none ? -1 : static_cast<long long>(n.parent)},
                         {"symbol", n.symbol},
                         {"dist", n.dist}});
    return nodes;
}

inline PstTree pst_tree_from_json(const json& j, std::size_t k) {
    std::vector<PstTree::Node> nodes;
    for (std::size_t i = 0; i < j.size(); ++i) {
        PstTree::Node n;
        const auto parent = j[i].at("parent").get<long long>();
        n.symbol = j[i].at("symbol").get<Symbol>();
        n.dist = j[i].at("dist").get<std::vector<double>>();
        if (i == 0) {
            if (parent != -1) throw DataError("artifact: PST root has a parent");
        } else {
            if (parent < 0 || static_cast<std::size_t>(parent) >= i) throw DataError("artifact: malformed PST");
            n.parent = static_cast<std::uint32_t>(parent);
            nodes[n.parent].children.push_back({n.symbol, static_cast<std::uint32_t>(i)});
        }
        nodes.push_back(std::move(n));
    }
    for (auto& n : nodes) std::sort(n.children.begin(), n.children.end());
    return PstTree::from_nodes(std::move(nodes), k);
}

inline json decomposition_to_json(const DecompositionTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) nodes.push_back({n.left, n.right, n.symbol});
    return {{"root", t.root()}, {"nodes", std::move(nodes)}};
}

inline DecompositionTree decomposition_from_json(const json& j) {
    std::vector<DecompositionTree::Node> nodes;
    for (const auto& row : j.at("nodes")) {
        DecompositionTree::Node n;
        n.left = row.at(0).get<int>();
        n.right = row.at(1).get<int>();
        n.symbol = row.at(2).get<Symbol>();
        nodes.push_back(std::move(n));
    }
    const int root = j.at("root").get<int>();
    const auto within = [&](int id) { return id >= 0 && static_cast<std::size_t>(id) < nodes.size(); };
    std::vector<char> visiting(nodes.size(), 0);
    std::function<void(int)> fill = [&](int id) {
        if (!within(id) || visiting[static_cast<std::size_t>(id)]) throw DataError("artifact: malformed decomposition");
        visiting[static_cast<std::size_t>(id)] = 1;
        auto& n = nodes[static_cast<std::size_t>(id)];
        if (n.left < 0) {
            n.symbols = {n.symbol};
            return;
        }
        fill(n.left);
        fill(n.right);
        const auto& ls = nodes[static_cast<std::size_t>(n.left)].symbols;
        const auto& rs = nodes[static_cast<std::size_t>(n.right)].symbols;
        n.symbols.clear();
        std::merge(ls.begin(), ls.end(), rs.begin(), rs.end(), std::back_inserter(n.symbols));
    };
    fill(root);
    return DecompositionTree(std::move(nodes), root);
}

inline json state_to_json(Algorithm alg, const Predictor& p) {
    switch (alg) {
        case Algorithm::lz78:
        case Algorithm::lzms: return {{"trie", count_trie_to_json(dynamic_cast<const LzPredictor&>(p).trie().trie())}};
        case Algorithm::ppmc: {
            const auto& q = dynamic_cast<const PpmPredictor&>(p);
            return {{"trie", count_trie_to_json(q.trie())}, {"tail", q.tail()}};
        }
        case Algorithm::ctw: {
            const auto& q = dynamic_cast<const CtwPredictor&>(p);
            return {{"tree", context_tree_to_json(q.tree())}, {"tail", q.tail()}};
        }
        case Algorithm::bictw: {
            const auto& q = dynamic_cast<const BiCtwPredictor&>(p);
            return {{"tree", context_tree_to_json(q.tree())}, {"tail", q.tail()}};
        }
        case Algorithm::dectw: {
            const auto& q = dynamic_cast<const DeCtwPredictor&>(p);
            json comps = json::array();
            for (const auto& c : q.components())
                comps.push_back({{"tree", context_tree_to_json(c.tree)}, {"tail", c.tail}});
            return {{"decomposition", decomposition_to_json(q.decomposition())}, {"components", std::move(comps)}};
        }
        case Algorithm::pst: return {{"tree", pst_tree_to_json(dynamic_cast<const PstPredictor&>(p).tree())}};
        case Algorithm::pststar: return {{"tree", pst_tree_to_json(dynamic_cast<const PstStarPredictor&>(p).tree())}};
    }
    throw DataError("unknown algorithm");
}

inline void check_symbols(const Sequence& s, std::size_t k) { validate(s, k); }

inline ContextTree checked_tree(const json& j, const Params& params, std::size_t arity) {
    ContextTree t = context_tree_from_json(j);
    if (t.depth() != as_count(params, "D") || t.arity() != arity)
        throw DataError("artifact: context tree shape does not match parameters");
    return t;
}

inline std::unique_ptr<Predictor> state_from_json(Algorithm alg, std::size_t k, const Params& params, const json& st) {
    auto pred = make_predictor(alg, k, params);
    switch (alg) {
        case Algorithm::lz78:
        case Algorithm::lzms:
            dynamic_cast<LzPredictor&>(*pred).set_trie(LzTrie::from_trie(k, count_trie_from_json(st.at("trie"), k)));
            break;
        case Algorithm::ppmc: {
            auto tail = st.at("tail").get<Sequence>();
            check_symbols(tail, k);
            dynamic_cast<PpmPredictor&>(*pred).restore(count_trie_from_json(st.at("trie"), k), std::move(tail));
            break;
        }
        case Algorithm::ctw: {
            auto tail = st.at("tail").get<Sequence>();
            check_symbols(tail, 2);
            dynamic_cast<CtwPredictor&>(*pred).restore(checked_tree(st.at("tree"), params, 2), std::move(tail));
            break;
        }
        case Algorithm::bictw: {
            auto tail = st.at("tail").get<Sequence>();
            check_symbols(tail, 2);
            dynamic_cast<BiCtwPredictor&>(*pred).restore(checked_tree(st.at("tree"), params, 2), std::move(tail));
            break;
        }
        case Algorithm::dectw: {
            std::vector<ContextTree> trees;
            std::vector<Sequence> tails;
            for (const auto& c : st.at("components")) {
                trees.push_back(context_tree_from_json(c.at("tree")));
                if (trees.back().depth() != as_count(params, "D"))
                    throw DataError("artifact: context tree depth does not match parameters");
                tails.push_back(c.at("tail").get<Sequence>());
                check_symbols(tails.back(), trees.back().arity());
            }
            auto tree = decomposition_from_json(st.at("decomposition"));
            if (tree.alphabet_size() != k) throw DataError("artifact: decomposition does not match alphabet");
            dynamic_cast<DeCtwPredictor&>(*pred).restore(std::move(tree), std::move(trees), std::move(tails));
            break;
        }
        case Algorithm::pst:
            dynamic_cast<PstPredictor&>(*pred).restore(pst_tree_from_json(st.at("tree"), k));
            break;
        case Algorithm::pststar:
            dynamic_cast<PstStarPredictor&>(*pred).restore(pst_tree_from_json(st.at("tree"), k));
            break;
    }
    return pred;
}

}  // namespace detail

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline nlohmann::json artifact_to_json(const Artifact& a) {
    if (!a.predictor) throw DataError("artifact has no predictor");
    return {{"format", "vmm-model"},
            {"version", artifact_version},
            {"algorithm", to_string(a.algorithm)},
            {"alphabet", detail::alphabet_to_json(a.alphabet)},
            {"params", a.params},
            {"state", detail::state_to_json(a.algorithm, *a.predictor)},
            {"metadata", a.metadata}};
}

inline Artifact artifact_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "vmm-model") throw DataError("not a model artifact");
        const int version = j.at("version").get<int>();
        if (version != artifact_version) throw DataError("unsupported artifact version " + std::to_string(version));
        Artifact a;
        a.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
        a.alphabet = detail::alphabet_from_json(j.at("alphabet"));
        a.params = effective_params(a.algorithm, j.at("params").get<Params>(), true);
        a.predictor = detail::state_from_json(a.algorithm, a.alphabet.size(), a.params, j.at("state"));
        a.metadata = j.value("metadata", nlohmann::json::object());
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed artifact: ") + e.what());
    } catch (const std::bad_cast&) {
        throw DataError("malformed artifact: state does not match algorithm");
    }
}

inline void save_artifact(const Artifact& a, const std::filesystem::path& path) {
    std::string text;
    try {
        text = artifact_to_json(a).dump(1);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("cannot serialize artifact: ") + e.what());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text << '\n';
    if (!out) throw DataError("error writing " + path.string());
}

inline Artifact load_artifact(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return artifact_from_json(j);
}

}  // namespace vmm

#endif  // VMM_ARTIFACT_HPP
