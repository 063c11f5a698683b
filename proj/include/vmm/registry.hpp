#ifndef VMM_REGISTRY_HPP
#define VMM_REGISTRY_HPP

#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "vmm/bictw.hpp"
#include "vmm/ctw.hpp"
#include "vmm/dectw.hpp"
#include "vmm/lz.hpp"
#include "vmm/ppm.hpp"
#include "vmm/pst.hpp"

namespace vmm {

enum class Algorithm { lz78, lzms, ppmc, ctw, bictw, dectw, pst, pststar };

/// Named hyper-parameter vector, e.g. {"D": 5, "exclusion": 1}.
using Params = std::map<std::string, double>;

inline const std::vector<std::pair<Algorithm, std::string>>& algorithm_names() {
    static const std::vector<std::pair<Algorithm, std::string>> names{
        {Algorithm::lz78, "lz78"},   {Algorithm::lzms, "lzms"},   {Algorithm::ppmc, "ppmc"},
        {Algorithm::ctw, "ctw"},     {Algorithm::bictw, "bictw"}, {Algorithm::dectw, "dectw"},
        {Algorithm::pst, "pst"},     {Algorithm::pststar, "pststar"}};
    return names;
}

inline std::string to_string(Algorithm a) {
    for (const auto& [alg, name] : algorithm_names())
        if (alg == a) return name;
    return "?";
}

inline Algorithm parse_algorithm(const std::string& name) {
    for (const auto& [alg, n] : algorithm_names())
        if (n == name) return alg;
    throw DataError("unknown algorithm '" + name + "'");
}

/// Defaults of every parameter an algorithm accepts.
inline Params default_params(Algorithm alg) {
    switch (alg) {
        case Algorithm::lz78: return {};
        case Algorithm::lzms: return {{"M", 0}, {"S", 0}};
        case Algorithm::ppmc: return {{"D", 5}, {"exclusion", 1}, {"base", 0}};
        case Algorithm::ctw:
        case Algorithm::bictw: return {{"D", 8}, {"alpha", kt_alpha}, {"adaptive", 0}};
        case Algorithm::dectw: return {{"D", 8}, {"alpha", volf_alpha}, {"adaptive", 0}};
        case Algorithm::pst: return {{"Pmin", 0.001}, {"alpha", 0.01}, {"gamma", 0.001}, {"r", 1.05}, {"D", 12}};
        case Algorithm::pststar:
            return {{"Nmin", 2}, {"hits", 2}, {"alpha", 0}, {"gamma", 0.001}, {"r", 1.05}, {"D", 10}};
    }
    return {};
}

/// Defaults overlaid with `given`. Unknown keys are an error, except LZ-MS's
/// depth key, which is ignored.
inline Params effective_params(Algorithm alg, const Params& given, bool quiet = false) {
    Params out = default_params(alg);
    for (const auto& [key, value] : given) {
        if (alg == Algorithm::lzms && key == "D") {
            if (!quiet) warn("lzms ignores parameter D");
            continue;
        }
        if (!out.count(key)) throw DataError("algorithm " + to_string(alg) + " has no parameter '" + key + "'");
        if (!std::isfinite(value)) throw DataError("parameter " + key + " is not finite");
        out[key] = value;
    }
    return out;
}

inline std::size_t as_count(const Params& p, const std::string& key) {
    const double v = p.at(key);
    if (v < 0 || v != std::floor(v)) throw DataError("parameter " + key + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

inline bool as_flag(const Params& p, const std::string& key) {
    const double v = p.at(key);
    if (v != 0 && v != 1) throw DataError("parameter " + key + " must be 0 or 1");
    return v == 1;
}

inline LzMsParams lzms_params(const Params& p) { return {as_count(p, "M"), as_count(p, "S")}; }

inline PpmParams ppm_params(const Params& p) {
    PpmParams out;
    out.order = as_count(p, "D");
    out.exclusion = as_flag(p, "exclusion");
    out.base = as_flag(p, "base") ? PpmBase::training_frequency : PpmBase::uniform;
    return out;
}

inline CtwParams ctw_params(const Params& p) {
    CtwParams out;
    out.depth = as_count(p, "D");
    out.alpha = p.at("alpha");
    out.adaptive = as_flag(p, "adaptive");
    if (!(out.alpha > 0)) throw DataError("CTW alpha must be positive");
    return out;
}

inline PstParams pst_params(const Params& p) {
    PstParams out;
    out.p_min = p.at("Pmin");
    out.alpha = p.at("alpha");
    out.gamma = p.at("gamma");
    out.r = p.at("r");
    out.depth = as_count(p, "D");
    return out;
}

inline PstStarParams pst_star_params(const Params& p) {
    PstStarParams out;
    out.n_min = as_count(p, "Nmin");
    out.hits = as_count(p, "hits");
    out.alpha = p.at("alpha");
    out.gamma = p.at("gamma");
    out.r = p.at("r");
    out.depth = as_count(p, "D");
    return out;
}

/// Untrained predictor for `alg` over an alphabet of size k.
inline std::unique_ptr<Predictor> make_predictor(Algorithm alg, std::size_t k, const Params& given) {
    const Params p = effective_params(alg, given, true);
    switch (alg) {
        case Algorithm::lz78: return std::make_unique<LzPredictor>(k, LzMsParams{0, 0});
        case Algorithm::lzms: return std::make_unique<LzPredictor>(k, lzms_params(p));
        case Algorithm::ppmc: return std::make_unique<PpmPredictor>(k, ppm_params(p));
        case Algorithm::ctw: return std::make_unique<CtwPredictor>(k, ctw_params(p));
        case Algorithm::bictw: return std::make_unique<BiCtwPredictor>(k, ctw_params(p));
        case Algorithm::dectw: return std::make_unique<DeCtwPredictor>(k, ctw_params(p));
        case Algorithm::pst: return std::make_unique<PstPredictor>(k, pst_params(p));
        case Algorithm::pststar: return std::make_unique<PstStarPredictor>(k, pst_star_params(p));
    }
    throw DataError("unknown algorithm");
}

inline std::string format_params(const Params& p) {
    std::ostringstream out;
    out.precision(17);
    bool first = true;
    for (const auto& [k, v] : p) {
        if (!first) out << ',';
        first = false;
        out << k << '=' << v;
    }
    return out.str();
}

/// Parse "k=v,k=v".
inline Params parse_params(const std::string& text) {
    Params out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw DataError("malformed parameter '" + item + "', expected k=v");
        const std::string key = item.substr(0, eq);
        const std::string val = item.substr(eq + 1);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != val.size() || val.empty()) throw DataError("parameter " + key + " has non-numeric value '" + val + "'");
        out[key] = v;
    }
    return out;
}

using Grid = std::vector<Params>;

/// Cartesian product of per-key value lists, the last key varying fastest.
inline Grid cartesian(const std::vector<std::pair<std::string, std::vector<double>>>& axes) {
    Grid out{Params{}};
    for (const auto& [key, values] : axes) {
        Grid next;
        for (const auto& base : out)
            for (double v : values) {
                Params p = base;
                p[key] = v;
                next.push_back(std::move(p));
            }
        out = std::move(next);
    }
    return out;
}

inline std::vector<double> range_values(double from, double to, double step) {
    std::vector<double> out;
    for (double v = from; v <= to + 1e-9; v += step) out.push_back(v);
    return out;
}

enum class GridSet { prediction, classification };

/// Hyper-parameter grids of the prediction and protein-classification setups.
inline Grid default_grid(Algorithm alg, GridSet set = GridSet::prediction) {
    const bool pred = set == GridSet::prediction;
    switch (alg) {
        case Algorithm::lz78: return {Params{}};
        case Algorithm::lzms:
            if (pred)
                return cartesian({{"D", {5, 10, 15, 20}}, {"M", {0, 2, 4, 6, 8}}, {"S", range_values(0, 18, 2)}});
            return cartesian({{"M", {0, 2, 4, 6, 8}}, {"S", {0, 2, 4, 6, 8}}});
        case Algorithm::ppmc:
            if (pred) return cartesian({{"D", range_values(1, 19, 2)}});
            return cartesian({{"D", {1, 3, 5, 7, 9}}});
        case Algorithm::ctw:
        case Algorithm::bictw:
            if (pred) return cartesian({{"D", {8, 16, 32, 64}}});
            return cartesian({{"D", {8, 16, 32}}});
        case Algorithm::dectw:
            if (pred) return cartesian({{"D", {2, 4, 8, 16, 32}}});
            return cartesian({{"D", {4, 8}}});
        case Algorithm::pst:
            return cartesian({{"Pmin", {1e-4, 1e-3, 1e-2, 0.1}},
                              {"alpha", {0}},
                              {"gamma", {1e-4, 1e-3, 1e-2, 0.1}},
                              {"r", {1.05}},
                              {"D", {12}}});
        case Algorithm::pststar:
            return cartesian({{"hits", {2, 3, 4}},
                              {"alpha", {0}},
                              {"Nmin", {2, 3, 4, 5}},
                              {"gamma", {0.001}},
                              {"r", {1.05}},
                              {"D", {10, 15, 20}}});
    }
    return {Params{}};
}

}  // namespace vmm

#endif  // VMM_REGISTRY_HPP
