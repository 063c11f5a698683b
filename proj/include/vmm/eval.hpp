#ifndef VMM_EVAL_HPP
#define VMM_EVAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <vector>

#include "vmm/core.hpp"
#include "vmm/registry.hpp"

namespace vmm {

/// Third order statistic of five values.
inline double median5(std::vector<double> values) {
    if (values.size() != 5) throw DataError("median5 needs exactly five values");
    std::sort(values.begin(), values.end());
    return values[2];
}

/// Standard error of the mean (sample standard deviation / sqrt(n)); 0 for n < 2.
inline double sem(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return sd / std::sqrt(static_cast<double>(values.size()));
}

inline double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double m = 0.0;
    for (double v : values) m += v;
    return m / static_cast<double>(values.size());
}

struct Segment {
    std::size_t begin = 0;
    std::size_t size = 0;
};

/// Five contiguous segments of [0, n); the first n mod 5 get one extra element.
inline std::array<Segment, 5> cv_segments(std::size_t n) {
    std::array<Segment, 5> out{};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        out[i].begin = pos;
        out[i].size = n / 5 + (i < n % 5 ? 1 : 0);
        pos += out[i].size;
    }
    return out;
}

/// A test piece: symbols [begin, end) of sequence `seq`; the symbols of the
/// same sequence before `begin` serve as history.
struct Piece {
    std::size_t seq = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct Fold {
    std::vector<Sequence> train;
    std::vector<Piece> test;
};

/// Fold `i` of the five-fold split of `sequences` laid end to end.
inline Fold cv_fold(const std::vector<Sequence>& sequences, std::size_t i) {
    std::size_t total = 0;
    for (const auto& q : sequences) total += q.size();
    const auto seg = cv_segments(total)[i];
    const std::size_t lo = seg.begin;
    const std::size_t hi = seg.begin + seg.size;
    Fold fold;
    std::size_t offset = 0;
    for (std::size_t j = 0; j < sequences.size(); ++j) {
        const auto& q = sequences[j];
        const std::size_t a = offset;
        const std::size_t b = offset + q.size();
        offset = b;
        const std::size_t cut_lo = std::clamp(lo, a, b) - a;
        const std::size_t cut_hi = std::clamp(hi, a, b) - a;
        if (cut_lo > 0) fold.train.emplace_back(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(cut_lo));
        if (cut_hi > cut_lo) fold.test.push_back({j, cut_lo, cut_hi});
        if (cut_hi < q.size()) fold.train.emplace_back(q.begin() + static_cast<std::ptrdiff_t>(cut_hi), q.end());
    }
    return fold;
}

/// Average log-loss over test pieces, each scored with its in-sequence history.
inline double pieces_loss(const Predictor& predictor, const std::vector<Sequence>& sequences,
                          const std::vector<Piece>& pieces) {
    double bits = 0.0;
    std::size_t n = 0;
    for (const auto& p : pieces) {
        const SequenceView q = sequences[p.seq];
        bits -= sequence_log_prob(predictor, q.subspan(p.begin, p.end - p.begin), q.subspan(0, p.begin));
        n += p.end - p.begin;
    }
    if (n == 0) throw DataError("no test symbols");
    return bits / static_cast<double>(n);
}

struct TunedModel {
    Algorithm algorithm = Algorithm::lz78;
    Params selected;                    // effective parameter vector
    std::size_t selected_index = 0;     // position in the grid
    std::unique_ptr<Predictor> predictor;
    std::array<double, 5> fold_losses{};
    double median_loss = 0.0;
    /// Median CV loss of every grid entry; NaN where the entry was skipped.
    std::vector<double> grid_medians;
};

/// Five-fold contiguous cross-validation over `grid`; the vector with the
/// smallest median fold loss wins (earliest on ties) and is retrained on all
/// of `train`.
inline TunedModel cv_tune(const std::vector<Sequence>& train, std::size_t alphabet_size, Algorithm alg,
                          const Grid& grid) {
    if (grid.empty()) throw DataError("empty hyper-parameter grid");
    std::size_t total = 0;
    for (const auto& q : train) {
        validate(q, alphabet_size);
        total += q.size();
    }
    if (total < 10) throw DataError("cross-validation needs at least 10 training symbols");

    std::array<Fold, 5> folds;
    for (std::size_t i = 0; i < 5; ++i) folds[i] = cv_fold(train, i);

    std::map<Params, std::pair<std::array<double, 5>, double>> memo;
    bool warned_depth = false;
    TunedModel best;
    best.algorithm = alg;
    best.median_loss = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (alg == Algorithm::lzms && grid[g].count("D") && !warned_depth) {
            warn("lzms ignores parameter D");
            warned_depth = true;
        }
        Params eff;
        try {
            eff = effective_params(alg, grid[g], true);
            make_predictor(alg, alphabet_size, eff);
        } catch (const DataError& e) {
            warn("skipping grid entry " + format_params(grid[g]) + ": " + e.what());
            best.grid_medians.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        auto it = memo.find(eff);
        if (it == memo.end()) {
            std::array<double, 5> losses{};
            for (std::size_t i = 0; i < 5; ++i) {
                auto pred = make_predictor(alg, alphabet_size, eff);
                pred->train(folds[i].train);
                losses[i] = pieces_loss(*pred, train, folds[i].test);
            }
            const double med = median5({losses.begin(), losses.end()});
            it = memo.emplace(eff, std::make_pair(losses, med)).first;
        }
        const auto& [losses, med] = it->second;
        best.grid_medians.push_back(med);
        if (!found || med < best.median_loss) {
            found = true;
            best.median_loss = med;
            best.fold_losses = losses;
            best.selected = eff;
            best.selected_index = g;
        }
    }
    if (!found) throw DataError("no grid entry is valid for this alphabet");
    best.predictor = make_predictor(alg, alphabet_size, best.selected);
    best.predictor->train(train);
    return best;
}

inline TunedModel cv_tune(const Sequence& train, std::size_t alphabet_size, Algorithm alg, const Grid& grid) {
    return cv_tune(std::vector<Sequence>{train}, alphabet_size, alg, grid);
}

struct HalfSplitResult {
    double loss = 0.0;
    TunedModel tuned;
};

/// Tune on the first half, report the loss on the second half given the first.
inline HalfSplitResult half_split_eval(const Sequence& seq, std::size_t alphabet_size, Algorithm alg,
                                       const Grid& grid) {
    if (seq.size() < 20) throw DataError("half-split evaluation needs at least 20 symbols");
    auto [first, second] = half_split(seq);
    HalfSplitResult out;
    out.tuned = cv_tune(first, alphabet_size, alg, grid);
    out.loss = average_log_loss(*out.tuned.predictor, second, first);
    return out;
}

struct AblationReport {
    double m_loss = 0.0;
    std::size_t m_best = 0;
    double s_loss = 0.0;
    std::size_t s_best = 0;
    double joint_loss = 0.0;
    std::size_t joint_m = 0;
    std::size_t joint_s = 0;
};

/// Three LZ-MS half-split runs: M alone (S = 0), S alone (M = 0) and both.
inline AblationReport lzms_ablation(const Sequence& seq, std::size_t alphabet_size, const std::vector<double>& m_grid,
                                    const std::vector<double>& s_grid) {
    if (m_grid.empty() || s_grid.empty()) throw DataError("empty ablation grid");
    AblationReport r;
    auto m_run = half_split_eval(seq, alphabet_size, Algorithm::lzms, cartesian({{"M", m_grid}, {"S", {0}}}));
    r.m_loss = m_run.loss;
    r.m_best = as_count(m_run.tuned.selected, "M");
    auto s_run = half_split_eval(seq, alphabet_size, Algorithm::lzms, cartesian({{"M", {0}}, {"S", s_grid}}));
    r.s_loss = s_run.loss;
    r.s_best = as_count(s_run.tuned.selected, "S");
    auto j_run = half_split_eval(seq, alphabet_size, Algorithm::lzms, cartesian({{"M", m_grid}, {"S", s_grid}}));
    r.joint_loss = j_run.loss;
    r.joint_m = as_count(j_run.tuned.selected, "M");
    r.joint_s = as_count(j_run.tuned.selected, "S");
    return r;
}

}  // namespace vmm

#endif  // VMM_EVAL_HPP
