#ifndef VMM_CLASSIFY_HPP
#define VMM_CLASSIFY_HPP

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "vmm/core.hpp"
#include "vmm/eval.hpp"
#include "vmm/registry.hpp"

namespace vmm {

/// Sequences grouped by class, all over one alphabet.
struct LabeledCorpus {
    std::vector<std::vector<Sequence>> classes;

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& c : classes) n += c.size();
        return n;
    }
};

/// One generative model per class; a sequence goes to the class whose model
/// gives it the highest probability.
struct WtaClassifier {
    Algorithm algorithm = Algorithm::lz78;
    std::size_t alphabet_size = 0;
    std::vector<Params> params;  // per class
    std::vector<std::unique_ptr<Predictor>> models;
};

inline WtaClassifier train_class_models(const LabeledCorpus& corpus, std::size_t alphabet_size, Algorithm alg,
                                        const std::vector<Params>& per_class) {
    if (corpus.classes.empty()) throw DataError("no classes");
    if (per_class.size() != corpus.classes.size()) throw DataError("need one parameter vector per class");
    WtaClassifier clf;
    clf.algorithm = alg;
    clf.alphabet_size = alphabet_size;
    for (std::size_t c = 0; c < corpus.classes.size(); ++c) {
        if (corpus.classes[c].empty()) throw DataError("class " + std::to_string(c) + " has no training sequences");
        auto model = make_predictor(alg, alphabet_size, per_class[c]);
        model->train(corpus.classes[c]);
        clf.params.push_back(effective_params(alg, per_class[c], true));
        clf.models.push_back(std::move(model));
    }
    return clf;
}

inline WtaClassifier train_class_models(const LabeledCorpus& corpus, std::size_t alphabet_size, Algorithm alg,
                                        const Params& params) {
    return train_class_models(corpus, alphabet_size, alg, std::vector<Params>(corpus.classes.size(), params));
}

/// Per-class log2 P(x).
inline std::vector<double> class_scores(const WtaClassifier& clf, SequenceView x) {
    std::vector<double> out;
    for (const auto& m : clf.models) out.push_back(sequence_log_prob(*m, x));
    return out;
}

/// argmax_i log P_i(x); the lowest class index wins ties.
inline std::size_t wta_classify(const WtaClassifier& clf, SequenceView x) {
    if (clf.models.empty()) throw DataError("classifier has no models");
    const auto scores = class_scores(clf, x);
    std::size_t best = 0;
    bool tie = false;
    for (std::size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) {
            best = c;
            tie = false;
        } else if (scores[c] == scores[best]) {
            tie = true;
        }
    }
    if (tie) warn("classification tie; choosing class " + std::to_string(best));
    return best;
}

struct ClassificationReport {
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> errors;
    std::vector<double> class_error;
    double macro = 0.0;
    double weighted = 0.0;
};

/// Zero-one error per class, their unweighted mean and the size-weighted mean.
inline ClassificationReport make_report(const std::vector<std::size_t>& sizes, const std::vector<std::size_t>& errors) {
    if (sizes.size() != errors.size()) throw DataError("report: size mismatch");
    ClassificationReport r;
    r.sizes = sizes;
    r.errors = errors;
    std::size_t total = 0;
    std::size_t wrong = 0;
    std::size_t nonempty = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        const double e = sizes[c] ? static_cast<double>(errors[c]) / static_cast<double>(sizes[c]) : 0.0;
        r.class_error.push_back(e);
        if (sizes[c]) {
            r.macro += e;
            ++nonempty;
        }
        total += sizes[c];
        wrong += errors[c];
    }
    if (nonempty) r.macro /= static_cast<double>(nonempty);
    r.weighted = total ? static_cast<double>(wrong) / static_cast<double>(total) : 0.0;
    return r;
}

inline ClassificationReport classification_report(const WtaClassifier& clf, const LabeledCorpus& test) {
    if (test.classes.size() != clf.models.size()) throw DataError("test corpus and classifier disagree on classes");
    std::vector<std::size_t> sizes, errors;
    for (std::size_t c = 0; c < test.classes.size(); ++c) {
        sizes.push_back(test.classes[c].size());
        std::size_t wrong = 0;
        for (const auto& x : test.classes[c])
            if (wta_classify(clf, x) != c) ++wrong;
        errors.push_back(wrong);
    }
    return make_report(sizes, errors);
}

struct CvClassificationReport {
    std::vector<ClassificationReport> folds;
    std::vector<double> class_error;      // mean over folds
    std::vector<double> class_error_sem;  // SEM over folds
    double macro = 0.0;
    double macro_sem = 0.0;
    double weighted = 0.0;
    double weighted_sem = 0.0;
    std::vector<std::vector<Params>> selected;  // per fold, per class
};

/// Five-fold cross-validated classification. Sequence j of a class belongs to
/// fold j mod 5. Each class model is tuned with cv_tune on its own training
/// sequences when the grid has more than one entry.
inline CvClassificationReport classification_cv(const LabeledCorpus& corpus, std::size_t alphabet_size, Algorithm alg,
                                                const Grid& grid, std::size_t n_folds = 5) {
    if (corpus.classes.size() < 2) throw DataError("classification needs at least two classes");
    if (grid.empty()) throw DataError("empty hyper-parameter grid");
    for (std::size_t c = 0; c < corpus.classes.size(); ++c)
        if (corpus.classes[c].size() < n_folds)
            throw DataError("class " + std::to_string(c) + " has fewer sequences than folds");
    CvClassificationReport out;
    const std::size_t k = corpus.classes.size();
    std::vector<std::vector<double>> per_class(k);
    std::vector<double> macros, weighteds;
    for (std::size_t f = 0; f < n_folds; ++f) {
        LabeledCorpus train, test;
        train.classes.resize(k);
        test.classes.resize(k);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < corpus.classes[c].size(); ++j)
                (j % n_folds == f ? test : train).classes[c].push_back(corpus.classes[c][j]);
        std::vector<Params> chosen;
        for (std::size_t c = 0; c < k; ++c)
            chosen.push_back(grid.size() == 1 ? grid[0] : cv_tune(train.classes[c], alphabet_size, alg, grid).selected);
        auto clf = train_class_models(train, alphabet_size, alg, chosen);
        auto rep = classification_report(clf, test);
        for (std::size_t c = 0; c < k; ++c) per_class[c].push_back(rep.class_error[c]);
        macros.push_back(rep.macro);
        weighteds.push_back(rep.weighted);
        out.selected.push_back(clf.params);
        out.folds.push_back(std::move(rep));
    }
    for (std::size_t c = 0; c < k; ++c) {
        out.class_error.push_back(mean(per_class[c]));
        out.class_error_sem.push_back(sem(per_class[c]));
    }
    out.macro = mean(macros);
    out.macro_sem = sem(macros);
    out.weighted = mean(weighteds);
    out.weighted_sem = sem(weighteds);
    return out;
}

}  // namespace vmm

#endif  // VMM_CLASSIFY_HPP
