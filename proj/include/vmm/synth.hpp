#ifndef VMM_SYNTH_HPP
#define VMM_SYNTH_HPP

#include <random>
#include <vector>

#include "vmm/classify.hpp"
#include "vmm/core.hpp"

namespace vmm {

/// Order-1 Markov source over k symbols: with probability `stay` the next
/// symbol is (prev + step) mod k, otherwise it is uniform.
struct CyclicMarkovSource {
    std::size_t k = 4;
    std::size_t step = 1;
    double stay = 0.9;

    template <typename Rng>
    Sequence sample(std::size_t length, Rng& rng) const {
        std::uniform_int_distribution<std::size_t> any(0, k - 1);
        std::bernoulli_distribution follow(stay);
        Sequence out;
        out.reserve(length);
        std::size_t prev = any(rng);
        for (std::size_t i = 0; i < length; ++i) {
            out.push_back(static_cast<Symbol>(prev));
            prev = follow(rng) ? (prev + step) % k : any(rng);
        }
        return out;
    }
};

/// Two classes whose dominant transitions are disjoint: cycling forwards
/// (+1) versus backwards (-1) through k >= 3 symbols.
template <typename Rng>
LabeledCorpus two_source_corpus(std::size_t per_class, std::size_t length, Rng& rng, std::size_t k = 4,
                                double stay = 0.9) {
    if (k < 3) throw DataError("two_source_corpus needs k >= 3");
    const CyclicMarkovSource sources[2] = {{k, 1, stay}, {k, k - 1, stay}};
    LabeledCorpus corpus;
    corpus.classes.resize(2);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < per_class; ++i) corpus.classes[c].push_back(sources[c].sample(length, rng));
    return corpus;
}

}  // namespace vmm

#endif  // VMM_SYNTH_HPP
