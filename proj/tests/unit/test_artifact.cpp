#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "common/fixtures.hpp"
#include "vmm/artifact.hpp"

using namespace vmm;
using namespace vmm::testing;

namespace {

Alphabet alphabet_of(std::size_t k) { return Alphabet::from_chars(std::string("abcdefgh").substr(0, k)); }

Artifact trained_artifact(Algorithm alg, const Params& params, std::size_t k, std::mt19937_64& rng) {
    Artifact a;
    a.algorithm = alg;
    a.alphabet = alphabet_of(k);
    a.params = effective_params(alg, params, true);
    a.predictor = make_predictor(alg, k, a.params);
    std::vector<Sequence> seqs;
    for (std::size_t j = 0, n = 1 + rng() % 3; j < n; ++j) seqs.push_back(structured_sequence(20 + rng() % 80, k, rng));
    a.predictor->train(seqs);
    a.metadata = {{"note", "unit test"}};
    return a;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("vmm_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Artifact, RoundTripIsExactForEveryAlgorithm) {
    std::mt19937_64 rng(1);
    for (std::size_t k : {2u, 5u}) {
        for (const auto& [alg, params] : small_configs(k)) {
            const Artifact a = trained_artifact(alg, params, k, rng);
            const auto path = temp_path("roundtrip.json");
            save_artifact(a, path);
            const Artifact b = load_artifact(path);
            std::filesystem::remove(path);
            ASSERT_EQ(b.algorithm, alg);
            ASSERT_EQ(b.alphabet, a.alphabet);
            ASSERT_EQ(b.params, a.params);
            ASSERT_EQ(b.metadata, a.metadata);
            for (int q = 0; q < 200; ++q) {
                const Symbol s = static_cast<Symbol>(rng() % k);
                const Sequence ctx = random_sequence(rng() % 12, k, rng);
                ASSERT_EQ(a.predictor->prob(s, ctx), b.predictor->prob(s, ctx)) << to_string(alg);
            }
            const Sequence t = random_sequence(30, k, rng);
            const Sequence h = random_sequence(rng() % 4, k, rng);
            ASSERT_EQ(sequence_log_prob(*a.predictor, t, h), sequence_log_prob(*b.predictor, t, h)) << to_string(alg);
        }
    }
}

TEST(Artifact, UntrainedAndTinyModelsRoundTrip) {
    std::mt19937_64 rng(2);
    for (const auto& [alg, params] : small_configs(3)) {
        Artifact a;
        a.algorithm = alg;
        a.alphabet = alphabet_of(3);
        a.params = effective_params(alg, params, true);
        a.predictor = make_predictor(alg, 3, a.params);
        a.predictor->train({Sequence{1}});
        const Artifact b = artifact_from_json(nlohmann::json::parse(artifact_to_json(a).dump()));
        for (Symbol s = 0; s < 3; ++s) ASSERT_EQ(a.predictor->prob(s, Sequence{0, 2}), b.predictor->prob(s, Sequence{0, 2}));
    }
}

TEST(Artifact, ByteAlphabetRoundTrip) {
    Artifact a;
    a.algorithm = Algorithm::ppmc;
    a.alphabet = Alphabet::bytes();
    a.params = effective_params(Algorithm::ppmc, {{"D", 2}});
    a.predictor = make_predictor(a.algorithm, 256, a.params);
    a.predictor->train({decode_input(std::string("\x00\xff\n abc", 7), InputMode::bytes, a.alphabet)});
    const auto j = artifact_to_json(a);
    EXPECT_EQ(j.at("alphabet"), "bytes");
    const Artifact b = artifact_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(b.alphabet, Alphabet::bytes());
    for (Symbol s : {0u, 10u, 97u, 255u}) EXPECT_EQ(a.predictor->prob(s, Sequence{32}), b.predictor->prob(s, Sequence{32}));
}

TEST(Artifact, SelfDescribingJson) {
    std::mt19937_64 rng(3);
    const Artifact a = trained_artifact(Algorithm::dectw, {{"D", 2}}, 4, rng);
    const auto j = artifact_to_json(a);
    EXPECT_EQ(j.at("format"), "vmm-model");
    EXPECT_EQ(j.at("version"), artifact_version);
    EXPECT_EQ(j.at("algorithm"), "dectw");
    EXPECT_EQ(j.at("params").at("D"), 2.0);
    EXPECT_TRUE(j.contains("state"));
}

TEST(Artifact, RejectsMalformedInput) {
    std::mt19937_64 rng(4);
    const Artifact a = trained_artifact(Algorithm::bictw, {{"D", 3}}, 3, rng);
    const auto good = artifact_to_json(a);

    auto j = good;
    j["format"] = "something-else";
    EXPECT_THROW(artifact_from_json(j), DataError);
    j = good;
    j["version"] = 99;
    EXPECT_THROW(artifact_from_json(j), DataError);
    j = good;
    j["algorithm"] = "ppmc";
    EXPECT_THROW(artifact_from_json(j), DataError);
    j = good;
    j["params"]["D"] = 5;
    EXPECT_THROW(artifact_from_json(j), DataError);
    j = good;
    j.erase("state");
    EXPECT_THROW(artifact_from_json(j), DataError);

    const auto path = temp_path("garbage.json");
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    EXPECT_THROW(load_artifact(path), DataError);
    std::filesystem::remove(path);
    EXPECT_THROW(load_artifact(temp_path("missing.json")), DataError);
}

TEST(Invariants, ChainRuleForEveryAlgorithm) {
    std::mt19937_64 rng(5);
    for (std::size_t k : {2u, 3u, 4u, 6u}) {
        for (const auto& [alg, params] : small_configs(k)) {
            // renormalized codewords have no block form
            if (alg == Algorithm::bictw && (k & (k - 1)) != 0) continue;
            for (int it = 0; it < 20; ++it) {
                auto p = make_predictor(alg, k, params);
                p->train({structured_sequence(10 + rng() % 60, k, rng)});
                // sessions pad short histories with the training tail; prob() does not
                const bool block = alg == Algorithm::ctw || alg == Algorithm::bictw || alg == Algorithm::dectw;
                const Sequence history = random_sequence(block ? rng() % 9 : 8, k, rng);
                const Sequence test = structured_sequence(25, k, rng);
                ASSERT_NEAR(sequence_log_prob(*p, test, history), reference_log2(alg, *p, test, history), 1e-9)
                    << to_string(alg) << " k=" << k;
            }
        }
    }
}

TEST(Invariants, SessionDistributionsSumToOne) {
    std::mt19937_64 rng(6);
    for (std::size_t k : {2u, 4u, 6u}) {
        for (const auto& [alg, params] : small_configs(k)) {
            if (alg == Algorithm::ppmc && params.count("exclusion") && params.at("exclusion") == 0) continue;
            auto p = make_predictor(alg, k, params);
            p->train({structured_sequence(50, k, rng)});
            auto s = p->session(random_sequence(3, k, rng));
            for (Symbol x : random_sequence(20, k, rng)) {
                double sum = 0.0;
                for (double v : s->distribution(k)) sum += v;
                ASSERT_NEAR(sum, 1.0, 1e-9) << to_string(alg);
                s->consume(x);
            }
        }
    }
}
