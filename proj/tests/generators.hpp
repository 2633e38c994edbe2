#pragma once

// Deterministic random instance generators shared by the unit and
// acceptance suites. Everything is seeded explicitly.

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "clirforge/corpus_io.hpp"
#include "clirforge/types.hpp"

namespace testgen {

using Rng = std::mt19937;

inline std::string doc_name(std::size_t i) { return "d" + std::to_string(i + 1); }
inline std::string query_name(std::size_t i) { return "q" + std::to_string(i + 1); }
inline std::string term_name(std::size_t i) { return "t" + std::to_string(i + 1); }

inline std::vector<std::size_t> sample_indices(Rng& rng, std::size_t universe, std::size_t count) {
    std::vector<std::size_t> all(universe);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::min(count, universe));
    return all;
}

/// Scores drawn as distinct integers so per-query orderings are total and
/// min-max normalization stays injective; pass integer_scores = false for
/// arbitrary continuous scores.
inline clirforge::Run random_run(Rng& rng, std::size_t max_queries, std::size_t max_docs,
                                 bool integer_scores = true, const std::string& tag = "rand") {
    clirforge::Run run;
    run.tag = tag;
    std::uniform_int_distribution<std::size_t> n_queries(1, max_queries);
    std::uniform_int_distribution<std::size_t> n_docs(1, max_docs);
    std::uniform_real_distribution<double> real_score(-1e6, 1e6);
    std::size_t queries = n_queries(rng);
    for (std::size_t q = 0; q < queries; ++q) {
        auto docs = sample_indices(rng, max_docs, n_docs(rng));
        std::vector<double> scores;
        if (integer_scores) {
            auto values = sample_indices(rng, 4 * max_docs + 8, docs.size());
            for (std::size_t v : values) scores.push_back(double(v));
        } else {
            for (std::size_t i = 0; i < docs.size(); ++i) scores.push_back(real_score(rng));
        }
        auto& list = run.lists[query_name(q)];
        for (std::size_t i = 0; i < docs.size(); ++i)
            list.push_back({doc_name(docs[i]), scores[i], 0});
    }
    clirforge::canonicalize(run);
    return run;
}

/// Judgments over the same d1..dN namespace; grades 0..max_grade, with at
/// least one relevant document per judged query.
inline clirforge::Qrels random_qrels(Rng& rng, std::size_t max_queries, std::size_t max_docs,
                                     int max_grade = 3) {
    clirforge::Qrels qrels;
    std::uniform_int_distribution<std::size_t> n_queries(1, max_queries);
    std::uniform_int_distribution<std::size_t> n_docs(1, max_docs);
    std::uniform_int_distribution<int> grade(0, max_grade);
    std::uniform_int_distribution<int> positive(1, max_grade);
    std::size_t queries = n_queries(rng);
    for (std::size_t q = 0; q < queries; ++q) {
        auto docs = sample_indices(rng, max_docs, n_docs(rng));
        auto& judged = qrels.judgments[query_name(q)];
        for (std::size_t i = 0; i < docs.size(); ++i)
            judged[doc_name(docs[i])] = i == 0 ? positive(rng) : grade(rng);
    }
    return qrels;
}

inline clirforge::SparseVector random_vector(Rng& rng, std::size_t vocab, std::size_t max_terms) {
    std::uniform_int_distribution<std::size_t> n_terms(1, max_terms);
    std::uniform_real_distribution<double> weight(1e-3, 10.0);
    clirforge::SparseVector vec;
    for (std::size_t t : sample_indices(rng, vocab, n_terms(rng))) vec[term_name(t)] = weight(rng);
    return vec;
}

inline clirforge::SparseVectorSet random_vector_set(Rng& rng, std::size_t docs, std::size_t vocab,
                                                    std::size_t max_terms) {
    clirforge::SparseVectorSet set;
    for (std::size_t d = 0; d < docs; ++d) {
        auto vec = random_vector(rng, vocab, max_terms);
        for (const auto& [term, w] : vec) {
            (void)w;
            set.vocabulary.insert(term);
        }
        set.vectors.emplace(doc_name(d), std::move(vec));
    }
    return set;
}

inline clirforge::TokenMatrix random_matrix(Rng& rng, std::size_t dim, std::size_t max_tokens,
                                            bool non_negative = false) {
    std::uniform_int_distribution<std::size_t> n_tokens(1, max_tokens);
    std::uniform_real_distribution<float> entry(non_negative ? 0.0f : -1.0f, 1.0f);
    clirforge::TokenMatrix m;
    m.dim = dim;
    std::size_t tokens = n_tokens(rng);
    m.data.resize(tokens * dim);
    for (auto& v : m.data) v = entry(rng);
    return m;
}

/// Entries are multiples of 1/16 so dot products and their sums stay exact
/// in double precision; permutation invariants can assert bitwise equality.
inline clirforge::TokenMatrix random_dyadic_matrix(Rng& rng, std::size_t dim,
                                                   std::size_t max_tokens) {
    std::uniform_int_distribution<std::size_t> n_tokens(1, max_tokens);
    std::uniform_int_distribution<int> sixteenth(-32, 32);
    clirforge::TokenMatrix m;
    m.dim = dim;
    std::size_t tokens = n_tokens(rng);
    m.data.resize(tokens * dim);
    for (auto& v : m.data) v = float(sixteenth(rng)) / 16.0f;
    return m;
}

inline clirforge::EmbeddingSet random_embedding_set(Rng& rng, std::size_t docs, std::size_t dim,
                                                    std::size_t max_tokens) {
    clirforge::EmbeddingSet set;
    set.dim = static_cast<std::uint32_t>(dim);
    for (std::size_t d = 0; d < docs; ++d)
        set.matrices.emplace(doc_name(d), random_matrix(rng, dim, max_tokens));
    return set;
}

}  // namespace testgen
