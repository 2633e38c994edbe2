#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "clirforge/types.hpp"

namespace clirforge {

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

/// Positive-feedback Rocchio; term_cap 0 means unlimited.
struct RocchioParams {
    double alpha = 1.0;
    double beta = 0.75;
    std::size_t fb_docs = 10;
    std::size_t term_cap = 0;
};

struct Bm25Stats {
    std::size_t doc_count = 0;
    double avg_doc_len = 0.0;
    std::map<std::string, std::size_t> doc_freq;
};

/// Immutable inverted impact index. Documents are interned in ascending
/// doc_id order, so posting lists are sorted by doc_id and internal-id
/// comparisons agree with lexicographic ones. Safe for concurrent queries
/// once built.
class ImpactIndex {
public:
    struct Posting {
        std::uint32_t doc = 0;
        double weight = 0.0;
    };

    static ImpactIndex build(const SparseVectorSet& vectors);

    std::size_t doc_count() const { return doc_ids_.size(); }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    std::size_t term_count() const { return terms_.size(); }
    const std::vector<Posting>* postings(const std::string& term) const;

    /// Rebuild one document's sparse vector from the posting lists.
    SparseVector reconstruct(const std::string& doc_id) const;

    /// Exact top-k dot-product retrieval. Only documents with score > 0
    /// qualify; ordering is (score desc, doc_id asc). Term-at-a-time
    /// accumulation with a bounded heap; query terms are visited in
    /// ascending term order so scores are reproducible bit for bit.
    std::vector<ScoredDoc> retrieve_topk(const SparseVector& query, std::size_t k) const;

    // Binary container, magic "NCII".
    void save(std::ostream& out) const;
    static ImpactIndex load(std::istream& in);

private:
    std::vector<std::string> doc_ids_;
    std::vector<std::string> terms_;  // ascending
    std::unordered_map<std::string, std::uint32_t> term_lookup_;
    std::vector<std::vector<Posting>> postings_;
};

ImpactIndex read_index_file(const std::string& path);
void write_index_file(const std::string& path, const ImpactIndex& index);

/// Corpus statistics for BM25; validates tf >= 1 and a non-empty corpus.
Bm25Stats bm25_corpus_stats(const SparseVectorSet& token_counts);

/// idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)); non-negative by
/// construction so weighted vectors stay inside the dot-product engine.
double bm25_idf(const Bm25Stats& stats, const std::string& term);

/// Document side: w(t) = tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl/avgdl)).
SparseVectorSet bm25_weigh_corpus(const SparseVectorSet& token_counts, const Bm25Params& params);

/// Query side: w(t) = idf(t). Dot products of the two sides reproduce the
/// BM25 score.
SparseVector bm25_weigh_query(const SparseVector& query_tf, const Bm25Stats& stats);

/// q' = alpha * q + beta * centroid(top fb_docs of first_pass); keeps the
/// term_cap heaviest terms when capped (ties broken by term ascending).
SparseVector rocchio_expand(const SparseVector& query, const std::vector<ScoredDoc>& first_pass,
                            const SparseVectorSet& vectors, const RocchioParams& params);

/// Two-pass retrieval: retrieve, expand with rocchio_expand, retrieve again.
/// An empty first pass short-circuits to an empty result.
std::vector<ScoredDoc> retrieve_with_prf(const ImpactIndex& index, const SparseVectorSet& vectors,
                                         const SparseVector& query, std::size_t k,
                                         const RocchioParams& params);

// Whole-query-set drivers, parallel across queries (worker count capped by
// CLIRFORGE_THREADS) with deterministic assembly in query-id order.
// Queries with no match are omitted from the run.
Run batch_retrieve(const ImpactIndex& index, const SparseVectorSet& queries, std::size_t k,
                   const std::string& tag);
Run batch_retrieve_prf(const ImpactIndex& index, const SparseVectorSet& vectors,
                       const SparseVectorSet& queries, std::size_t k, const RocchioParams& params,
                       const std::string& tag);

}  // namespace clirforge
