#pragma once

#include <vector>

#include "clirforge/types.hpp"

namespace clirforge {

/// Sum over query tokens of the maximum inner product against the document
/// tokens. Entries are stored as f32 and promoted to f64 for the products
/// and both sums; query tokens are accumulated in row order.
double maxsim_score(const TokenMatrix& query, const TokenMatrix& doc);

/// Exhaustive MaxSim retrieval: every document in the set is scored, no
/// candidate pruning. Returns top-k by (score desc, doc_id asc); zero and
/// negative scores still rank.
std::vector<ScoredDoc> late_retrieve(const EmbeddingSet& set, const TokenMatrix& query,
                                     std::size_t k);

/// late_retrieve over every query matrix, parallel across queries with
/// deterministic assembly in query-id order.
Run batch_late_retrieve(const EmbeddingSet& docs, const EmbeddingSet& queries, std::size_t k,
                        const std::string& tag);

}  // namespace clirforge
