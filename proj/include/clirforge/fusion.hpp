#pragma once

#include <string>
#include <vector>

#include "clirforge/types.hpp"

namespace clirforge {

struct FusionSpec {
    enum class Missing { zero, renorm };

    std::vector<std::string> member_tags;
    std::vector<double> weights;  // empty = all ones
    std::string output_tag;
    Missing missing = Missing::zero;
};

/// Per-query min-max rescaling to [0, 1]. A query whose scores are all
/// equal maps to all zeros; lists are re-sorted (score desc, doc_id desc).
Run minmax_normalize(const Run& run);

/// Weighted average of per-query min-max normalized member scores over the
/// union of each query's documents. A document absent from a member
/// contributes 0 under Missing::zero; under Missing::renorm the average
/// runs over the members that returned it.
Run fuse(const std::vector<Run>& runs, const FusionSpec& spec);

/// Reorder the top-depth documents of each query by external reranker
/// scores without changing the document set. Scored documents come first
/// (score desc, doc_id desc), unscored top-depth documents follow in their
/// candidate order, then everything below depth. Output scores are
/// rank-encoded (score = N - rank + 1) so the run min-max normalizes
/// cleanly downstream.
Run apply_rerank_scores(const Run& candidate, const RerankScores& rr);

}  // namespace clirforge
