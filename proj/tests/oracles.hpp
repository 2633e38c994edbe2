#pragma once

// Reference implementations coded straight from the metric and scoring
// definitions. They share nothing with the library's computation paths on
// purpose; equivalence tests compare the two sides.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "clirforge/types.hpp"

namespace oracle {

inline double dcg(const std::vector<std::string>& ranked,
                  const std::map<std::string, int>& grades, std::size_t k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
        auto it = grades.find(ranked[i]);
        int g = it == grades.end() ? 0 : it->second;
        sum += g / (std::log(i + 2.0) / std::log(2.0));
    }
    return sum;
}

inline double ndcg(const std::vector<std::string>& ranked,
                   const std::map<std::string, int>& grades, std::size_t k) {
    std::vector<std::string> ideal;
    for (const auto& [doc, g] : grades)
        if (g > 0) ideal.push_back(doc);
    std::sort(ideal.begin(), ideal.end(), [&](const std::string& a, const std::string& b) {
        return grades.at(a) > grades.at(b);
    });
    double best = dcg(ideal, grades, k);
    if (best == 0.0) return 0.0;
    return dcg(ranked, grades, k) / best;
}

inline double average_precision(const std::vector<std::string>& ranked,
                                const std::map<std::string, int>& grades, std::size_t k) {
    std::size_t total_relevant = 0;
    for (const auto& [doc, g] : grades)
        if (g >= 1) ++total_relevant;
    if (total_relevant == 0) return 0.0;
    double sum = 0.0;
    std::size_t found = 0;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
        auto it = grades.find(ranked[i]);
        if (it != grades.end() && it->second >= 1) {
            ++found;
            sum += double(found) / double(i + 1);
        }
    }
    return sum / double(total_relevant);
}

inline double recall(const std::vector<std::string>& ranked,
                     const std::map<std::string, int>& grades, std::size_t k) {
    std::set<std::string> relevant;
    for (const auto& [doc, g] : grades)
        if (g >= 1) relevant.insert(doc);
    if (relevant.empty()) return 0.0;
    std::size_t found = 0;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
        if (relevant.count(ranked[i])) ++found;
    return double(found) / double(relevant.size());
}

/// Scores every document against the query term by term (terms in
/// ascending order, matching the engine's accumulation order so exact
/// equality is meaningful), keeps positives, sorts by (score desc,
/// doc_id asc) and truncates to k.
inline std::vector<clirforge::ScoredDoc> exhaustive_topk(const clirforge::SparseVectorSet& docs,
                                                         const clirforge::SparseVector& query,
                                                         std::size_t k) {
    std::vector<clirforge::ScoredDoc> hits;
    for (const auto& [doc_id, vec] : docs.vectors) {
        double score = 0.0;
        for (const auto& [term, qw] : query) {
            auto it = vec.find(term);
            if (it != vec.end()) score += qw * it->second;
        }
        if (score > 0.0) hits.push_back({doc_id, score});
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const clirforge::ScoredDoc& a, const clirforge::ScoredDoc& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.doc_id < b.doc_id;
                     });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

/// Plain double loop straight from the MaxSim definition.
inline double maxsim(const clirforge::TokenMatrix& query, const clirforge::TokenMatrix& doc) {
    double total = 0.0;
    for (std::size_t i = 0; i < query.rows(); ++i) {
        bool first = true;
        double best = 0.0;
        for (std::size_t j = 0; j < doc.rows(); ++j) {
            double dot = 0.0;
            for (std::size_t e = 0; e < query.dim; ++e)
                dot += double(query.data[i * query.dim + e]) * double(doc.data[j * doc.dim + e]);
            if (first || dot > best) {
                best = dot;
                first = false;
            }
        }
        total += best;
    }
    return total;
}

inline std::vector<clirforge::ScoredDoc> exhaustive_maxsim_topk(const clirforge::EmbeddingSet& docs,
                                                                const clirforge::TokenMatrix& query,
                                                                std::size_t k) {
    std::vector<clirforge::ScoredDoc> hits;
    for (const auto& [doc_id, matrix] : docs.matrices) hits.push_back({doc_id, maxsim(query, matrix)});
    std::stable_sort(hits.begin(), hits.end(),
                     [](const clirforge::ScoredDoc& a, const clirforge::ScoredDoc& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.doc_id < b.doc_id;
                     });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

/// Set-intersection view of dev-set filtering: per query, keep judged docs
/// inside the collection; keep the query only if a kept doc has grade >= 1.
inline clirforge::Qrels filter_by_intersection(const clirforge::Qrels& qrels,
                                               const std::set<std::string>& collection) {
    clirforge::Qrels out;
    for (const auto& [qid, docs] : qrels.judgments) {
        std::map<std::string, int> kept;
        for (const auto& [doc, g] : docs)
            if (collection.count(doc)) kept[doc] = g;
        bool relevant = std::any_of(kept.begin(), kept.end(),
                                    [](const auto& e) { return e.second >= 1; });
        if (relevant) out.judgments[qid] = kept;
    }
    return out;
}

}  // namespace oracle
