#include "clirforge/fusion.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "clirforge/corpus_io.hpp"

namespace clirforge {

Run minmax_normalize(const Run& run) {
    Run out;
    out.tag = run.tag;
    for (const auto& [qid, list] : run.lists) {
        if (list.empty()) continue;
        double lo = list.front().score;
        double hi = list.front().score;
        for (const auto& rec : list) {
            lo = std::min(lo, rec.score);
            hi = std::max(hi, rec.score);
        }
        auto& olist = out.lists[qid];
        olist.reserve(list.size());
        for (const auto& rec : list) {
            double s = hi == lo ? 0.0 : (rec.score - lo) / (hi - lo);
            olist.push_back({rec.doc_id, s, 0});
        }
    }
    canonicalize(out);
    return out;
}

Run fuse(const std::vector<Run>& runs, const FusionSpec& spec) {
    if (runs.empty() || spec.member_tags.empty())
        throw DomainError("fusion needs at least one member run");
    if (runs.size() != spec.member_tags.size())
        throw DomainError("got " + std::to_string(runs.size()) + " runs for " +
                          std::to_string(spec.member_tags.size()) + " member tags");
    for (std::size_t i = 0; i < runs.size(); ++i)
        if (runs[i].tag != spec.member_tags[i])
            throw DomainError("member " + std::to_string(i) + " has tag '" + runs[i].tag +
                              "', expected '" + spec.member_tags[i] + "'");
    std::vector<double> weights =
        spec.weights.empty() ? std::vector<double>(runs.size(), 1.0) : spec.weights;
    if (weights.size() != runs.size())
        throw DomainError("weights length does not match member count");
    double weight_sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw DomainError("fusion weights must be positive");
        weight_sum += w;
    }

    std::vector<Run> norm;
    norm.reserve(runs.size());
    for (const Run& r : runs) norm.push_back(minmax_normalize(r));

    std::set<std::string> qids;
    for (const Run& r : norm)
        for (const auto& [qid, list] : r.lists)
            if (!list.empty()) qids.insert(qid);

    Run out;
    out.tag = spec.output_tag;
    for (const auto& qid : qids) {
        std::map<std::string, double> weighted_sum;
        std::map<std::string, double> present_weight;
        for (std::size_t i = 0; i < norm.size(); ++i) {
            auto it = norm[i].lists.find(qid);
            if (it == norm[i].lists.end()) continue;
            for (const auto& rec : it->second) {
                weighted_sum[rec.doc_id] += weights[i] * rec.score;
                present_weight[rec.doc_id] += weights[i];
            }
        }
        auto& olist = out.lists[qid];
        olist.reserve(weighted_sum.size());
        for (const auto& [doc, sum] : weighted_sum) {
            double denom =
                spec.missing == FusionSpec::Missing::zero ? weight_sum : present_weight[doc];
            olist.push_back({doc, sum / denom, 0});
        }
    }
    canonicalize(out);
    return out;
}

Run apply_rerank_scores(const Run& candidate, const RerankScores& rr) {
    if (rr.depth == 0) throw DomainError("rerank depth must be at least 1");

    // Every scored document must exist in the candidate list of its query.
    for (const auto& [qid, docs] : rr.scores) {
        auto it = candidate.lists.find(qid);
        if (it == candidate.lists.end())
            throw DomainError("rerank scores name query '" + qid + "' absent from the candidate run");
        std::unordered_set<std::string> in_candidate;
        in_candidate.reserve(it->second.size());
        for (const auto& rec : it->second) in_candidate.insert(rec.doc_id);
        for (const auto& [doc, score] : docs) {
            (void)score;
            if (!in_candidate.count(doc))
                throw DomainError("rerank score for query '" + qid + "' names document '" + doc +
                                  "' absent from the candidate list");
        }
    }

    Run out;
    out.tag = candidate.tag;
    for (const auto& [qid, list] : candidate.lists) {
        const std::map<std::string, double>* qscores = nullptr;
        if (auto it = rr.scores.find(qid); it != rr.scores.end()) qscores = &it->second;

        std::size_t depth = std::min(rr.depth, list.size());
        std::vector<std::pair<double, const RunRecord*>> scored;
        std::vector<const RunRecord*> unscored;
        for (std::size_t i = 0; i < depth; ++i) {
            const RunRecord& rec = list[i];
            const double* s = nullptr;
            if (qscores) {
                auto sit = qscores->find(rec.doc_id);
                if (sit != qscores->end()) s = &sit->second;
            }
            if (s)
                scored.emplace_back(*s, &rec);
            else
                unscored.push_back(&rec);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second->doc_id > b.second->doc_id;
        });

        std::vector<const RunRecord*> order;
        order.reserve(list.size());
        for (const auto& [s, rec] : scored) {
            (void)s;
            order.push_back(rec);
        }
        order.insert(order.end(), unscored.begin(), unscored.end());
        for (std::size_t i = depth; i < list.size(); ++i) order.push_back(&list[i]);

        auto& olist = out.lists[qid];
        olist.reserve(order.size());
        auto n = static_cast<double>(order.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            olist.push_back({order[i]->doc_id, n - static_cast<double>(i),
                             static_cast<int>(i) + 1});
    }
    return out;
}

}  // namespace clirforge
