#include "clirforge/late_interaction.hpp"

#include <queue>
#include <string>

#include "batch_util.hpp"
#include "parallel.hpp"

namespace clirforge {

namespace {

struct HeapEntry {
    double score = 0.0;
    std::size_t doc = 0;
};

struct RanksAhead {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.score != b.score) return a.score > b.score;
        return a.doc < b.doc;
    }
};

}  // namespace

double maxsim_score(const TokenMatrix& query, const TokenMatrix& doc) {
    if (query.dim != doc.dim)
        throw ShapeError("dimension mismatch: query dim " + std::to_string(query.dim) +
                         ", document dim " + std::to_string(doc.dim));
    if (query.rows() == 0 || doc.rows() == 0) throw DomainError("empty token matrix");

    double total = 0.0;
    for (std::size_t i = 0; i < query.rows(); ++i) {
        const float* q = query.row(i);
        double best = 0.0;
        for (std::size_t j = 0; j < doc.rows(); ++j) {
            const float* d = doc.row(j);
            double dot = 0.0;
            for (std::size_t e = 0; e < query.dim; ++e)
                dot += static_cast<double>(q[e]) * static_cast<double>(d[e]);
            if (j == 0 || dot > best) best = dot;
        }
        total += best;
    }
    return total;
}

std::vector<ScoredDoc> late_retrieve(const EmbeddingSet& set, const TokenMatrix& query,
                                     std::size_t k) {
    if (set.matrices.empty() || k == 0) return {};
    if (query.dim != set.dim)
        throw ShapeError("dimension mismatch: query dim " + std::to_string(query.dim) +
                         ", set dim " + std::to_string(set.dim));

    // Doc ids are visited in ascending order, so the internal index works
    // as the tie breaker.
    std::vector<const std::string*> ids;
    ids.reserve(set.matrices.size());
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, RanksAhead> heap;
    for (const auto& [id, matrix] : set.matrices) {
        HeapEntry e{maxsim_score(query, matrix), ids.size()};
        ids.push_back(&id);
        if (heap.size() < k) {
            heap.push(e);
        } else if (RanksAhead{}(e, heap.top())) {
            heap.pop();
            heap.push(e);
        }
    }

    std::vector<ScoredDoc> out(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
        out[i] = {*ids[heap.top().doc], heap.top().score};
        heap.pop();
    }
    return out;
}

Run batch_late_retrieve(const EmbeddingSet& docs, const EmbeddingSet& queries, std::size_t k,
                        const std::string& tag) {
    std::vector<std::string> qids;
    std::vector<const TokenMatrix*> matrices;
    qids.reserve(queries.matrices.size());
    for (const auto& [qid, m] : queries.matrices) {
        qids.push_back(qid);
        matrices.push_back(&m);
    }
    std::vector<std::vector<ScoredDoc>> results(qids.size());
    parallel_for(qids.size(), [&](std::size_t i) { results[i] = late_retrieve(docs, *matrices[i], k); });
    return assemble_run(tag, qids, results);
}

}  // namespace clirforge
