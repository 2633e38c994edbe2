#include "clirforge/sparse_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>

#include "batch_util.hpp"
#include "parallel.hpp"

namespace clirforge {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    write_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
    write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw ParseError("truncated index file");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t lo = read_u32(in);
    std::uint64_t hi = read_u32(in);
    return lo | hi << 32;
}

double read_f64(std::istream& in) {
    std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string read_str(std::istream& in) {
    std::uint32_t len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (in.gcount() != static_cast<std::streamsize>(len)) throw ParseError("truncated index file");
    return s;
}

struct HeapEntry {
    double score = 0.0;
    std::uint32_t doc = 0;
};

// "a ranks ahead of b": higher score first, then smaller doc id. Used as
// the priority_queue comparator so the top element is the current worst.
struct RanksAhead {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.score != b.score) return a.score > b.score;
        return a.doc < b.doc;
    }
};

}  // namespace

ImpactIndex ImpactIndex::build(const SparseVectorSet& vectors) {
    ImpactIndex idx;
    idx.doc_ids_.reserve(vectors.vectors.size());
    for (const auto& [id, vec] : vectors.vectors) {
        (void)vec;
        idx.doc_ids_.push_back(id);  // map iteration: ascending
    }
    idx.terms_.assign(vectors.vocabulary.begin(), vectors.vocabulary.end());
    idx.term_lookup_.reserve(idx.terms_.size());
    for (std::uint32_t t = 0; t < idx.terms_.size(); ++t) idx.term_lookup_.emplace(idx.terms_[t], t);
    idx.postings_.resize(idx.terms_.size());

    std::uint32_t doc = 0;
    for (const auto& [id, vec] : vectors.vectors) {
        for (const auto& [term, w] : vec) {
            if (!std::isfinite(w) || w < 0.0)
                throw DomainError("invalid weight for term '" + term + "' in document '" + id + "'");
            if (w == 0.0) continue;
            auto it = idx.term_lookup_.find(term);
            if (it == idx.term_lookup_.end())
                throw DomainError("term '" + term + "' missing from vocabulary");
            idx.postings_[it->second].push_back({doc, w});
        }
        ++doc;
    }
    return idx;
}

const std::vector<ImpactIndex::Posting>* ImpactIndex::postings(const std::string& term) const {
    auto it = term_lookup_.find(term);
    return it == term_lookup_.end() ? nullptr : &postings_[it->second];
}

SparseVector ImpactIndex::reconstruct(const std::string& doc_id) const {
    auto it = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), doc_id);
    if (it == doc_ids_.end() || *it != doc_id) throw DomainError("unknown document '" + doc_id + "'");
    auto doc = static_cast<std::uint32_t>(it - doc_ids_.begin());
    SparseVector vec;
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const auto& list = postings_[t];
        auto pit = std::lower_bound(list.begin(), list.end(), doc,
                                    [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        if (pit != list.end() && pit->doc == doc) vec.emplace(terms_[t], pit->weight);
    }
    return vec;
}

std::vector<ScoredDoc> ImpactIndex::retrieve_topk(const SparseVector& query, std::size_t k) const {
    std::vector<ScoredDoc> out;
    if (k == 0 || doc_count() == 0 || query.empty()) return out;

    std::vector<double> acc(doc_count(), 0.0);
    std::vector<char> seen(doc_count(), 0);
    std::vector<std::uint32_t> touched;
    for (const auto& [term, qw] : query) {  // map iteration: ascending term order
        auto it = term_lookup_.find(term);
        if (it == term_lookup_.end()) continue;
        for (const Posting& p : postings_[it->second]) {
            if (!seen[p.doc]) {
                seen[p.doc] = 1;
                touched.push_back(p.doc);
            }
            acc[p.doc] += qw * p.weight;
        }
    }

    std::priority_queue<HeapEntry, std::vector<HeapEntry>, RanksAhead> heap;
    for (std::uint32_t d : touched) {
        if (!(acc[d] > 0.0)) continue;
        HeapEntry e{acc[d], d};
        if (heap.size() < k) {
            heap.push(e);
        } else if (RanksAhead{}(e, heap.top())) {
            heap.pop();
            heap.push(e);
        }
    }

    out.resize(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
        const HeapEntry& e = heap.top();
        out[i] = {doc_ids_[e.doc], e.score};
        heap.pop();
    }
    return out;
}

void ImpactIndex::save(std::ostream& out) const {
    out.write("NCII", 4);
    write_u32(out, 1);  // version
    write_u64(out, doc_ids_.size());
    for (const auto& id : doc_ids_) write_str(out, id);
    write_u64(out, terms_.size());
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        write_str(out, terms_[t]);
        write_u64(out, postings_[t].size());
        for (const Posting& p : postings_[t]) {
            write_u32(out, p.doc);
            write_f64(out, p.weight);
        }
    }
}

ImpactIndex ImpactIndex::load(std::istream& in) {
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "NCII", 4) != 0)
        throw ParseError("not an impact index file");
    if (read_u32(in) != 1) throw ParseError("unsupported index version");
    ImpactIndex idx;
    auto docs = read_u64(in);
    idx.doc_ids_.reserve(docs);
    for (std::uint64_t i = 0; i < docs; ++i) {
        idx.doc_ids_.push_back(read_str(in));
        if (i > 0 && !(idx.doc_ids_[i - 1] < idx.doc_ids_[i]))
            throw ParseError("document ids out of order");
    }
    auto terms = read_u64(in);
    idx.terms_.reserve(terms);
    idx.postings_.resize(terms);
    for (std::uint64_t t = 0; t < terms; ++t) {
        idx.terms_.push_back(read_str(in));
        idx.term_lookup_.emplace(idx.terms_.back(), static_cast<std::uint32_t>(t));
        auto count = read_u64(in);
        auto& list = idx.postings_[t];
        list.reserve(count);
        for (std::uint64_t p = 0; p < count; ++p) {
            std::uint32_t doc = read_u32(in);
            double w = read_f64(in);
            if (doc >= docs) throw ParseError("posting references unknown document");
            if (!std::isfinite(w) || w <= 0.0) throw ParseError("invalid posting weight");
            if (!list.empty() && list.back().doc >= doc)
                throw ParseError("posting list out of order");
            list.push_back({doc, w});
        }
    }
    return idx;
}

ImpactIndex read_index_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    try {
        return ImpactIndex::load(f);
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

void write_index_file(const std::string& path, const ImpactIndex& index) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot create " + path);
    index.save(f);
    f.flush();
    if (!f) throw Error("write failed for " + path);
}

Bm25Stats bm25_corpus_stats(const SparseVectorSet& token_counts) {
    if (token_counts.vectors.empty())
        throw DomainError("empty corpus: average document length is undefined");
    Bm25Stats stats;
    stats.doc_count = token_counts.vectors.size();
    double total_len = 0.0;
    for (const auto& [doc, counts] : token_counts.vectors) {
        double dl = 0.0;
        for (const auto& [term, tf] : counts) {
            if (!(tf >= 1.0))
                throw DomainError("term frequency below 1 for term '" + term + "' in document '" +
                                  doc + "'");
            dl += tf;
            stats.doc_freq[term] += 1;
        }
        total_len += dl;
    }
    stats.avg_doc_len = total_len / static_cast<double>(stats.doc_count);
    return stats;
}

double bm25_idf(const Bm25Stats& stats, const std::string& term) {
    auto it = stats.doc_freq.find(term);
    double df = it == stats.doc_freq.end() ? 0.0 : static_cast<double>(it->second);
    double n = static_cast<double>(stats.doc_count);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

SparseVectorSet bm25_weigh_corpus(const SparseVectorSet& token_counts, const Bm25Params& params) {
    if (!(params.k1 > 0.0)) throw DomainError("k1 must be positive");
    if (!(params.b >= 0.0 && params.b <= 1.0)) throw DomainError("b must be in [0, 1]");
    Bm25Stats stats = bm25_corpus_stats(token_counts);
    SparseVectorSet out;
    for (const auto& [doc, counts] : token_counts.vectors) {
        double dl = 0.0;
        for (const auto& [term, tf] : counts) {
            (void)term;
            dl += tf;
        }
        double norm = params.k1 * (1.0 - params.b + params.b * dl / stats.avg_doc_len);
        SparseVector vec;
        for (const auto& [term, tf] : counts) {
            double w = tf * (params.k1 + 1.0) / (tf + norm);
            vec.emplace(term, w);
            out.vocabulary.insert(term);
        }
        out.vectors.emplace(doc, std::move(vec));
    }
    return out;
}

SparseVector bm25_weigh_query(const SparseVector& query_tf, const Bm25Stats& stats) {
    SparseVector vec;
    for (const auto& [term, tf] : query_tf) {
        (void)tf;
        double w = bm25_idf(stats, term);
        if (w > 0.0) vec.emplace(term, w);
    }
    return vec;
}

SparseVector rocchio_expand(const SparseVector& query, const std::vector<ScoredDoc>& first_pass,
                            const SparseVectorSet& vectors, const RocchioParams& params) {
    if (params.alpha < 0.0 || params.beta < 0.0 || !(params.alpha + params.beta > 0.0))
        throw DomainError("rocchio coefficients must be non-negative and not both zero");
    if (params.fb_docs == 0) throw DomainError("fb_docs must be at least 1");
    if (first_pass.empty()) throw DomainError("empty first-pass ranking");

    SparseVector out;
    if (params.alpha > 0.0)
        for (const auto& [term, w] : query) out[term] = params.alpha * w;

    if (params.beta > 0.0) {
        std::size_t m = std::min(params.fb_docs, first_pass.size());
        SparseVector centroid;
        for (std::size_t i = 0; i < m; ++i) {
            auto it = vectors.vectors.find(first_pass[i].doc_id);
            if (it == vectors.vectors.end())
                throw DomainError("feedback document '" + first_pass[i].doc_id +
                                  "' missing from vector set");
            for (const auto& [term, w] : it->second) centroid[term] += w;
        }
        double scale = params.beta / static_cast<double>(m);
        for (const auto& [term, w] : centroid) out[term] += scale * w;
    }

    std::erase_if(out, [](const auto& entry) { return entry.second == 0.0; });

    if (params.term_cap != 0 && out.size() > params.term_cap) {
        std::vector<std::pair<std::string, double>> terms(out.begin(), out.end());
        std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        terms.resize(params.term_cap);
        out = SparseVector(terms.begin(), terms.end());
    }
    return out;
}

std::vector<ScoredDoc> retrieve_with_prf(const ImpactIndex& index, const SparseVectorSet& vectors,
                                         const SparseVector& query, std::size_t k,
                                         const RocchioParams& params) {
    auto first_pass = index.retrieve_topk(query, k);
    if (first_pass.empty()) return first_pass;
    auto expanded = rocchio_expand(query, first_pass, vectors, params);
    return index.retrieve_topk(expanded, k);
}

namespace {

template <typename PerQuery>
Run batch_over(const SparseVectorSet& queries, const std::string& tag, PerQuery&& per_query) {
    std::vector<std::string> qids;
    std::vector<const SparseVector*> qvecs;
    qids.reserve(queries.vectors.size());
    for (const auto& [qid, vec] : queries.vectors) {
        qids.push_back(qid);
        qvecs.push_back(&vec);
    }
    std::vector<std::vector<ScoredDoc>> results(qids.size());
    parallel_for(qids.size(), [&](std::size_t i) { results[i] = per_query(*qvecs[i]); });
    return assemble_run(tag, qids, results);
}

}  // namespace

Run batch_retrieve(const ImpactIndex& index, const SparseVectorSet& queries, std::size_t k,
                   const std::string& tag) {
    return batch_over(queries, tag,
                      [&](const SparseVector& q) { return index.retrieve_topk(q, k); });
}

Run batch_retrieve_prf(const ImpactIndex& index, const SparseVectorSet& vectors,
                       const SparseVectorSet& queries, std::size_t k, const RocchioParams& params,
                       const std::string& tag) {
    return batch_over(queries, tag, [&](const SparseVector& q) {
        return retrieve_with_prf(index, vectors, q, k, params);
    });
}

}  // namespace clirforge
