// Generates the small synthetic corpus behind the bundled example
// pipelines: token counts, learned-sparse vectors, token embeddings,
// reranker scores, qrels and a collection-id list. Fully deterministic for
// a given seed. Every document and query carries one shared background
// term so first-stage candidate lists cover the whole corpus, which keeps
// the all-pairs reranker score files consistent with any candidate run.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"

#include "clirforge/corpus_io.hpp"
#include "clirforge/types.hpp"

using namespace clirforge;
namespace fs = std::filesystem;

namespace {

constexpr const char* kBackgroundTerm = "the";

std::string doc_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "doc%04zu", i + 1);
    return buf;
}

std::string query_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "q%02zu", i + 1);
    return buf;
}

std::string term(std::size_t i) { return "w" + std::to_string(i); }

struct Synth {
    std::mt19937 rng;
    std::size_t docs;
    std::size_t queries;
    std::size_t vocab;
    fs::path dir;

    SparseVector sparse_record(std::size_t min_terms, std::size_t max_terms, double max_weight) {
        std::uniform_int_distribution<std::size_t> n_terms(min_terms, max_terms);
        std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);
        std::uniform_real_distribution<double> weight(0.05, max_weight);
        SparseVector vec;
        std::size_t wanted = n_terms(rng);
        while (vec.size() < wanted) vec[term(pick(rng))] = weight(rng);
        vec[kBackgroundTerm] = weight(rng) * 0.05;
        return vec;
    }

    SparseVector token_record(std::size_t min_terms, std::size_t max_terms) {
        std::uniform_int_distribution<std::size_t> n_terms(min_terms, max_terms);
        std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);
        std::uniform_int_distribution<int> tf(1, 6);
        SparseVector vec;
        std::size_t wanted = n_terms(rng);
        while (vec.size() < wanted) vec[term(pick(rng))] = tf(rng);
        vec[kBackgroundTerm] = 1.0;
        return vec;
    }

    void vectors_file(const std::string& name, std::size_t records, bool doc_side,
                      bool token_counts) {
        SparseVectorSet set;
        for (std::size_t i = 0; i < records; ++i) {
            SparseVector vec = token_counts
                                   ? token_record(doc_side ? 8 : 3, doc_side ? 25 : 6)
                                   : sparse_record(doc_side ? 10 : 4, doc_side ? 30 : 8, 6.0);
            for (const auto& [t, w] : vec) {
                (void)w;
                set.vocabulary.insert(t);
            }
            set.vectors.emplace(doc_side ? doc_id(i) : query_id(i), std::move(vec));
        }
        write_sparse_vectors_file((dir / name).string(), set);
    }

    void embeddings_file(const std::string& name, std::size_t records, bool doc_side,
                         std::uint32_t dim) {
        std::uniform_int_distribution<std::size_t> n_tokens(doc_side ? 3 : 2, doc_side ? 6 : 4);
        std::uniform_real_distribution<float> entry(-1.0f, 1.0f);
        EmbeddingSet set;
        set.dim = dim;
        for (std::size_t i = 0; i < records; ++i) {
            TokenMatrix m;
            m.dim = dim;
            m.data.resize(n_tokens(rng) * dim);
            for (auto& v : m.data) v = entry(rng);
            set.matrices.emplace(doc_side ? doc_id(i) : query_id(i), std::move(m));
        }
        write_embedding_file((dir / name).string(), set);
    }

    void rerank_file(const std::string& name) {
        std::normal_distribution<double> score(0.0, 4.0);
        std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot create " + (dir / name).string());
        for (std::size_t q = 0; q < queries; ++q)
            for (std::size_t d = 0; d < docs; ++d)
                f << query_id(q) << ' ' << doc_id(d) << ' ' << format_score(score(rng)) << '\n';
    }

    void qrels_file(const std::string& name) {
        std::uniform_int_distribution<std::size_t> n_judged(6, docs / 2);
        std::uniform_int_distribution<std::size_t> pick(0, docs - 1);
        std::uniform_int_distribution<int> grade(0, 3);
        Qrels qrels;
        for (std::size_t q = 0; q < queries; ++q) {
            auto& judged = qrels.judgments[query_id(q)];
            std::size_t wanted = n_judged(rng);
            while (judged.size() < wanted) judged[doc_id(pick(rng))] = grade(rng);
            if (q + 1 == queries) {
                // keep one query with only non-relevant judgments so the
                // dev-set filter and the evaluator's skip path get exercised
                for (auto& [d, g] : judged) g = 0;
            } else {
                judged.begin()->second = std::max(judged.begin()->second, 1);
            }
        }
        write_qrels_file((dir / name).string(), qrels);
    }

    void id_list_file(const std::string& name, double keep_fraction) {
        std::bernoulli_distribution keep(keep_fraction);
        std::set<std::string> ids;
        for (std::size_t d = 0; d < docs; ++d)
            if (d == 0 || keep(rng)) ids.insert(doc_id(d));
        write_id_list_file((dir / name).string(), ids);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clirforge-synth: deterministic demo corpus generator"};
    std::string out_dir;
    unsigned seed = 22;
    std::size_t docs = 40, queries = 8;
    app.add_option("dir", out_dir, "output directory")->required();
    app.add_option("--seed", seed, "random seed");
    app.add_option("--docs", docs, "document count")->check(CLI::PositiveNumber);
    app.add_option("--queries", queries, "query count")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(out_dir);
        Synth synth{std::mt19937(seed), docs, queries, 160, fs::path(out_dir)};

        synth.vectors_file("docs.tok", docs, true, true);
        synth.vectors_file("queries_ht.tok", queries, false, true);
        synth.vectors_file("docs_dt.tok", docs, true, true);
        synth.vectors_file("queries_en.tok", queries, false, true);

        synth.vectors_file("splade_mono.docs.vec", docs, true, false);
        synth.vectors_file("splade_ht.queries.vec", queries, false, false);
        synth.vectors_file("splade_mt.queries.vec", queries, false, false);
        synth.vectors_file("splade_dt.docs.vec", docs, true, false);
        synth.vectors_file("splade_en.queries.vec", queries, false, false);

        synth.embeddings_file("colbert_mono.docs.ncem", docs, true, 16);
        synth.embeddings_file("colbert_ht.queries.ncem", queries, false, 16);
        synth.embeddings_file("colbert_mt.queries.ncem", queries, false, 16);

        synth.rerank_file("rr_infoxlm.tsv");
        synth.rerank_file("rr_xlmr.tsv");
        synth.rerank_file("rr_t5_dt.tsv");
        synth.rerank_file("rr_t5_fuse.tsv");

        synth.qrels_file("qrels.txt");
        synth.id_list_file("collection_ids.txt", 0.8);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cerr << "wrote synthetic corpus (" << docs << " docs, " << queries << " queries) to "
              << out_dir << '\n';
    return 0;
}
