// Command-line front end: one subcommand per pipeline operation plus the
// declarative `pipeline run/validate` driver.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "clirforge/corpus_io.hpp"
#include "clirforge/fusion.hpp"
#include "clirforge/late_interaction.hpp"
#include "clirforge/pipeline.hpp"
#include "clirforge/sparse_engine.hpp"
#include "clirforge/trec_eval.hpp"

using namespace clirforge;

namespace {

std::vector<MetricSpec> parse_metric_list(const std::vector<std::string>& names) {
    if (names.empty()) return default_metrics();
    std::vector<MetricSpec> specs;
    for (const auto& name : names) specs.push_back(parse_metric_spec(name));
    return specs;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clirforge: sparse/late-interaction retrieval, fusion and TREC evaluation"};
    app.require_subcommand(1);

    // index
    std::string idx_vectors, idx_out;
    auto* index_cmd = app.add_subcommand("index", "Build an impact index from sparse vectors");
    index_cmd->add_option("--vectors", idx_vectors, "sparse-vector file")->required();
    index_cmd->add_option("-o,--output", idx_out, "index file to write")->required();
    index_cmd->callback([&] {
        auto vectors = read_sparse_vectors_file(idx_vectors);
        auto index = ImpactIndex::build(vectors);
        write_index_file(idx_out, index);
        std::cerr << "indexed " << index.doc_count() << " documents, " << index.term_count()
                  << " terms\n";
    });

    // retrieve
    std::string ret_index, ret_vectors, ret_queries, ret_tag = "clirforge", ret_out;
    std::size_t ret_topk = 1000;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "Exact top-k dot-product retrieval");
    auto* ret_idx_opt = retrieve_cmd->add_option("--index", ret_index, "prebuilt impact index");
    retrieve_cmd->add_option("--vectors", ret_vectors, "document sparse-vector file")
        ->excludes(ret_idx_opt);
    retrieve_cmd->add_option("--queries", ret_queries, "query sparse-vector file")->required();
    retrieve_cmd->add_option("--topk", ret_topk, "results per query")->check(CLI::PositiveNumber);
    retrieve_cmd->add_option("--tag", ret_tag, "run tag");
    retrieve_cmd->add_option("-o,--output", ret_out, "run file to write")->required();
    retrieve_cmd->callback([&] {
        if (ret_index.empty() && ret_vectors.empty())
            throw Error("retrieve needs --index or --vectors");
        ImpactIndex index = !ret_index.empty()
                                ? read_index_file(ret_index)
                                : ImpactIndex::build(read_sparse_vectors_file(ret_vectors));
        auto queries = read_sparse_vectors_file(ret_queries);
        Run run = batch_retrieve(index, queries, ret_topk, ret_tag);
        write_run_file(ret_out, run);
    });

    // bm25-weigh
    std::string bm_corpus, bm_queries, bm_side = "docs", bm_out;
    Bm25Params bm_params;
    auto* bm25_cmd = app.add_subcommand("bm25-weigh", "Turn token counts into BM25 sparse vectors");
    bm25_cmd->add_option("--corpus", bm_corpus, "document token-count file")->required();
    bm25_cmd->add_option("--side", bm_side, "docs | queries")
        ->check(CLI::IsMember({"docs", "queries"}));
    bm25_cmd->add_option("--queries", bm_queries, "query token-count file (side=queries)");
    bm25_cmd->add_option("--k1", bm_params.k1, "BM25 k1")->check(CLI::PositiveNumber);
    bm25_cmd->add_option("--b", bm_params.b, "BM25 b")->check(CLI::Range(0.0, 1.0));
    bm25_cmd->add_option("-o,--output", bm_out, "sparse-vector file to write")->required();
    bm25_cmd->callback([&] {
        auto corpus = read_sparse_vectors_file(bm_corpus);
        SparseVectorSet weighted;
        if (bm_side == "docs") {
            weighted = bm25_weigh_corpus(corpus, bm_params);
        } else {
            if (bm_queries.empty()) throw Error("--side queries needs --queries");
            auto stats = bm25_corpus_stats(corpus);
            auto query_tokens = read_sparse_vectors_file(bm_queries);
            for (const auto& [qid, tf] : query_tokens.vectors) {
                SparseVector vec = bm25_weigh_query(tf, stats);
                for (const auto& [term, w] : vec) {
                    (void)w;
                    weighted.vocabulary.insert(term);
                }
                weighted.vectors.emplace(qid, std::move(vec));
            }
        }
        write_sparse_vectors_file(bm_out, weighted);
    });

    // prf-retrieve
    std::string prf_vectors, prf_queries, prf_tag = "clirforge-prf", prf_out;
    std::size_t prf_topk = 1000;
    RocchioParams prf_params;
    auto* prf_cmd = app.add_subcommand("prf-retrieve", "Two-pass retrieval with Rocchio expansion");
    prf_cmd->add_option("--vectors", prf_vectors, "document sparse-vector file")->required();
    prf_cmd->add_option("--queries", prf_queries, "query sparse-vector file")->required();
    prf_cmd->add_option("--topk", prf_topk, "results per query")->check(CLI::PositiveNumber);
    prf_cmd->add_option("--prf-alpha", prf_params.alpha, "query coefficient")
        ->check(CLI::NonNegativeNumber);
    prf_cmd->add_option("--prf-beta", prf_params.beta, "feedback centroid coefficient")
        ->check(CLI::NonNegativeNumber);
    prf_cmd->add_option("--prf-docs", prf_params.fb_docs, "feedback depth")
        ->check(CLI::PositiveNumber);
    prf_cmd->add_option("--prf-term-cap", prf_params.term_cap,
                        "keep this many expanded terms (0 = unlimited)");
    prf_cmd->add_option("--tag", prf_tag, "run tag");
    prf_cmd->add_option("-o,--output", prf_out, "run file to write")->required();
    prf_cmd->callback([&] {
        auto vectors = read_sparse_vectors_file(prf_vectors);
        auto index = ImpactIndex::build(vectors);
        auto queries = read_sparse_vectors_file(prf_queries);
        Run run = batch_retrieve_prf(index, vectors, queries, prf_topk, prf_params, prf_tag);
        write_run_file(prf_out, run);
    });

    // late-retrieve
    std::string late_docs, late_queries, late_tag = "clirforge-li", late_out;
    std::size_t late_topk = 1000;
    auto* late_cmd = app.add_subcommand("late-retrieve", "Exhaustive MaxSim retrieval");
    late_cmd->add_option("--embeddings", late_docs, "document embedding container")->required();
    late_cmd->add_option("--queries", late_queries, "query embedding container")->required();
    late_cmd->add_option("--topk", late_topk, "results per query")->check(CLI::PositiveNumber);
    late_cmd->add_option("--tag", late_tag, "run tag");
    late_cmd->add_option("-o,--output", late_out, "run file to write")->required();
    late_cmd->callback([&] {
        auto docs = read_embedding_file(late_docs);
        auto queries = read_embedding_file(late_queries);
        Run run = batch_late_retrieve(docs, queries, late_topk, late_tag);
        write_run_file(late_out, run);
    });

    // fuse
    std::vector<std::string> fuse_members;
    std::vector<double> fuse_weights;
    std::string fuse_missing = "zero", fuse_tag = "fused", fuse_out;
    auto* fuse_cmd = app.add_subcommand("fuse", "Min-max normalized average of runs");
    fuse_cmd->add_option("--members", fuse_members, "member run files (comma separated)")
        ->required()
        ->delimiter(',');
    fuse_cmd->add_option("--weights", fuse_weights, "member weights (comma separated)")
        ->delimiter(',');
    fuse_cmd->add_option("--missing", fuse_missing, "score for docs missing from a member")
        ->check(CLI::IsMember({"zero", "renorm"}));
    fuse_cmd->add_option("--tag", fuse_tag, "output run tag");
    fuse_cmd->add_option("-o,--output", fuse_out, "run file to write")->required();
    fuse_cmd->callback([&] {
        std::vector<Run> members;
        FusionSpec spec;
        for (const auto& path : fuse_members) {
            members.push_back(read_run_file(path));
            spec.member_tags.push_back(members.back().tag);
        }
        spec.weights = fuse_weights;
        spec.output_tag = fuse_tag;
        spec.missing =
            fuse_missing == "renorm" ? FusionSpec::Missing::renorm : FusionSpec::Missing::zero;
        write_run_file(fuse_out, fuse(members, spec));
    });

    // rerank-merge
    std::string rr_candidate, rr_scores, rr_tag, rr_out;
    std::size_t rr_depth = 1000;
    auto* rr_cmd = app.add_subcommand("rerank-merge",
                                      "Reorder a candidate run by external reranker scores");
    rr_cmd->add_option("--candidate", rr_candidate, "candidate run file")->required();
    rr_cmd->add_option("--scores", rr_scores, "reranker score file (qid docid score)")->required();
    rr_cmd->add_option("--depth", rr_depth, "rerank depth")->check(CLI::PositiveNumber);
    rr_cmd->add_option("--tag", rr_tag, "output run tag (default: candidate tag)");
    rr_cmd->add_option("-o,--output", rr_out, "run file to write")->required();
    rr_cmd->callback([&] {
        Run candidate = read_run_file(rr_candidate);
        RerankScores rr = read_rerank_scores_file(rr_scores);
        rr.depth = rr_depth;
        Run merged = apply_rerank_scores(candidate, rr);
        if (!rr_tag.empty()) merged.tag = rr_tag;
        write_run_file(rr_out, merged);
    });

    // eval
    std::string eval_run, eval_qrels, eval_tsv;
    std::vector<std::string> eval_metrics;
    bool eval_per_query = false;
    auto* eval_cmd = app.add_subcommand("eval", "Score a run against qrels");
    eval_cmd->add_option("--run", eval_run, "run file")->required();
    eval_cmd->add_option("--qrels", eval_qrels, "qrels file")->required();
    eval_cmd->add_option("--metrics", eval_metrics, "e.g. ndcg@20,map@1000,recall@1000")
        ->delimiter(',');
    eval_cmd->add_flag("--per-query", eval_per_query, "print one row per query");
    eval_cmd->add_option("--tsv", eval_tsv, "also write per-query TSV here");
    eval_cmd->callback([&] {
        Run run = read_run_file(eval_run);
        Qrels qrels = read_qrels_file(eval_qrels);
        auto report = evaluate(run, qrels, parse_metric_list(eval_metrics));
        std::cout << format_report(report, run.tag, eval_per_query);
        if (!eval_tsv.empty()) {
            std::ofstream f(eval_tsv, std::ios::binary | std::ios::trunc);
            if (!f) throw Error("cannot create " + eval_tsv);
            write_per_query_tsv(f, report);
        }
    });

    // filter-dev
    std::string fd_qrels, fd_ids, fd_out, fd_vectors, fd_vectors_out;
    auto* fd_cmd = app.add_subcommand("filter-dev",
                                      "Restrict qrels (and optionally vectors) to a collection");
    fd_cmd->add_option("--qrels", fd_qrels, "qrels file")->required();
    fd_cmd->add_option("--collection-ids", fd_ids, "doc-id list file")->required();
    fd_cmd->add_option("-o,--output", fd_out, "filtered qrels file to write")->required();
    auto* fd_vec_opt = fd_cmd->add_option("--vectors", fd_vectors, "also filter this vector file");
    fd_cmd->add_option("--vectors-out", fd_vectors_out, "filtered vector file to write")
        ->needs(fd_vec_opt);
    fd_cmd->callback([&] {
        Qrels qrels = read_qrels_file(fd_qrels);
        auto ids = read_id_list_file(fd_ids);
        auto [filtered, report] = filter_devset(qrels, ids);
        write_qrels_file(fd_out, filtered);
        std::cout << "kept " << report.kept_judgments << " judgments over " << report.kept_queries
                  << " queries; dropped " << report.dropped_judgments << " judgments, "
                  << report.dropped_queries << " queries\n";
        if (!fd_vectors.empty()) {
            if (fd_vectors_out.empty()) throw Error("--vectors needs --vectors-out");
            auto kept = filter_collection(read_sparse_vectors_file(fd_vectors), ids);
            write_sparse_vectors_file(fd_vectors_out, kept);
        }
    });

    // pipeline run | validate
    auto* pipe_cmd = app.add_subcommand("pipeline", "Declarative multi-stage execution");
    pipe_cmd->require_subcommand(1);
    std::string pr_config, pr_output_dir;
    auto* pipe_run = pipe_cmd->add_subcommand("run", "Execute a pipeline config");
    pipe_run->add_option("config", pr_config, "pipeline config JSON")->required();
    pipe_run->add_option("--output-dir", pr_output_dir, "override the config's output_dir");
    pipe_run->callback([&] {
        auto cfg = load_pipeline_config(pr_config);
        // the override is caller-relative, unlike config paths
        if (!pr_output_dir.empty()) cfg.output_dir = std::filesystem::absolute(pr_output_dir);
        auto outputs = run_pipeline(cfg);
        std::cerr << outputs.size() << " artifacts written\n";
    });
    std::string pv_config;
    auto* pipe_validate = pipe_cmd->add_subcommand("validate", "Check a pipeline config");
    pipe_validate->add_option("config", pv_config, "pipeline config JSON")->required();
    pipe_validate->callback([&] {
        auto diags = validate_config(load_pipeline_config(pv_config));
        for (const auto& d : diags)
            std::cout << (d.stage.empty() ? std::string("config") : d.stage) << ": " << d.message
                      << '\n';
        if (!diags.empty()) throw CLI::RuntimeError(1);
        std::cout << "ok\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
