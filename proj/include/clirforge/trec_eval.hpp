#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clirforge/types.hpp"

namespace clirforge {

enum class MetricKind { ndcg, map, recall };

struct MetricSpec {
    MetricKind kind = MetricKind::ndcg;
    std::size_t cutoff = 1000;

    std::string name() const;          // "ndcg@20"; used as TSV key
    std::string display_name() const;  // "nDCG@20", "mAP@1k", "Recall@1k"
};

/// Parses "ndcg@20" / "map@1000" / "recall@1000".
MetricSpec parse_metric_spec(const std::string& text);

/// ndcg@20, map@1000, recall@1000.
std::vector<MetricSpec> default_metrics();

struct MetricReport {
    std::vector<MetricSpec> specs;
    std::map<std::string, std::map<std::string, double>> per_query;  // qid -> metric -> value
    std::map<std::string, double> means;
    std::size_t evaluated_queries = 0;
    std::size_t skipped_queries = 0;  // run queries without a relevant judgment
};

struct FilterReport {
    std::size_t kept_judgments = 0;
    std::size_t dropped_judgments = 0;
    std::size_t kept_queries = 0;
    std::size_t dropped_queries = 0;
};

// Metrics over one ranked list. Unjudged documents count as grade 0;
// map/recall binarize relevance at grade >= 1. nDCG uses linear gain with
// a log2(rank + 1) discount and an ideal list built from all judged grades.
double ndcg_at_k(const std::vector<RunRecord>& ranked, const std::map<std::string, int>& qrels_q,
                 std::size_t k);
double ap_at_k(const std::vector<RunRecord>& ranked, const std::map<std::string, int>& qrels_q,
               std::size_t k = 1000);
double recall_at_k(const std::vector<RunRecord>& ranked, const std::map<std::string, int>& qrels_q,
                   std::size_t k = 1000);

/// Re-sorts the run canonically, then scores every run query that has at
/// least one relevant judgment. Queries absent from the qrels or with only
/// grade-0 judgments are skipped and counted; means are unweighted
/// averages over the evaluated queries.
MetricReport evaluate(const Run& run, const Qrels& qrels, const std::vector<MetricSpec>& specs);

/// nDCG and mAP cells print x100 with one decimal ("31.6"); recall prints
/// as a percentage ("91.4%").
std::string format_metric_value(MetricKind kind, double value);

/// Aligned table: one row per query when requested, then the mean row.
std::string format_report(const MetricReport& report, const std::string& tag,
                          bool per_query = false);

/// Machine-readable form: `qid metric value`, means keyed by qid "all".
void write_per_query_tsv(std::ostream& out, const MetricReport& report);

/// Restrict judgments to documents present in the collection; queries left
/// without any relevant judgment are dropped entirely. A non-empty
/// `queries` set additionally restricts which queries are kept.
std::pair<Qrels, FilterReport> filter_devset(const Qrels& qrels,
                                             const std::set<std::string>& collection_ids,
                                             const std::set<std::string>& queries = {});

/// Companion collection filter: keep only vectors whose id is listed.
SparseVectorSet filter_collection(const SparseVectorSet& docs,
                                  const std::set<std::string>& collection_ids);

}  // namespace clirforge
