#include "clirforge/trec_eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "clirforge/corpus_io.hpp"

namespace clirforge {

namespace {

const char* kind_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::ndcg: return "ndcg";
        case MetricKind::map: return "map";
        case MetricKind::recall: return "recall";
    }
    return "?";
}

std::string pretty_cutoff(std::size_t k) {
    if (k >= 1000 && k % 1000 == 0) return std::to_string(k / 1000) + "k";
    return std::to_string(k);
}

std::size_t relevant_count(const std::map<std::string, int>& qrels_q) {
    std::size_t r = 0;
    for (const auto& [doc, grade] : qrels_q) {
        (void)doc;
        if (grade >= 1) ++r;
    }
    return r;
}

int grade_of(const std::map<std::string, int>& qrels_q, const std::string& doc) {
    auto it = qrels_q.find(doc);
    return it == qrels_q.end() ? 0 : it->second;
}

}  // namespace

std::string MetricSpec::name() const {
    return std::string(kind_name(kind)) + "@" + std::to_string(cutoff);
}

std::string MetricSpec::display_name() const {
    switch (kind) {
        case MetricKind::ndcg: return "nDCG@" + pretty_cutoff(cutoff);
        case MetricKind::map: return "mAP@" + pretty_cutoff(cutoff);
        case MetricKind::recall: return "Recall@" + pretty_cutoff(cutoff);
    }
    return name();
}

MetricSpec parse_metric_spec(const std::string& text) {
    auto at = text.find('@');
    if (at == std::string::npos) throw DomainError("metric must look like `ndcg@20`, got '" + text + "'");
    std::string head = text.substr(0, at);
    MetricSpec spec;
    if (head == "ndcg")
        spec.kind = MetricKind::ndcg;
    else if (head == "map")
        spec.kind = MetricKind::map;
    else if (head == "recall")
        spec.kind = MetricKind::recall;
    else
        throw DomainError("unknown metric '" + head + "' (expected ndcg, map or recall)");
    const char* first = text.data() + at + 1;
    const char* last = text.data() + text.size();
    std::size_t cutoff = 0;
    auto [p, ec] = std::from_chars(first, last, cutoff);
    if (ec != std::errc() || p != last || cutoff == 0)
        throw DomainError("bad metric cutoff in '" + text + "'");
    spec.cutoff = cutoff;
    return spec;
}

std::vector<MetricSpec> default_metrics() {
    return {{MetricKind::ndcg, 20}, {MetricKind::map, 1000}, {MetricKind::recall, 1000}};
}

double ndcg_at_k(const std::vector<RunRecord>& ranked, const std::map<std::string, int>& qrels_q,
                 std::size_t k) {
    double dcg = 0.0;
    std::size_t depth = std::min(k, ranked.size());
    for (std::size_t i = 0; i < depth; ++i)
        dcg += static_cast<double>(grade_of(qrels_q, ranked[i].doc_id)) /
               std::log2(static_cast<double>(i) + 2.0);

    std::vector<int> grades;
    grades.reserve(qrels_q.size());
    for (const auto& [doc, grade] : qrels_q) {
        (void)doc;
        if (grade > 0) grades.push_back(grade);
    }
    std::sort(grades.begin(), grades.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i)
        idcg += static_cast<double>(grades[i]) / std::log2(static_cast<double>(i) + 2.0);

    return idcg > 0.0 ? dcg / idcg : 0.0;
}

double ap_at_k(const std::vector<RunRecord>& ranked, const std::map<std::string, int>& qrels_q,
               std::size_t k) {
    std::size_t total_relevant = relevant_count(qrels_q);
    if (total_relevant == 0) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    std::size_t depth = std::min(k, ranked.size());
    for (std::size_t i = 0; i < depth; ++i) {
        if (grade_of(qrels_q, ranked[i].doc_id) >= 1) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(total_relevant);
}

double recall_at_k(const std::vector<RunRecord>& ranked, const std::map<std::string, int>& qrels_q,
                   std::size_t k) {
    std::size_t total_relevant = relevant_count(qrels_q);
    if (total_relevant == 0) return 0.0;
    std::size_t hits = 0;
    std::size_t depth = std::min(k, ranked.size());
    for (std::size_t i = 0; i < depth; ++i)
        if (grade_of(qrels_q, ranked[i].doc_id) >= 1) ++hits;
    return static_cast<double>(hits) / static_cast<double>(total_relevant);
}

MetricReport evaluate(const Run& run, const Qrels& qrels, const std::vector<MetricSpec>& specs) {
    MetricReport report;
    report.specs = specs;

    Run sorted = run;
    canonicalize(sorted);

    for (const auto& [qid, list] : sorted.lists) {
        auto qit = qrels.judgments.find(qid);
        if (qit == qrels.judgments.end() || relevant_count(qit->second) == 0) {
            ++report.skipped_queries;
            continue;
        }
        auto& row = report.per_query[qid];
        for (const MetricSpec& spec : specs) {
            double value = 0.0;
            switch (spec.kind) {
                case MetricKind::ndcg: value = ndcg_at_k(list, qit->second, spec.cutoff); break;
                case MetricKind::map: value = ap_at_k(list, qit->second, spec.cutoff); break;
                case MetricKind::recall: value = recall_at_k(list, qit->second, spec.cutoff); break;
            }
            row[spec.name()] = value;
        }
        ++report.evaluated_queries;
    }

    for (const MetricSpec& spec : specs) {
        double sum = 0.0;
        for (const auto& [qid, row] : report.per_query) {
            (void)qid;
            sum += row.at(spec.name());
        }
        report.means[spec.name()] =
            report.evaluated_queries == 0 ? 0.0 : sum / static_cast<double>(report.evaluated_queries);
    }
    return report;
}

std::string format_metric_value(MetricKind kind, double value) {
    char buf[32];
    if (kind == MetricKind::recall)
        std::snprintf(buf, sizeof buf, "%.1f%%", value * 100.0);
    else
        std::snprintf(buf, sizeof buf, "%.1f", value * 100.0);
    return buf;
}

std::string format_report(const MetricReport& report, const std::string& tag, bool per_query) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"query"};
    for (const auto& spec : report.specs) header.push_back(spec.display_name());
    rows.push_back(header);
    if (per_query) {
        for (const auto& [qid, row] : report.per_query) {
            std::vector<std::string> cells{qid};
            for (const auto& spec : report.specs)
                cells.push_back(format_metric_value(spec.kind, row.at(spec.name())));
            rows.push_back(std::move(cells));
        }
    }
    std::vector<std::string> mean_row{"all"};
    for (const auto& spec : report.specs)
        mean_row.push_back(format_metric_value(spec.kind, report.means.at(spec.name())));
    rows.push_back(std::move(mean_row));

    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

    std::ostringstream out;
    out << "run: " << tag << "  (queries: " << report.evaluated_queries
        << ", skipped: " << report.skipped_queries << ")\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << "  ";
            if (c == 0) {
                out << row[c] << std::string(widths[c] - row[c].size(), ' ');
            } else {
                out << std::string(widths[c] - row[c].size(), ' ') << row[c];
            }
        }
        out << '\n';
    }
    return out.str();
}

void write_per_query_tsv(std::ostream& out, const MetricReport& report) {
    for (const auto& [qid, row] : report.per_query)
        for (const auto& spec : report.specs)
            out << qid << '\t' << spec.name() << '\t' << format_score(row.at(spec.name())) << '\n';
    for (const auto& spec : report.specs)
        out << "all" << '\t' << spec.name() << '\t' << format_score(report.means.at(spec.name()))
            << '\n';
}

std::pair<Qrels, FilterReport> filter_devset(const Qrels& qrels,
                                             const std::set<std::string>& collection_ids,
                                             const std::set<std::string>& queries) {
    if (collection_ids.empty()) throw DomainError("refusing to filter against an empty collection");
    Qrels out;
    FilterReport report;
    for (const auto& [qid, docs] : qrels.judgments) {
        if (!queries.empty() && !queries.count(qid)) {
            ++report.dropped_queries;
            report.dropped_judgments += docs.size();
            continue;
        }
        std::map<std::string, int> kept;
        std::size_t dropped_here = 0;
        bool any_relevant = false;
        for (const auto& [doc, grade] : docs) {
            if (collection_ids.count(doc)) {
                kept.emplace(doc, grade);
                if (grade >= 1) any_relevant = true;
            } else {
                ++dropped_here;
            }
        }
        if (!any_relevant) {
            ++report.dropped_queries;
            report.dropped_judgments += docs.size();
            continue;
        }
        ++report.kept_queries;
        report.kept_judgments += kept.size();
        report.dropped_judgments += dropped_here;
        out.judgments.emplace(qid, std::move(kept));
    }
    return {std::move(out), report};
}

SparseVectorSet filter_collection(const SparseVectorSet& docs,
                                  const std::set<std::string>& collection_ids) {
    if (collection_ids.empty()) throw DomainError("refusing to filter against an empty collection");
    SparseVectorSet out;
    for (const auto& [id, vec] : docs.vectors) {
        if (!collection_ids.count(id)) continue;
        for (const auto& [term, w] : vec) {
            (void)w;
            out.vocabulary.insert(term);
        }
        out.vectors.emplace(id, vec);
    }
    return out;
}

}  // namespace clirforge
