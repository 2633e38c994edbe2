#include "clirforge/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "clirforge/corpus_io.hpp"
#include "clirforge/fusion.hpp"
#include "clirforge/late_interaction.hpp"
#include "clirforge/sparse_engine.hpp"
#include "clirforge/trec_eval.hpp"
#include "digest.hpp"

namespace fs = std::filesystem;

namespace clirforge {

namespace {

const std::set<std::string>& input_kinds() {
    static const std::set<std::string> kinds = {
        "sparse-vectors", "embeddings", "token-counts", "run",
        "rerank-scores",  "qrels",      "collection-ids"};
    return kinds;
}

const char* output_kind(const std::string& op) {
    if (op == "index") return "index";
    if (op == "bm25-weigh") return "sparse-vectors";
    if (op == "eval") return "report";
    if (op == "filter-dev") return "qrels";
    if (op == "retrieve" || op == "prf-retrieve" || op == "late-retrieve" || op == "fuse" ||
        op == "rerank-merge")
        return "run";
    return nullptr;  // unknown op
}

std::string substitute(std::string s, const std::string& language) {
    std::size_t pos = 0;
    while ((pos = s.find("{language}", pos)) != std::string::npos) {
        s.replace(pos, 10, language);
        pos += language.size();
    }
    return s;
}

void substitute_strings(nlohmann::json& value, const std::string& language) {
    if (value.is_string()) {
        value = substitute(value.get<std::string>(), language);
    } else if (value.is_object() || value.is_array()) {
        for (auto& child : value) substitute_strings(child, language);
    }
}

/// (param label, referenced name) pairs for every artifact reference a
/// stage makes. Tolerant of missing/ill-typed params; validation reports
/// those separately.
std::vector<std::pair<std::string, std::string>> stage_refs(const StageSpec& stage) {
    std::vector<std::pair<std::string, std::string>> refs;
    auto take = [&](const char* key) {
        if (stage.params.contains(key) && stage.params[key].is_string())
            refs.emplace_back(key, stage.params[key].get<std::string>());
    };
    if (stage.op == "index") {
        take("docs");
    } else if (stage.op == "retrieve" || stage.op == "prf-retrieve" ||
               stage.op == "late-retrieve") {
        take("docs");
        take("queries");
    } else if (stage.op == "bm25-weigh") {
        take("corpus");
        take("queries");
    } else if (stage.op == "fuse") {
        if (stage.params.contains("members") && stage.params["members"].is_array()) {
            std::size_t i = 0;
            for (const auto& member : stage.params["members"]) {
                if (member.is_string())
                    refs.emplace_back("members[" + std::to_string(i) + "]",
                                      member.get<std::string>());
                ++i;
            }
        }
    } else if (stage.op == "rerank-merge") {
        take("candidate");
        take("scores");
    } else if (stage.op == "eval") {
        take("run");
        take("qrels");
    } else if (stage.op == "filter-dev") {
        take("qrels");
        take("collection_ids");
    }
    return refs;
}

struct ParamChecker {
    const StageSpec& stage;
    const std::map<std::string, std::string>& symbols;  // name -> kind
    std::vector<Diagnostic>& diags;
    std::set<std::string> allowed;

    void fail(std::string msg) { diags.push_back({stage.output_tag, std::move(msg)}); }

    bool ref(const char* key, std::initializer_list<const char*> kinds, bool required) {
        allowed.insert(key);
        if (!stage.params.contains(key)) {
            if (required) fail(std::string("missing required parameter '") + key + "'");
            return false;
        }
        const auto& v = stage.params[key];
        if (!v.is_string()) {
            fail(std::string("parameter '") + key + "' must name an artifact");
            return false;
        }
        return check_ref(key, v.get<std::string>(), kinds);
    }

    bool check_ref(const std::string& label, const std::string& name,
                   std::initializer_list<const char*> kinds) {
        auto it = symbols.find(name);
        if (it == symbols.end()) {
            fail("parameter '" + label + "' references undeclared artifact '" + name + "'");
            return false;
        }
        for (const char* k : kinds)
            if (it->second == k) return true;
        fail("parameter '" + label + "' expects " + join_kinds(kinds) + ", but '" + name +
             "' is " + it->second);
        return false;
    }

    static std::string join_kinds(std::initializer_list<const char*> kinds) {
        std::string out;
        for (const char* k : kinds) {
            if (!out.empty()) out += " or ";
            out += k;
        }
        return out;
    }

    template <typename T>
    std::optional<T> number(const char* key, bool integer_only) {
        allowed.insert(key);
        if (!stage.params.contains(key)) return std::nullopt;
        const auto& v = stage.params[key];
        if (integer_only ? !v.is_number_integer() : !v.is_number()) {
            fail(std::string("parameter '") + key + "' must be a " +
                 (integer_only ? "whole number" : "number"));
            return std::nullopt;
        }
        return v.get<T>();
    }

    std::optional<std::string> text(const char* key) {
        allowed.insert(key);
        if (!stage.params.contains(key)) return std::nullopt;
        const auto& v = stage.params[key];
        if (!v.is_string()) {
            fail(std::string("parameter '") + key + "' must be a string");
            return std::nullopt;
        }
        return v.get<std::string>();
    }

    void boolean(const char* key) {
        allowed.insert(key);
        if (stage.params.contains(key) && !stage.params[key].is_boolean())
            fail(std::string("parameter '") + key + "' must be a boolean");
    }

    void finish() {
        for (const auto& [key, v] : stage.params.items()) {
            (void)v;
            if (!allowed.count(key)) fail("unknown parameter '" + key + "'");
        }
    }
};

void validate_stage_params(const StageSpec& stage,
                           const std::map<std::string, std::string>& symbols,
                           std::vector<Diagnostic>& diags) {
    ParamChecker check{stage, symbols, diags, {}};
    auto positive = [&](const char* key, auto value) {
        if (value && !(*value >= 1)) check.fail(std::string("parameter '") + key + "' must be >= 1");
    };

    if (stage.op == "index") {
        check.ref("docs", {"sparse-vectors"}, true);
    } else if (stage.op == "retrieve") {
        check.ref("docs", {"sparse-vectors", "index"}, true);
        check.ref("queries", {"sparse-vectors"}, true);
        positive("topk", check.number<long>("topk", true));
    } else if (stage.op == "bm25-weigh") {
        check.ref("corpus", {"token-counts"}, true);
        auto side = check.text("side");
        if (side && *side != "docs" && *side != "queries")
            check.fail("parameter 'side' must be \"docs\" or \"queries\"");
        bool queries_side = side && *side == "queries";
        bool has_queries = check.ref("queries", {"token-counts"}, queries_side);
        if (has_queries && !queries_side)
            check.fail("parameter 'queries' only applies when side is \"queries\"");
        auto k1 = check.number<double>("k1", false);
        if (k1 && !(*k1 > 0.0)) check.fail("parameter 'k1' must be positive");
        auto b = check.number<double>("b", false);
        if (b && !(*b >= 0.0 && *b <= 1.0)) check.fail("parameter 'b' must be in [0, 1]");
    } else if (stage.op == "prf-retrieve") {
        check.ref("docs", {"sparse-vectors"}, true);
        check.ref("queries", {"sparse-vectors"}, true);
        positive("topk", check.number<long>("topk", true));
        auto alpha = check.number<double>("alpha", false);
        auto beta = check.number<double>("beta", false);
        if (alpha && *alpha < 0.0) check.fail("parameter 'alpha' must be >= 0");
        if (beta && *beta < 0.0) check.fail("parameter 'beta' must be >= 0");
        if (alpha && beta && !(*alpha + *beta > 0.0))
            check.fail("parameters 'alpha' and 'beta' cannot both be zero");
        positive("fb_docs", check.number<long>("fb_docs", true));
        auto cap = check.number<long>("term_cap", true);
        if (cap && *cap < 0) check.fail("parameter 'term_cap' must be >= 0");
    } else if (stage.op == "late-retrieve") {
        check.ref("docs", {"embeddings"}, true);
        check.ref("queries", {"embeddings"}, true);
        positive("topk", check.number<long>("topk", true));
    } else if (stage.op == "fuse") {
        check.allowed.insert("members");
        if (!stage.params.contains("members") || !stage.params["members"].is_array() ||
            stage.params["members"].empty()) {
            check.fail("parameter 'members' must be a non-empty array of run artifacts");
        } else {
            std::size_t i = 0;
            for (const auto& member : stage.params["members"]) {
                std::string label = "members[" + std::to_string(i) + "]";
                if (!member.is_string())
                    check.fail("parameter '" + label + "' must name an artifact");
                else
                    check.check_ref(label, member.get<std::string>(), {"run"});
                ++i;
            }
        }
        check.allowed.insert("weights");
        if (stage.params.contains("weights")) {
            const auto& w = stage.params["weights"];
            if (!w.is_array()) {
                check.fail("parameter 'weights' must be an array of positive numbers");
            } else {
                if (stage.params.contains("members") && stage.params["members"].is_array() &&
                    w.size() != stage.params["members"].size())
                    check.fail("parameter 'weights' must match the member count");
                for (const auto& x : w)
                    if (!x.is_number() || !(x.get<double>() > 0.0))
                        check.fail("parameter 'weights' must contain positive numbers");
            }
        }
        auto missing = check.text("missing");
        if (missing && *missing != "zero" && *missing != "renorm")
            check.fail("parameter 'missing' must be \"zero\" or \"renorm\"");
    } else if (stage.op == "rerank-merge") {
        check.ref("candidate", {"run"}, true);
        check.ref("scores", {"rerank-scores"}, true);
        positive("depth", check.number<long>("depth", true));
    } else if (stage.op == "eval") {
        check.ref("run", {"run"}, true);
        check.ref("qrels", {"qrels"}, true);
        check.allowed.insert("metrics");
        if (stage.params.contains("metrics")) {
            const auto& m = stage.params["metrics"];
            if (!m.is_array() || m.empty()) {
                check.fail("parameter 'metrics' must be a non-empty array of metric names");
            } else {
                for (const auto& name : m) {
                    if (!name.is_string()) {
                        check.fail("parameter 'metrics' must contain strings");
                        continue;
                    }
                    try {
                        parse_metric_spec(name.get<std::string>());
                    } catch (const Error& e) {
                        check.fail(e.what());
                    }
                }
            }
        }
        check.boolean("per_query");
    } else if (stage.op == "filter-dev") {
        check.ref("qrels", {"qrels"}, true);
        check.ref("collection_ids", {"collection-ids"}, true);
    }
    check.finish();
}

bool tag_ok(const std::string& tag) {
    if (tag.empty()) return false;
    for (char c : tag)
        if (c == '/' || c == '\\' || std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

struct Artifact {
    std::string kind;
    fs::path abs;
    std::string rel;  // path as recorded in the manifest
};

struct StageRunner {
    const fs::path& out_dir;
    std::map<std::string, Artifact>& store;
    nlohmann::ordered_json& manifest_stages;
    std::map<std::string, std::string>& outputs;

    const Artifact& artifact(const StageSpec& stage, const char* key) const {
        return store.at(stage.params.at(key).get<std::string>());
    }

    template <typename WriteFn>
    std::pair<std::string, std::string> emit(const std::string& filename, WriteFn&& write) const {
        fs::path abs = out_dir / filename;
        fs::path tmp = abs;
        tmp += ".tmp";
        try {
            write(tmp.string());
            fs::rename(tmp, abs);
        } catch (...) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw;
        }
        return {filename, abs.string()};
    }

    void run(const StageSpec& stage) {
        nlohmann::ordered_json entry;
        entry["tag"] = stage.output_tag;
        entry["op"] = stage.op;
        nlohmann::ordered_json params = nlohmann::ordered_json::object();
        nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
        for (const auto& [label, name] : stage_refs(stage)) {
            const Artifact& a = store.at(name);
            inputs[label] = {{"name", name}, {"path", a.rel}, {"sha256", sha256_file(a.abs.string())}};
        }

        std::vector<std::pair<std::string, std::string>> written;  // rel, abs
        if (stage.op == "index") {
            params["docs"] = stage.params["docs"];
            auto vectors = read_sparse_vectors_file(artifact(stage, "docs").abs.string());
            auto index = ImpactIndex::build(vectors);
            written.push_back(emit(stage.output_tag + ".idx",
                                   [&](const std::string& p) { write_index_file(p, index); }));
        } else if (stage.op == "retrieve") {
            auto k = static_cast<std::size_t>(stage.params.value("topk", 1000));
            params["docs"] = stage.params["docs"];
            params["queries"] = stage.params["queries"];
            params["topk"] = k;
            const Artifact& docs = artifact(stage, "docs");
            ImpactIndex index = docs.kind == "index"
                                    ? read_index_file(docs.abs.string())
                                    : ImpactIndex::build(read_sparse_vectors_file(docs.abs.string()));
            auto queries = read_sparse_vectors_file(artifact(stage, "queries").abs.string());
            Run run = batch_retrieve(index, queries, k, stage.output_tag);
            written.push_back(emit(stage.output_tag + ".run",
                                   [&](const std::string& p) { write_run_file(p, run); }));
        } else if (stage.op == "prf-retrieve") {
            auto k = static_cast<std::size_t>(stage.params.value("topk", 1000));
            RocchioParams prf;
            prf.alpha = stage.params.value("alpha", prf.alpha);
            prf.beta = stage.params.value("beta", prf.beta);
            prf.fb_docs = static_cast<std::size_t>(
                stage.params.value("fb_docs", static_cast<long>(prf.fb_docs)));
            prf.term_cap = static_cast<std::size_t>(
                stage.params.value("term_cap", static_cast<long>(prf.term_cap)));
            params["docs"] = stage.params["docs"];
            params["queries"] = stage.params["queries"];
            params["topk"] = k;
            params["alpha"] = prf.alpha;
            params["beta"] = prf.beta;
            params["fb_docs"] = prf.fb_docs;
            params["term_cap"] = prf.term_cap;
            auto vectors = read_sparse_vectors_file(artifact(stage, "docs").abs.string());
            auto index = ImpactIndex::build(vectors);
            auto queries = read_sparse_vectors_file(artifact(stage, "queries").abs.string());
            Run run = batch_retrieve_prf(index, vectors, queries, k, prf, stage.output_tag);
            written.push_back(emit(stage.output_tag + ".run",
                                   [&](const std::string& p) { write_run_file(p, run); }));
        } else if (stage.op == "bm25-weigh") {
            std::string side = stage.params.value("side", "docs");
            auto corpus = read_sparse_vectors_file(artifact(stage, "corpus").abs.string());
            params["corpus"] = stage.params["corpus"];
            params["side"] = side;
            SparseVectorSet weighted;
            if (side == "docs") {
                Bm25Params bm25;
                bm25.k1 = stage.params.value("k1", bm25.k1);
                bm25.b = stage.params.value("b", bm25.b);
                params["k1"] = bm25.k1;
                params["b"] = bm25.b;
                weighted = bm25_weigh_corpus(corpus, bm25);
            } else {
                params["queries"] = stage.params["queries"];
                auto stats = bm25_corpus_stats(corpus);
                auto query_tokens = read_sparse_vectors_file(artifact(stage, "queries").abs.string());
                for (const auto& [qid, tf] : query_tokens.vectors) {
                    SparseVector vec = bm25_weigh_query(tf, stats);
                    for (const auto& [term, w] : vec) {
                        (void)w;
                        weighted.vocabulary.insert(term);
                    }
                    weighted.vectors.emplace(qid, std::move(vec));
                }
            }
            written.push_back(emit(stage.output_tag + ".vec", [&](const std::string& p) {
                write_sparse_vectors_file(p, weighted);
            }));
        } else if (stage.op == "late-retrieve") {
            auto k = static_cast<std::size_t>(stage.params.value("topk", 1000));
            params["docs"] = stage.params["docs"];
            params["queries"] = stage.params["queries"];
            params["topk"] = k;
            auto docs = read_embedding_file(artifact(stage, "docs").abs.string());
            auto queries = read_embedding_file(artifact(stage, "queries").abs.string());
            Run run = batch_late_retrieve(docs, queries, k, stage.output_tag);
            written.push_back(emit(stage.output_tag + ".run",
                                   [&](const std::string& p) { write_run_file(p, run); }));
        } else if (stage.op == "fuse") {
            FusionSpec spec;
            spec.output_tag = stage.output_tag;
            std::vector<Run> members;
            for (const auto& name : stage.params["members"]) {
                Run r = read_run_file(store.at(name.get<std::string>()).abs.string());
                spec.member_tags.push_back(r.tag);
                members.push_back(std::move(r));
            }
            params["members"] = stage.params["members"];
            if (stage.params.contains("weights")) {
                spec.weights = stage.params["weights"].get<std::vector<double>>();
                params["weights"] = stage.params["weights"];
            }
            std::string missing = stage.params.value("missing", "zero");
            spec.missing =
                missing == "renorm" ? FusionSpec::Missing::renorm : FusionSpec::Missing::zero;
            params["missing"] = missing;
            Run fused = fuse(members, spec);
            written.push_back(emit(stage.output_tag + ".run",
                                   [&](const std::string& p) { write_run_file(p, fused); }));
        } else if (stage.op == "rerank-merge") {
            auto candidate = read_run_file(artifact(stage, "candidate").abs.string());
            auto rr = read_rerank_scores_file(artifact(stage, "scores").abs.string());
            rr.depth = static_cast<std::size_t>(stage.params.value("depth", 1000));
            params["candidate"] = stage.params["candidate"];
            params["scores"] = stage.params["scores"];
            params["depth"] = rr.depth;
            Run merged = apply_rerank_scores(candidate, rr);
            merged.tag = stage.output_tag;
            written.push_back(emit(stage.output_tag + ".run",
                                   [&](const std::string& p) { write_run_file(p, merged); }));
        } else if (stage.op == "eval") {
            auto run = read_run_file(artifact(stage, "run").abs.string());
            auto qrels = read_qrels_file(artifact(stage, "qrels").abs.string());
            std::vector<MetricSpec> specs;
            if (stage.params.contains("metrics")) {
                for (const auto& name : stage.params["metrics"])
                    specs.push_back(parse_metric_spec(name.get<std::string>()));
            } else {
                specs = default_metrics();
            }
            bool per_query = stage.params.value("per_query", false);
            params["run"] = stage.params["run"];
            params["qrels"] = stage.params["qrels"];
            auto metric_names = nlohmann::ordered_json::array();
            for (const auto& spec : specs) metric_names.push_back(spec.name());
            params["metrics"] = metric_names;
            params["per_query"] = per_query;
            MetricReport report = evaluate(run, qrels, specs);
            std::string table = format_report(report, run.tag, per_query);
            std::cout << table << '\n';
            written.push_back(emit(stage.output_tag + ".txt", [&](const std::string& p) {
                std::ofstream f(p, std::ios::binary | std::ios::trunc);
                if (!f) throw Error("cannot create " + p);
                f << table;
                f.flush();
                if (!f) throw Error("write failed for " + p);
            }));
            written.push_back(emit(stage.output_tag + ".tsv", [&](const std::string& p) {
                std::ofstream f(p, std::ios::binary | std::ios::trunc);
                if (!f) throw Error("cannot create " + p);
                write_per_query_tsv(f, report);
                f.flush();
                if (!f) throw Error("write failed for " + p);
            }));
        } else if (stage.op == "filter-dev") {
            auto qrels = read_qrels_file(artifact(stage, "qrels").abs.string());
            auto ids = read_id_list_file(artifact(stage, "collection_ids").abs.string());
            params["qrels"] = stage.params["qrels"];
            params["collection_ids"] = stage.params["collection_ids"];
            auto filter_result = filter_devset(qrels, ids);
            const Qrels& filtered = filter_result.first;
            const FilterReport& report = filter_result.second;
            written.push_back(emit(stage.output_tag + ".qrels", [&](const std::string& p) {
                write_qrels_file(p, filtered);
            }));
            entry["filter"] = {{"kept_judgments", report.kept_judgments},
                               {"dropped_judgments", report.dropped_judgments},
                               {"kept_queries", report.kept_queries},
                               {"dropped_queries", report.dropped_queries}};
            std::cerr << "  filter-dev: kept " << report.kept_judgments << " judgments over "
                      << report.kept_queries << " queries (dropped " << report.dropped_judgments
                      << " / " << report.dropped_queries << ")\n";
        } else {
            throw Error("unknown stage op '" + stage.op + "'");
        }

        entry["params"] = std::move(params);
        entry["inputs"] = std::move(inputs);
        auto outs = nlohmann::ordered_json::array();
        for (const auto& [rel, abs] : written)
            outs.push_back({{"path", rel}, {"sha256", sha256_file(abs)}});
        entry["outputs"] = std::move(outs);
        manifest_stages.push_back(std::move(entry));

        const auto& primary = written.front();
        store[stage.output_tag] = {output_kind(stage.op), out_dir / primary.first, primary.first};
        outputs[stage.output_tag] = primary.second;
    }
};

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& ex) {
        throw Error(path + ": bad JSON: " + ex.what());
    }
    if (!doc.is_object()) throw Error(path + ": config must be a JSON object");

    PipelineConfig cfg;
    cfg.base_dir = fs::absolute(fs::path(path)).parent_path();
    if (doc.contains("language")) {
        if (!doc["language"].is_string()) throw Error(path + ": 'language' must be a string");
        cfg.language = doc["language"].get<std::string>();
    }
    std::string out_dir = "out";
    if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string()) throw Error(path + ": 'output_dir' must be a string");
        out_dir = doc["output_dir"].get<std::string>();
    }
    cfg.output_dir = substitute(out_dir, cfg.language);

    if (doc.contains("inputs")) {
        if (!doc["inputs"].is_object()) throw Error(path + ": 'inputs' must be an object");
        for (const auto& [name, spec] : doc["inputs"].items()) {
            if (!spec.is_object() || !spec.contains("path") || !spec["path"].is_string() ||
                !spec.contains("kind") || !spec["kind"].is_string())
                throw Error(path + ": input '" + name + "' needs string 'path' and 'kind'");
            cfg.inputs[name] = {substitute(spec["path"].get<std::string>(), cfg.language),
                                spec["kind"].get<std::string>()};
        }
    }

    if (doc.contains("stages")) {
        if (!doc["stages"].is_array()) throw Error(path + ": 'stages' must be an array");
        for (const auto& item : doc["stages"]) {
            if (!item.is_object() || !item.contains("op") || !item["op"].is_string() ||
                !item.contains("output_tag") || !item["output_tag"].is_string())
                throw Error(path + ": every stage needs string 'op' and 'output_tag'");
            StageSpec stage;
            stage.op = item["op"].get<std::string>();
            stage.output_tag = substitute(item["output_tag"].get<std::string>(), cfg.language);
            if (item.contains("params")) {
                if (!item["params"].is_object())
                    throw Error(path + ": stage '" + stage.output_tag + "': 'params' must be an object");
                stage.params = item["params"];
                substitute_strings(stage.params, cfg.language);
            }
            cfg.stages.push_back(std::move(stage));
        }
    }
    return cfg;
}

std::vector<Diagnostic> validate_config(const PipelineConfig& cfg) {
    std::vector<Diagnostic> diags;
    auto add = [&](const std::string& stage, std::string msg) {
        diags.push_back({stage, std::move(msg)});
    };

    if (cfg.language.empty()) add("", "'language' must be non-empty");
    if (cfg.output_dir.empty()) add("", "'output_dir' must be non-empty");
    if (cfg.stages.empty()) add("", "no stages declared");

    std::map<std::string, std::string> symbols;
    for (const auto& [name, input] : cfg.inputs) {
        if (!input_kinds().count(input.kind))
            add("", "input '" + name + "' has unknown kind '" + input.kind + "'");
        if (input.path.empty()) add("", "input '" + name + "' has an empty path");
        symbols[name] = input.kind;
    }

    std::set<std::string> stage_tags;
    for (const StageSpec& stage : cfg.stages) {
        if (!tag_ok(stage.output_tag))
            add(stage.output_tag, "output_tag must be non-empty and free of spaces and slashes");
        const char* kind = output_kind(stage.op);
        if (!kind) {
            add(stage.output_tag, "unknown op '" + stage.op + "'");
            continue;
        }
        if (symbols.count(stage.output_tag)) {
            add(stage.output_tag, "duplicate output_tag '" + stage.output_tag + "'");
            continue;
        }
        symbols[stage.output_tag] = kind;
        stage_tags.insert(stage.output_tag);
    }

    for (const StageSpec& stage : cfg.stages)
        if (output_kind(stage.op)) validate_stage_params(stage, symbols, diags);

    // Cycle check over stage-to-stage references.
    std::set<std::string> done;
    std::vector<const StageSpec*> pending;
    for (const StageSpec& stage : cfg.stages) pending.push_back(&stage);
    bool progress = true;
    while (progress && !pending.empty()) {
        progress = false;
        for (auto it = pending.begin(); it != pending.end();) {
            bool ready = true;
            for (const auto& [label, name] : stage_refs(**it)) {
                (void)label;
                if (stage_tags.count(name) && !done.count(name)) {
                    ready = false;
                    break;
                }
            }
            if (ready) {
                done.insert((*it)->output_tag);
                it = pending.erase(it);
                progress = true;
            } else {
                ++it;
            }
        }
    }
    if (!pending.empty()) {
        std::string names;
        for (const StageSpec* s : pending) {
            if (!names.empty()) names += ", ";
            names += s->output_tag;
        }
        add("", "dependency cycle involving: " + names);
    }
    return diags;
}

std::map<std::string, std::string> run_pipeline(const PipelineConfig& cfg) {
    auto diags = validate_config(cfg);
    if (!diags.empty()) {
        std::string msg = "invalid pipeline config:";
        for (const Diagnostic& d : diags)
            msg += "\n  " + (d.stage.empty() ? std::string() : d.stage + ": ") + d.message;
        throw Error(msg);
    }

    fs::path out_dir =
        cfg.output_dir.is_absolute() ? cfg.output_dir : cfg.base_dir / cfg.output_dir;
    fs::create_directories(out_dir);

    std::map<std::string, Artifact> store;
    for (const auto& [name, input] : cfg.inputs) {
        fs::path p = fs::path(input.path).is_absolute() ? fs::path(input.path)
                                                        : cfg.base_dir / input.path;
        store[name] = {input.kind, p, input.path};
    }

    nlohmann::ordered_json manifest;
    manifest["language"] = cfg.language;
    manifest["stages"] = nlohmann::ordered_json::array();
    std::map<std::string, std::string> outputs;

    StageRunner runner{out_dir, store, manifest["stages"], outputs};

    std::vector<const StageSpec*> pending;
    for (const StageSpec& stage : cfg.stages) pending.push_back(&stage);
    while (!pending.empty()) {
        auto it = std::find_if(pending.begin(), pending.end(), [&](const StageSpec* s) {
            for (const auto& [label, name] : stage_refs(*s)) {
                (void)label;
                if (!store.count(name)) return false;
            }
            return true;
        });
        if (it == pending.end()) throw Error("stage graph is stuck; this should be unreachable");
        const StageSpec& stage = **it;
        pending.erase(it);
        std::cerr << "[" << stage.op << "] " << stage.output_tag << '\n';
        try {
            runner.run(stage);
        } catch (const std::exception& e) {
            throw Error("stage '" + stage.output_tag + "' (" + stage.op + ") failed: " + e.what());
        }
    }

    fs::path manifest_path = out_dir / "manifest.json";
    fs::path tmp = manifest_path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot create " + tmp.string());
        f << manifest.dump(2) << '\n';
        f.flush();
        if (!f) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, manifest_path);
    return outputs;
}

}  // namespace clirforge
