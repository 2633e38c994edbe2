#include <cmath>
#include <random>
#include <set>

#include "doctest.h"

#include "clirforge/corpus_io.hpp"
#include "clirforge/fusion.hpp"
#include "clirforge/trec_eval.hpp"
#include "generators.hpp"

using namespace clirforge;

namespace {

Run make_run(const std::string& tag,
             std::map<std::string, std::vector<std::pair<std::string, double>>> lists) {
    Run run;
    run.tag = tag;
    for (auto& [qid, docs] : lists) {
        auto& list = run.lists[qid];
        for (auto& [doc, score] : docs) list.push_back({doc, score, 0});
    }
    canonicalize(run);
    return run;
}

std::map<std::string, double> scores_of(const Run& run, const std::string& qid) {
    std::map<std::string, double> out;
    for (const auto& rec : run.lists.at(qid)) out[rec.doc_id] = rec.score;
    return out;
}

std::vector<std::string> order_of(const Run& run, const std::string& qid) {
    std::vector<std::string> out;
    for (const auto& rec : run.lists.at(qid)) out.push_back(rec.doc_id);
    return out;
}

FusionSpec spec_for(const std::vector<Run>& runs, const std::string& out_tag) {
    FusionSpec spec;
    for (const auto& r : runs) spec.member_tags.push_back(r.tag);
    spec.output_tag = out_tag;
    return spec;
}

std::set<std::string> doc_set(const Run& run, const std::string& qid) {
    std::set<std::string> out;
    for (const auto& rec : run.lists.at(qid)) out.insert(rec.doc_id);
    return out;
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("min-max on two points maps to 1 and 0") {
    Run run = make_run("r", {{"q1", {{"d1", 5.0}, {"d2", 1.0}}}});
    Run norm = minmax_normalize(run);
    CHECK(scores_of(norm, "q1") == std::map<std::string, double>{{"d1", 1.0}, {"d2", 0.0}});
}

TEST_CASE("min-max on three points") {
    Run run = make_run("r", {{"q1", {{"d1", 1.0}, {"d2", 3.0}, {"d3", 5.0}}}});
    Run norm = minmax_normalize(run);
    CHECK(scores_of(norm, "q1") ==
          std::map<std::string, double>{{"d1", 0.0}, {"d2", 0.5}, {"d3", 1.0}});
}

TEST_CASE("degenerate query normalizes to all zeros, ordered by doc id desc") {
    Run run = make_run("r", {{"q1", {{"da", 4.0}, {"db", 4.0}, {"dc", 4.0}}}});
    Run norm = minmax_normalize(run);
    CHECK(scores_of(norm, "q1") ==
          std::map<std::string, double>{{"da", 0.0}, {"db", 0.0}, {"dc", 0.0}});
    CHECK(order_of(norm, "q1") == std::vector<std::string>{"dc", "db", "da"});
    CHECK(norm.lists.at("q1")[0].rank == 1);
}

TEST_CASE("single-member fusion reproduces the normalized run") {
    testgen::Rng rng(9101);
    for (int iter = 0; iter < 30; ++iter) {
        Run run = testgen::random_run(rng, 5, 20);
        Run fused = fuse({run}, spec_for({run}, "one"));
        Run norm = minmax_normalize(run);
        CHECK(fused.tag == "one");
        REQUIRE(fused.lists.size() == norm.lists.size());
        for (const auto& [qid, list] : norm.lists) {
            const auto& flist = fused.lists.at(qid);
            REQUIRE(flist.size() == list.size());
            for (std::size_t i = 0; i < list.size(); ++i) {
                CHECK(flist[i].doc_id == list[i].doc_id);
                CHECK(flist[i].score == list[i].score);
            }
        }
    }
}

TEST_CASE("two opposed symmetric runs fuse to 0.5 everywhere") {
    Run r1 = make_run("a", {{"q1", {{"d1", 10.0}, {"d2", 2.0}}}});
    Run r2 = make_run("b", {{"q1", {{"d1", 2.0}, {"d2", 10.0}}}});
    Run fused = fuse({r1, r2}, spec_for({r1, r2}, "f"));
    CHECK(scores_of(fused, "q1") == std::map<std::string, double>{{"d1", 0.5}, {"d2", 0.5}});
    CHECK(order_of(fused, "q1") == std::vector<std::string>{"d2", "d1"});  // ties: doc id desc
}

TEST_CASE("documents missing from a member contribute zero") {
    Run r1 = make_run("a", {{"q1", {{"d1", 10.0}, {"d2", 0.0}}}});
    Run r2 = make_run("b", {{"q1", {{"d2", 7.0}, {"d3", 3.0}}}});
    Run fused = fuse({r1, r2}, spec_for({r1, r2}, "f"));
    CHECK(scores_of(fused, "q1") ==
          std::map<std::string, double>{{"d1", 0.5}, {"d2", 0.5}, {"d3", 0.0}});
}

TEST_CASE("renorm averages only over the members that returned the doc") {
    Run r1 = make_run("a", {{"q1", {{"d1", 10.0}, {"d2", 0.0}}}});
    Run r2 = make_run("b", {{"q1", {{"d2", 7.0}, {"d3", 3.0}}}});
    auto spec = spec_for({r1, r2}, "f");
    spec.missing = FusionSpec::Missing::renorm;
    Run fused = fuse({r1, r2}, spec);
    CHECK(scores_of(fused, "q1") ==
          std::map<std::string, double>{{"d1", 1.0}, {"d2", 0.5}, {"d3", 0.0}});
}

TEST_CASE("queries carried by only some members still fuse") {
    Run r1 = make_run("a", {{"q1", {{"d1", 1.0}, {"d2", 0.0}}}});
    Run r2 = make_run("b", {{"q2", {{"d9", 4.0}, {"d8", 1.0}}}});
    Run fused = fuse({r1, r2}, spec_for({r1, r2}, "f"));
    CHECK(fused.lists.count("q1") == 1);
    CHECK(fused.lists.count("q2") == 1);
    CHECK(scores_of(fused, "q2") == std::map<std::string, double>{{"d9", 0.5}, {"d8", 0.0}});
}

TEST_CASE("fusion validates members, tags and weights") {
    Run r1 = make_run("a", {{"q1", {{"d1", 1.0}}}});
    CHECK_THROWS_AS(fuse({}, FusionSpec{}), DomainError);
    auto bad_tag = spec_for({r1}, "f");
    bad_tag.member_tags[0] = "other";
    CHECK_THROWS_AS(fuse({r1}, bad_tag), DomainError);
    auto bad_weights = spec_for({r1}, "f");
    bad_weights.weights = {1.0, 2.0};
    CHECK_THROWS_AS(fuse({r1}, bad_weights), DomainError);
    auto zero_weight = spec_for({r1}, "f");
    zero_weight.weights = {0.0};
    CHECK_THROWS_AS(fuse({r1}, zero_weight), DomainError);
}

TEST_CASE("fused scores stay inside [0, 1] and runs stay canonical") {
    testgen::Rng rng(9102);
    for (int iter = 0; iter < 40; ++iter) {
        std::vector<Run> members;
        std::vector<std::string> tags = {"a", "b", "c"};
        for (const auto& tag : tags)
            members.push_back(testgen::random_run(rng, 4, 15, /*integer_scores=*/false, tag));
        Run fused = fuse(members, spec_for(members, "f"));
        for (const auto& [qid, list] : fused.lists) {
            (void)qid;
            for (std::size_t i = 0; i < list.size(); ++i) {
                CHECK(list[i].score >= 0.0);
                CHECK(list[i].score <= 1.0);
                CHECK(list[i].rank == static_cast<int>(i) + 1);
                if (i) CHECK(list[i - 1].score >= list[i].score);
            }
        }
    }
}

TEST_CASE("duplicating a member changes nothing") {
    testgen::Rng rng(9103);
    for (int iter = 0; iter < 30; ++iter) {
        Run run = testgen::random_run(rng, 4, 15);
        Run once = fuse({run}, spec_for({run}, "f"));
        Run twice = fuse({run, run}, spec_for({run, run}, "f"));
        REQUIRE(once.lists.size() == twice.lists.size());
        for (const auto& [qid, list] : once.lists) {
            CHECK(order_of(twice, qid) == order_of(once, qid));
            CHECK(scores_of(twice, qid) == scores_of(once, qid));
        }
    }
}

TEST_CASE("per-query positive affine transforms of a member are invisible") {
    // Power-of-two scales and integer offsets over integer scores keep the
    // transformed arithmetic exact, so equality is bitwise, not approximate.
    testgen::Rng rng(9104);
    std::uniform_int_distribution<int> exponent(-3, 3);
    std::uniform_int_distribution<int> offset(-100000, 100000);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<Run> members;
        for (const auto* tag : {"a", "b", "c"})
            members.push_back(testgen::random_run(rng, 4, 15, /*integer_scores=*/true, tag));
        Run base = fuse(members, spec_for(members, "f"));

        std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
        auto transformed = members;
        Run& victim = transformed[pick(rng)];
        for (auto& [qid, list] : victim.lists) {
            (void)qid;
            double a = std::ldexp(1.0, exponent(rng));
            double b = offset(rng);
            for (auto& rec : list) rec.score = a * rec.score + b;
        }
        canonicalize(victim);
        Run shifted = fuse(transformed, spec_for(transformed, "f"));
        REQUIRE(shifted.lists.size() == base.lists.size());
        for (const auto& [qid, list] : base.lists) {
            (void)list;
            CHECK(order_of(shifted, qid) == order_of(base, qid));
            CHECK(scores_of(shifted, qid) == scores_of(base, qid));
        }
    }
}

TEST_CASE("rerank merge with matching scores is a fixed point of the ordering") {
    Run cand = make_run("c", {{"q1", {{"d1", 9.0}, {"d2", 5.0}, {"d3", 1.0}}}});
    RerankScores rr;
    rr.depth = 10;
    rr.scores["q1"] = {{"d1", 9.0}, {"d2", 5.0}, {"d3", 1.0}};
    Run merged = apply_rerank_scores(cand, rr);
    CHECK(order_of(merged, "q1") == order_of(cand, "q1"));
    // rank-encoded scores: N - rank + 1
    CHECK(scores_of(merged, "q1") ==
          std::map<std::string, double>{{"d1", 3.0}, {"d2", 2.0}, {"d3", 1.0}});
}

TEST_CASE("rerank merge permutes only the top-depth prefix") {
    Run cand = make_run("c", {{"q1", {{"d1", 9.0}, {"d2", 5.0}, {"d3", 1.0}}}});
    RerankScores rr;
    rr.depth = 2;
    rr.scores["q1"] = {{"d2", 9.0}, {"d1", 3.0}};
    Run merged = apply_rerank_scores(cand, rr);
    CHECK(order_of(merged, "q1") == std::vector<std::string>{"d2", "d1", "d3"});
}

TEST_CASE("unscored top-depth documents follow the scored ones in candidate order") {
    Run cand = make_run("c", {{"q1", {{"d1", 9.0}, {"d2", 8.0}, {"d3", 7.0}, {"d4", 6.0}}}});
    RerankScores rr;
    rr.depth = 3;
    rr.scores["q1"] = {{"d3", 1.0}};
    Run merged = apply_rerank_scores(cand, rr);
    CHECK(order_of(merged, "q1") == std::vector<std::string>{"d3", "d1", "d2", "d4"});
}

TEST_CASE("rerank merge rejects scores for unknown documents") {
    Run cand = make_run("c", {{"q1", {{"d1", 9.0}}}});
    RerankScores rr;
    rr.scores["q1"] = {{"dX", 1.0}};
    CHECK_THROWS_AS(apply_rerank_scores(cand, rr), DomainError);
    try {
        apply_rerank_scores(cand, rr);
    } catch (const DomainError& e) {
        std::string what = e.what();
        CHECK(what.find("q1") != std::string::npos);
        CHECK(what.find("dX") != std::string::npos);
    }
    RerankScores wrong_query;
    wrong_query.scores["q9"] = {{"d1", 1.0}};
    CHECK_THROWS_AS(apply_rerank_scores(cand, wrong_query), DomainError);
}

TEST_CASE("rerank merge preserves the document set and recall") {
    testgen::Rng rng(9105);
    std::uniform_real_distribution<double> rr_score(-5.0, 5.0);
    std::uniform_int_distribution<std::size_t> depth_dist(1, 25);
    for (int iter = 0; iter < 40; ++iter) {
        Run cand = testgen::random_run(rng, 5, 20);
        Qrels qrels = testgen::random_qrels(rng, 5, 20);
        RerankScores rr;
        rr.depth = depth_dist(rng);
        for (const auto& [qid, list] : cand.lists) {
            std::size_t depth = std::min(rr.depth, list.size());
            for (std::size_t i = 0; i < depth; ++i)
                if (i % 3 != 2) rr.scores[qid][list[i].doc_id] = rr_score(rng);
        }
        Run merged = apply_rerank_scores(cand, rr);
        REQUIRE(merged.lists.size() == cand.lists.size());
        for (const auto& [qid, list] : cand.lists) {
            (void)list;
            CHECK(doc_set(merged, qid) == doc_set(cand, qid));
        }
        MetricSpec recall{MetricKind::recall, 1000};
        auto before = evaluate(cand, qrels, {recall});
        auto after = evaluate(merged, qrels, {recall});
        CHECK(before.means.at("recall@1000") == after.means.at("recall@1000"));
    }
}

}  // TEST_SUITE
