#include <random>
#include <sstream>

#include "doctest.h"

#include "clirforge/corpus_io.hpp"
#include "generators.hpp"

using namespace clirforge;

namespace {

Run parse_run(const std::string& text) {
    std::istringstream in(text);
    return parse_trec_run(in);
}

std::string dump_run(const Run& run) {
    std::ostringstream out;
    write_trec_run(out, run);
    return out.str();
}

SparseVectorSet parse_vectors(const std::string& text) {
    std::istringstream in(text);
    return load_sparse_vectors(in);
}

}  // namespace

TEST_SUITE("corpus-io") {

TEST_CASE("single run line parses to one record") {
    Run run = parse_run("q1 Q0 d7 1 3.5 sys\n");
    REQUIRE(run.lists.size() == 1);
    CHECK(run.tag == "sys");
    const auto& list = run.lists.at("q1");
    REQUIRE(list.size() == 1);
    CHECK(list[0].doc_id == "d7");
    CHECK(list[0].score == 3.5);
    CHECK(list[0].rank == 1);
}

TEST_CASE("records are re-sorted by score regardless of the rank column") {
    // Input claims d1 at rank 1 with the lower score; canonical order must
    // put the 2.0 document first and rewrite ranks.
    Run run = parse_run("q1 Q0 d1 1 1.0 sys\nq1 Q0 d2 2 2.0 sys\n");
    const auto& list = run.lists.at("q1");
    REQUIRE(list.size() == 2);
    CHECK(list[0].doc_id == "d2");
    CHECK(list[0].score == 2.0);
    CHECK(list[0].rank == 1);
    CHECK(list[1].doc_id == "d1");
    CHECK(list[1].rank == 2);
}

TEST_CASE("score ties order by doc_id descending") {
    Run run = parse_run("q1 Q0 da 1 1.0 s\nq1 Q0 db 2 1.0 s\nq1 Q0 dc 3 1.0 s\n");
    const auto& list = run.lists.at("q1");
    CHECK(list[0].doc_id == "dc");
    CHECK(list[1].doc_id == "db");
    CHECK(list[2].doc_id == "da");
}

TEST_CASE("malformed run lines report the line number") {
    CHECK_THROWS_AS(parse_run("q1 Q0 d7 one 3.5 sys\n"), ParseError);
    try {
        parse_run("q1 Q0 d7 1 3.5 sys\nq2 Q0 d1 one 1.0 sys\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_run("q1 Q0 d7 1 3.5\n"), ParseError);          // 5 columns
    CHECK_THROWS_AS(parse_run("q1 Q0 d7 1 3.5 sys extra\n"), ParseError);  // 7 columns
    CHECK_THROWS_AS(parse_run("q1 Q0 d7 1 inf sys\n"), ParseError);      // non-finite
}

TEST_CASE("duplicate (query, doc) pairs are rejected") {
    CHECK_THROWS_AS(parse_run("q1 Q0 d7 1 3.5 sys\nq1 Q0 d7 2 1.0 sys\n"), DuplicateError);
}

TEST_CASE("writing a single record emits the canonical line") {
    Run run;
    run.tag = "sys";
    run.lists["q1"] = {{"d7", 3.5, 1}};
    CHECK(dump_run(run) == "q1 Q0 d7 1 3.5 sys\n");
}

TEST_CASE("queries are written in ascending id order") {
    Run run;
    run.tag = "s";
    run.lists["q2"] = {{"d1", 1.0, 1}};
    run.lists["q1"] = {{"d2", 2.0, 1}};
    CHECK(dump_run(run) == "q1 Q0 d2 1 2 s\nq2 Q0 d1 1 1 s\n");
}

TEST_CASE("parse-write round trip is the identity on random runs") {
    testgen::Rng rng(7001);
    for (int iter = 0; iter < 100; ++iter) {
        Run run = testgen::random_run(rng, 8, 30, /*integer_scores=*/false);
        std::string text = dump_run(run);
        Run back = parse_run(text);
        CHECK(back == run);
        CHECK(dump_run(back) == text);
    }
}

TEST_CASE("scores needing many significant digits survive the round trip") {
    Run run;
    run.tag = "t";
    run.lists["q1"] = {{"d2", 0.1234567891234567, 1}, {"d1", 0.1234567891234566, 2}};
    Run back = parse_run(dump_run(run));
    CHECK(back.lists.at("q1")[0].score == 0.1234567891234567);
    CHECK(back.lists.at("q1")[1].score == 0.1234567891234566);
}

TEST_CASE("extreme score magnitudes round trip bit-exactly") {
    Run run;
    run.tag = "t";
    run.lists["q1"] = {{"d4", 1e308, 1},
                       {"d3", 2.2250738585072014e-308, 2},
                       {"d2", 5e-324, 3},  // smallest subnormal
                       {"d1", -0.0, 4}};
    canonicalize(run);
    Run back = parse_run(dump_run(run));
    CHECK(back == run);
}

TEST_CASE("parsers reject arbitrary garbage without crashing") {
    testgen::Rng rng(7005);
    std::uniform_int_distribution<int> len(0, 120);
    std::uniform_int_distribution<int> byte(1, 255);  // no NUL; getline-hostile enough
    for (int iter = 0; iter < 300; ++iter) {
        std::string noise;
        int n = len(rng);
        for (int i = 0; i < n; ++i) noise.push_back(static_cast<char>(byte(rng)));
        for (int which = 0; which < 4; ++which) {
            std::istringstream in(noise);
            try {
                switch (which) {
                    case 0: parse_trec_run(in); break;
                    case 1: parse_qrels(in); break;
                    case 2: load_sparse_vectors(in); break;
                    case 3: load_embedding_set(in); break;
                }
            } catch (const Error&) {
                // rejected cleanly
            }
        }
    }
    CHECK(true);
}

TEST_CASE("qrels parse and reject bad input") {
    std::istringstream in("q1 0 d1 1\nq1 0 d2 0\n");
    Qrels qrels = parse_qrels(in);
    CHECK(qrels.judgments.at("q1").at("d1") == 1);
    CHECK(qrels.judgments.at("q1").at("d2") == 0);

    std::istringstream dup("q1 0 d1 1\nq1 0 d1 1\n");
    CHECK_THROWS_AS(parse_qrels(dup), DuplicateError);
    std::istringstream neg("q1 0 d1 -2\n");
    CHECK_THROWS_AS(parse_qrels(neg), DomainError);
    std::istringstream bad("q1 0 d1\n");
    CHECK_THROWS_AS(parse_qrels(bad), ParseError);
    std::istringstream nonnum("q1 0 d1 x\n");
    CHECK_THROWS_AS(parse_qrels(nonnum), ParseError);
}

TEST_CASE("qrels round trip") {
    Qrels qrels;
    qrels.judgments["q1"] = {{"d1", 2}, {"d2", 0}};
    qrels.judgments["q2"] = {{"d3", 1}};
    std::ostringstream out;
    write_qrels(out, qrels);
    std::istringstream in(out.str());
    CHECK(parse_qrels(in) == qrels);
}

TEST_CASE("sparse vector record with one term") {
    SparseVectorSet set = parse_vectors("d1\t{\"apple\": 1.5}\n");
    REQUIRE(set.vectors.size() == 1);
    CHECK(set.vectors.at("d1").at("apple") == 1.5);
    CHECK(set.vocabulary.count("apple") == 1);
}

TEST_CASE("sparse vector errors") {
    CHECK_THROWS_AS(parse_vectors("d1\t{\"a\": -0.1}\n"), DomainError);
    CHECK_THROWS_AS(parse_vectors("d1\t{\"a\": 1.0, \"a\": 2.0}\n"), DuplicateError);
    CHECK_THROWS_AS(parse_vectors("d1\t{\"a\": \"x\"}\n"), ParseError);
    CHECK_THROWS_AS(parse_vectors("d1 {\"a\": 1.0}\n"), ParseError);  // no tab
    CHECK_THROWS_AS(parse_vectors("d1\t[1, 2]\n"), ParseError);
    CHECK_THROWS_AS(parse_vectors("d1\t{\"a\": 1.0}\nd1\t{\"b\": 1.0}\n"), DuplicateError);
}

TEST_CASE("zero weights are dropped on load") {
    SparseVectorSet set = parse_vectors("d1\t{\"a\": 0.0, \"b\": 2}\n");
    CHECK(set.vectors.at("d1").count("a") == 0);
    CHECK(set.vectors.at("d1").at("b") == 2.0);
}

TEST_CASE("sparse vectors round trip exactly") {
    testgen::Rng rng(7002);
    for (int iter = 0; iter < 20; ++iter) {
        SparseVectorSet set = testgen::random_vector_set(rng, 50, 80, 12);
        std::ostringstream out;
        write_sparse_vectors(out, set);
        SparseVectorSet back = parse_vectors(out.str());
        CHECK(back == set);
    }
}

TEST_CASE("sparse vector terms with JSON-hostile characters round trip") {
    SparseVectorSet set;
    set.vectors["d1"] = {{"he said \"hi\"", 1.25}, {"tab\there", 2.0}, {"inédit", 3.0}};
    for (const auto& [t, w] : set.vectors["d1"]) {
        (void)w;
        set.vocabulary.insert(t);
    }
    std::ostringstream out;
    write_sparse_vectors(out, set);
    CHECK(parse_vectors(out.str()) == set);
}

TEST_CASE("embedding binary container round trips") {
    testgen::Rng rng(7003);
    EmbeddingSet set = testgen::random_embedding_set(rng, 50, 8, 6);
    std::ostringstream out;
    write_embedding_set(out, set);
    std::istringstream in(out.str());
    EmbeddingSet back = load_embedding_set(in);
    CHECK(back == set);
}

TEST_CASE("embedding text form parses and round trips") {
    std::istringstream in("dim 2\nd1\t[[1, 0]]\n");
    EmbeddingSet set = load_embedding_set(in);
    CHECK(set.dim == 2);
    REQUIRE(set.matrices.at("d1").rows() == 1);
    CHECK(set.matrices.at("d1").data == std::vector<float>{1.0f, 0.0f});

    testgen::Rng rng(7004);
    EmbeddingSet random = testgen::random_embedding_set(rng, 20, 4, 5);
    std::ostringstream out;
    write_embedding_set_text(out, random);
    std::istringstream back_in(out.str());
    CHECK(load_embedding_set(back_in) == random);
}

TEST_CASE("embedding shape and domain errors") {
    std::istringstream ragged("dim 2\nd1\t[[1, 0, 3]]\n");
    CHECK_THROWS_AS(load_embedding_set(ragged), ShapeError);
    std::istringstream empty("dim 2\nd1\t[]\n");
    CHECK_THROWS_AS(load_embedding_set(empty), DomainError);
    std::istringstream noheader("d1\t[[1, 0]]\n");
    CHECK_THROWS_AS(load_embedding_set(noheader), ParseError);

    EmbeddingSet set;
    set.dim = 2;
    TokenMatrix zero_rows;
    zero_rows.dim = 2;
    set.matrices["d1"] = zero_rows;
    std::ostringstream out;
    CHECK_THROWS_AS(write_embedding_set(out, set), DomainError);
}

TEST_CASE("rerank score files parse") {
    std::istringstream in("q1 d1 3.25\nq1 d2 -1\nq2 d1 0.5\n");
    RerankScores rr = parse_rerank_scores(in);
    CHECK(rr.scores.at("q1").at("d1") == 3.25);
    CHECK(rr.scores.at("q1").at("d2") == -1.0);
    CHECK(rr.scores.at("q2").at("d1") == 0.5);

    std::istringstream dup("q1 d1 1\nq1 d1 2\n");
    CHECK_THROWS_AS(parse_rerank_scores(dup), DuplicateError);
    std::istringstream bad("q1 d1\n");
    CHECK_THROWS_AS(parse_rerank_scores(bad), ParseError);
}

TEST_CASE("id lists skip comments and blanks") {
    std::istringstream in("# collection\nd1\n\nd2\nd1\n");
    auto ids = load_id_list(in);
    CHECK(ids == std::set<std::string>{"d1", "d2"});
}

}  // TEST_SUITE
