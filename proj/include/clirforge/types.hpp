#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace clirforge {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input; carries a 1-based line number when one applies.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what), line_(0) {}
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// One scored document of a ranked list. The query id is the key in
/// Run::lists and the run tag lives on the Run.
struct RunRecord {
    std::string doc_id;
    double score = 0.0;
    int rank = 0;  // 1-based

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Per-query ranked lists. parse_trec_run and the fusion operations store
/// lists in canonical order: score descending, doc_id descending on ties,
/// ranks contiguous from 1. Retrieval emits ascending-doc_id ties instead;
/// evaluation re-sorts canonically before scoring.
struct Run {
    std::string tag;
    std::map<std::string, std::vector<RunRecord>> lists;

    friend bool operator==(const Run&, const Run&) = default;
};

/// Relevance judgments: query -> doc -> integer grade >= 0.
struct Qrels {
    std::map<std::string, std::map<std::string, int>> judgments;

    friend bool operator==(const Qrels&, const Qrels&) = default;
};

/// Term -> weight; weights are finite and > 0, zero entries are not stored.
using SparseVector = std::map<std::string, double>;

struct SparseVectorSet {
    std::map<std::string, SparseVector> vectors;
    std::set<std::string> vocabulary;

    friend bool operator==(const SparseVectorSet&, const SparseVectorSet&) = default;
};

/// Row-major token embedding matrix, one row per token, 32-bit entries.
struct TokenMatrix {
    std::size_t dim = 0;
    std::vector<float> data;

    std::size_t rows() const { return dim == 0 ? 0 : data.size() / dim; }
    const float* row(std::size_t i) const { return data.data() + i * dim; }

    friend bool operator==(const TokenMatrix&, const TokenMatrix&) = default;
};

struct EmbeddingSet {
    std::uint32_t dim = 0;
    std::map<std::string, TokenMatrix> matrices;

    friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

/// Externally produced cross-encoder scores over a candidate run.
struct RerankScores {
    std::map<std::string, std::map<std::string, double>> scores;  // qid -> doc -> score
    std::size_t depth = 1000;
};

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

}  // namespace clirforge
