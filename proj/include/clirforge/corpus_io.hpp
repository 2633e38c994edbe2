#pragma once

#include <iosfwd>
#include <set>
#include <string>

#include "clirforge/types.hpp"

namespace clirforge {

/// Shortest decimal form that parses back to exactly the same double.
std::string format_score(double v);

/// Sort every list by (score desc, doc_id desc) and rewrite ranks 1..n.
void canonicalize(Run& run);

// TREC run format: `qid Q0 docid rank score tag`, whitespace separated.
// Parsing regroups by query, re-sorts canonically and rewrites ranks; the
// input rank column is validated but otherwise ignored.
Run parse_trec_run(std::istream& in);
void write_trec_run(std::ostream& out, const Run& run, const std::string& tag);
inline void write_trec_run(std::ostream& out, const Run& run) { write_trec_run(out, run, run.tag); }

// Qrels: `qid iter docid grade`; the iteration column is ignored.
Qrels parse_qrels(std::istream& in);
void write_qrels(std::ostream& out, const Qrels& qrels);

// Sparse vectors: one record per line, `id<TAB>{"term": weight, ...}`.
// Weights must be finite and non-negative; zero weights are dropped.
SparseVectorSet load_sparse_vectors(std::istream& in);
void write_sparse_vectors(std::ostream& out, const SparseVectorSet& set);

// Token embeddings. Binary container: magic "NCEM", u32 dim, then per
// record a length-prefixed id, u32 token count and row-major f32 entries,
// all little endian. A stream that does not start with the magic is read
// in the text debug form: a `dim <d>` header line, then `id<TAB>[[...],...]`
// with one row array per token.
EmbeddingSet load_embedding_set(std::istream& in);
void write_embedding_set(std::ostream& out, const EmbeddingSet& set);
void write_embedding_set_text(std::ostream& out, const EmbeddingSet& set);

// Reranker scores: `qid docid score`, one triple per line.
RerankScores parse_rerank_scores(std::istream& in);

// Document-id lists: one id per line; `#` lines and blanks are skipped.
std::set<std::string> load_id_list(std::istream& in);
void write_id_list(std::ostream& out, const std::set<std::string>& ids);

// File wrappers. Open/parse failures surface as Error with the path in the
// message.
Run read_run_file(const std::string& path);
void write_run_file(const std::string& path, const Run& run);
void write_run_file(const std::string& path, const Run& run, const std::string& tag);
Qrels read_qrels_file(const std::string& path);
void write_qrels_file(const std::string& path, const Qrels& qrels);
SparseVectorSet read_sparse_vectors_file(const std::string& path);
void write_sparse_vectors_file(const std::string& path, const SparseVectorSet& set);
EmbeddingSet read_embedding_file(const std::string& path);
void write_embedding_file(const std::string& path, const EmbeddingSet& set);
RerankScores read_rerank_scores_file(const std::string& path);
std::set<std::string> read_id_list_file(const std::string& path);
void write_id_list_file(const std::string& path, const std::set<std::string>& ids);

}  // namespace clirforge
