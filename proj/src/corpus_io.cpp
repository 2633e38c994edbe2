#include "clirforge/corpus_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_set>

#include "json.hpp"

namespace clirforge {

namespace {

bool is_blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.emplace_back(line, i, j - i);
        i = j;
    }
    return out;
}

bool parse_full(const std::string& tok, double& out) {
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && p == tok.data() + tok.size();
}

bool parse_full(const std::string& tok, long& out) {
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && p == tok.data() + tok.size();
}

std::string json_quote(const std::string& s) { return nlohmann::json(s).dump(); }

// SAX handler for one sparse-vector record: a flat JSON object mapping
// terms to non-negative numbers. Rejects nesting, non-numeric values and
// repeated keys, which a DOM parse would silently collapse.
struct WeightObjectSax {
    SparseVector& vec;
    std::size_t lineno;
    std::set<std::string> seen;
    std::string current_key;
    int depth = 0;

    bool add(double w) {
        if (depth != 1) throw ParseError("expected a JSON object of term weights", lineno);
        if (!std::isfinite(w)) throw DomainError("non-finite weight for term '" + current_key + "'");
        if (w < 0.0)
            throw DomainError("negative weight " + format_score(w) + " for term '" + current_key + "'");
        if (w > 0.0) vec.emplace(current_key, w);
        return true;
    }

    bool null() { throw ParseError("weight must be a number", lineno); }
    bool boolean(bool) { throw ParseError("weight must be a number", lineno); }
    bool number_integer(std::int64_t v) { return add(static_cast<double>(v)); }
    bool number_unsigned(std::uint64_t v) { return add(static_cast<double>(v)); }
    bool number_float(double v, const std::string&) { return add(v); }
    bool string(std::string&) { throw ParseError("weight must be a number", lineno); }
    bool binary(nlohmann::json::binary_t&) { throw ParseError("weight must be a number", lineno); }
    bool start_object(std::size_t) {
        if (++depth > 1) throw ParseError("expected a flat JSON object of term weights", lineno);
        return true;
    }
    bool key(std::string& k) {
        if (!seen.insert(k).second)
            throw DuplicateError("line " + std::to_string(lineno) + ": repeated term '" + k + "'");
        current_key = k;
        return true;
    }
    bool end_object() {
        --depth;
        return true;
    }
    bool start_array(std::size_t) { throw ParseError("expected a JSON object of term weights", lineno); }
    bool end_array() { return true; }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
        throw ParseError(std::string("bad JSON: ") + ex.what(), lineno);
    }
};

void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

bool read_u32(std::istream& in, std::uint32_t& v) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) return false;
    v = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
        std::uint32_t(b[3]) << 24;
    return true;
}

EmbeddingSet load_embeddings_binary(std::istream& in) {
    EmbeddingSet set;
    std::uint32_t dim = 0;
    if (!read_u32(in, dim)) throw ParseError("truncated embedding container header");
    if (dim == 0) throw DomainError("embedding dimension must be positive");
    set.dim = dim;
    for (;;) {
        std::uint32_t id_len = 0;
        if (!read_u32(in, id_len)) {
            if (in.gcount() == 0) break;  // clean end between records
            throw ParseError("truncated embedding record");
        }
        std::string id(id_len, '\0');
        in.read(id.data(), static_cast<std::streamsize>(id_len));
        if (in.gcount() != static_cast<std::streamsize>(id_len))
            throw ParseError("truncated embedding record id");
        std::uint32_t tokens = 0;
        if (!read_u32(in, tokens)) throw ParseError("truncated embedding record '" + id + "'");
        if (tokens == 0) throw DomainError("record '" + id + "' has zero tokens");
        TokenMatrix m;
        m.dim = dim;
        m.data.resize(static_cast<std::size_t>(tokens) * dim);
        auto bytes = static_cast<std::streamsize>(m.data.size() * sizeof(float));
        in.read(reinterpret_cast<char*>(m.data.data()), bytes);
        if (in.gcount() != bytes) throw ParseError("truncated embedding matrix for '" + id + "'");
        for (float v : m.data)
            if (!std::isfinite(v)) throw DomainError("non-finite entry in record '" + id + "'");
        if (!set.matrices.emplace(std::move(id), std::move(m)).second)
            throw DuplicateError("duplicate embedding id");
    }
    return set;
}

EmbeddingSet load_embeddings_text(std::istream& in) {
    EmbeddingSet set;
    std::string line;
    std::size_t lineno = 0;
    bool have_dim = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;
        if (!have_dim) {
            auto cols = split_ws(line);
            long dim = 0;
            if (cols.size() != 2 || cols[0] != "dim" || !parse_full(cols[1], dim) || dim < 1)
                throw ParseError("expected header `dim <d>`", lineno);
            set.dim = static_cast<std::uint32_t>(dim);
            have_dim = true;
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw ParseError("expected `id<TAB>[[row], ...]`", lineno);
        std::string id = line.substr(0, tab);
        nlohmann::json rows;
        try {
            rows = nlohmann::json::parse(line.substr(tab + 1));
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError(std::string("bad JSON: ") + ex.what(), lineno);
        }
        if (!rows.is_array()) throw ParseError("expected a JSON array of rows", lineno);
        if (rows.empty()) throw DomainError("record '" + id + "' has zero tokens");
        TokenMatrix m;
        m.dim = set.dim;
        m.data.reserve(rows.size() * set.dim);
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != set.dim)
                throw ShapeError("record '" + id + "': row has " +
                                 std::to_string(row.is_array() ? row.size() : 0) +
                                 " entries, expected " + std::to_string(set.dim));
            for (const auto& cell : row) {
                if (!cell.is_number()) throw ParseError("matrix entry must be a number", lineno);
                double v = cell.get<double>();
                if (!std::isfinite(v)) throw DomainError("non-finite entry in record '" + id + "'");
                m.data.push_back(static_cast<float>(v));
            }
        }
        if (!set.matrices.emplace(std::move(id), std::move(m)).second)
            throw DuplicateError("line " + std::to_string(lineno) + ": duplicate embedding id");
    }
    if (!have_dim) throw ParseError("missing `dim <d>` header");
    return set;
}

template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    return f;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot create " + path);
    return f;
}

void finish_out(std::ofstream& f, const std::string& path) {
    f.flush();
    if (!f) throw Error("write failed for " + path);
}

}  // namespace

std::string format_score(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void canonicalize(Run& run) {
    for (auto& [qid, list] : run.lists) {
        std::sort(list.begin(), list.end(), [](const RunRecord& a, const RunRecord& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.doc_id > b.doc_id;
        });
        int rank = 1;
        for (auto& rec : list) rec.rank = rank++;
    }
}

Run parse_trec_run(std::istream& in) {
    Run run;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;
        auto cols = split_ws(line);
        if (cols.size() != 6)
            throw ParseError("expected 6 columns, got " + std::to_string(cols.size()), lineno);
        long rank = 0;
        double score = 0.0;
        if (!parse_full(cols[3], rank)) throw ParseError("non-numeric rank '" + cols[3] + "'", lineno);
        if (!parse_full(cols[4], score)) throw ParseError("non-numeric score '" + cols[4] + "'", lineno);
        if (!std::isfinite(score)) throw ParseError("non-finite score", lineno);
        if (!seen.insert(cols[0] + '\x1f' + cols[2]).second)
            throw DuplicateError("duplicate (query, document) pair (" + cols[0] + ", " + cols[2] + ")");
        if (run.tag.empty()) run.tag = cols[5];
        run.lists[cols[0]].push_back({cols[2], score, static_cast<int>(rank)});
    }
    canonicalize(run);
    return run;
}

void write_trec_run(std::ostream& out, const Run& run, const std::string& tag) {
    for (const auto& [qid, list] : run.lists)
        for (const auto& rec : list)
            out << qid << " Q0 " << rec.doc_id << ' ' << rec.rank << ' ' << format_score(rec.score)
                << ' ' << tag << '\n';
}

Qrels parse_qrels(std::istream& in) {
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;
        auto cols = split_ws(line);
        if (cols.size() != 4)
            throw ParseError("expected 4 columns, got " + std::to_string(cols.size()), lineno);
        long grade = 0;
        if (!parse_full(cols[3], grade)) throw ParseError("non-numeric grade '" + cols[3] + "'", lineno);
        if (grade < 0)
            throw DomainError("negative grade for (" + cols[0] + ", " + cols[2] + ")");
        if (!qrels.judgments[cols[0]].emplace(cols[2], static_cast<int>(grade)).second)
            throw DuplicateError("duplicate judgment (" + cols[0] + ", " + cols[2] + ")");
    }
    return qrels;
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
    for (const auto& [qid, docs] : qrels.judgments)
        for (const auto& [doc, grade] : docs) out << qid << " 0 " << doc << ' ' << grade << '\n';
}

SparseVectorSet load_sparse_vectors(std::istream& in) {
    SparseVectorSet set;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw ParseError("expected `id<TAB>{json object}`", lineno);
        std::string id = line.substr(0, tab);
        if (set.vectors.count(id))
            throw DuplicateError("line " + std::to_string(lineno) + ": duplicate vector id '" + id + "'");
        SparseVector vec;
        WeightObjectSax sax{vec, lineno, {}, {}, 0};
        std::string_view body(line.data() + tab + 1, line.size() - tab - 1);
        nlohmann::json::sax_parse(body, &sax);
        for (const auto& [term, w] : vec) {
            (void)w;
            set.vocabulary.insert(term);
        }
        set.vectors.emplace(std::move(id), std::move(vec));
    }
    return set;
}

void write_sparse_vectors(std::ostream& out, const SparseVectorSet& set) {
    for (const auto& [id, vec] : set.vectors) {
        out << id << '\t' << '{';
        bool first = true;
        for (const auto& [term, w] : vec) {
            if (!first) out << ',';
            first = false;
            out << json_quote(term) << ':' << format_score(w);
        }
        out << "}\n";
    }
}

EmbeddingSet load_embedding_set(std::istream& in) {
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, "NCEM", 4) == 0) return load_embeddings_binary(in);
    in.clear();
    in.seekg(0);
    return load_embeddings_text(in);
}

void write_embedding_set(std::ostream& out, const EmbeddingSet& set) {
    if (set.dim == 0) throw DomainError("embedding dimension must be positive");
    out.write("NCEM", 4);
    write_u32(out, set.dim);
    for (const auto& [id, m] : set.matrices) {
        if (m.dim != set.dim) throw ShapeError("record '" + id + "' does not match set dimension");
        if (m.rows() == 0) throw DomainError("record '" + id + "' has zero tokens");
        write_u32(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        write_u32(out, static_cast<std::uint32_t>(m.rows()));
        out.write(reinterpret_cast<const char*>(m.data.data()),
                  static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    }
}

void write_embedding_set_text(std::ostream& out, const EmbeddingSet& set) {
    if (set.dim == 0) throw DomainError("embedding dimension must be positive");
    out << "dim " << set.dim << '\n';
    for (const auto& [id, m] : set.matrices) {
        if (m.dim != set.dim) throw ShapeError("record '" + id + "' does not match set dimension");
        if (m.rows() == 0) throw DomainError("record '" + id + "' has zero tokens");
        out << id << '\t' << '[';
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i) out << ',';
            out << '[';
            const float* row = m.row(i);
            for (std::size_t e = 0; e < m.dim; ++e) {
                if (e) out << ',';
                char buf[48];
                auto res = std::to_chars(buf, buf + sizeof buf, row[e]);
                out.write(buf, res.ptr - buf);
            }
            out << ']';
        }
        out << "]\n";
    }
}

RerankScores parse_rerank_scores(std::istream& in) {
    RerankScores rr;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;
        auto cols = split_ws(line);
        if (cols.size() != 3)
            throw ParseError("expected 3 columns, got " + std::to_string(cols.size()), lineno);
        double score = 0.0;
        if (!parse_full(cols[2], score)) throw ParseError("non-numeric score '" + cols[2] + "'", lineno);
        if (!std::isfinite(score)) throw ParseError("non-finite score", lineno);
        if (!rr.scores[cols[0]].emplace(cols[1], score).second)
            throw DuplicateError("duplicate score for (" + cols[0] + ", " + cols[1] + ")");
    }
    return rr;
}

std::set<std::string> load_id_list(std::istream& in) {
    std::set<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (is_blank(line)) continue;
        auto cols = split_ws(line);
        if (cols.empty() || cols[0][0] == '#') continue;
        ids.insert(cols[0]);
    }
    return ids;
}

void write_id_list(std::ostream& out, const std::set<std::string>& ids) {
    for (const auto& id : ids) out << id << '\n';
}

Run read_run_file(const std::string& path) {
    return with_path(path, [&] {
        auto f = open_in(path);
        return parse_trec_run(f);
    });
}

void write_run_file(const std::string& path, const Run& run) { write_run_file(path, run, run.tag); }

void write_run_file(const std::string& path, const Run& run, const std::string& tag) {
    with_path(path, [&] {
        auto f = open_out(path);
        write_trec_run(f, run, tag);
        finish_out(f, path);
    });
}

Qrels read_qrels_file(const std::string& path) {
    return with_path(path, [&] {
        auto f = open_in(path);
        return parse_qrels(f);
    });
}

void write_qrels_file(const std::string& path, const Qrels& qrels) {
    with_path(path, [&] {
        auto f = open_out(path);
        write_qrels(f, qrels);
        finish_out(f, path);
    });
}

SparseVectorSet read_sparse_vectors_file(const std::string& path) {
    return with_path(path, [&] {
        auto f = open_in(path);
        return load_sparse_vectors(f);
    });
}

void write_sparse_vectors_file(const std::string& path, const SparseVectorSet& set) {
    with_path(path, [&] {
        auto f = open_out(path);
        write_sparse_vectors(f, set);
        finish_out(f, path);
    });
}

EmbeddingSet read_embedding_file(const std::string& path) {
    return with_path(path, [&] {
        auto f = open_in(path);
        return load_embedding_set(f);
    });
}

void write_embedding_file(const std::string& path, const EmbeddingSet& set) {
    with_path(path, [&] {
        auto f = open_out(path);
        write_embedding_set(f, set);
        finish_out(f, path);
    });
}

RerankScores read_rerank_scores_file(const std::string& path) {
    return with_path(path, [&] {
        auto f = open_in(path);
        return parse_rerank_scores(f);
    });
}

std::set<std::string> read_id_list_file(const std::string& path) {
    return with_path(path, [&] {
        auto f = open_in(path);
        return load_id_list(f);
    });
}

void write_id_list_file(const std::string& path, const std::set<std::string>& ids) {
    with_path(path, [&] {
        auto f = open_out(path);
        write_id_list(f, ids);
        finish_out(f, path);
    });
}

}  // namespace clirforge
