#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "clirforge/types.hpp"

namespace clirforge {

struct InputSpec {
    std::string path;
    std::string kind;  // sparse-vectors, embeddings, token-counts, run,
                       // rerank-scores, qrels, collection-ids
};

struct StageSpec {
    std::string op;  // index, retrieve, bm25-weigh, prf-retrieve,
                     // late-retrieve, fuse, rerank-merge, eval, filter-dev
    std::string output_tag;
    nlohmann::json params = nlohmann::json::object();
};

struct PipelineConfig {
    std::string language;
    std::filesystem::path base_dir;    // directory the config was loaded from;
                                       // relative input paths resolve here
    std::filesystem::path output_dir;  // also resolved against base_dir
    std::map<std::string, InputSpec> inputs;
    std::vector<StageSpec> stages;
};

struct Diagnostic {
    std::string stage;  // empty for config-level problems
    std::string message;
};

/// Parses the JSON config and expands `{language}` in paths, tags and
/// string parameters.
PipelineConfig load_pipeline_config(const std::string& path);

/// Empty result means the config is executable: every reference resolves
/// to a declared input or stage output of a compatible kind, parameters
/// typecheck, output tags are unique and the stage graph is acyclic.
std::vector<Diagnostic> validate_config(const PipelineConfig& config);

/// Executes stages in dependency order; declaration order never changes
/// the outputs. Every produced artifact lands in output_dir and a manifest
/// with per-stage parameters and content digests is written last. Reruns
/// over identical inputs are byte-identical. Returns output_tag -> path.
std::map<std::string, std::string> run_pipeline(const PipelineConfig& config);

}  // namespace clirforge
