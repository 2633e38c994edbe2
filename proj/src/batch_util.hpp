#pragma once

#include <string>
#include <vector>

#include "clirforge/types.hpp"

namespace clirforge {

inline Run assemble_run(const std::string& tag, const std::vector<std::string>& qids,
                        std::vector<std::vector<ScoredDoc>>& results) {
    Run run;
    run.tag = tag;
    for (std::size_t i = 0; i < qids.size(); ++i) {
        if (results[i].empty()) continue;
        auto& list = run.lists[qids[i]];
        list.reserve(results[i].size());
        int rank = 1;
        for (auto& sd : results[i]) list.push_back({std::move(sd.doc_id), sd.score, rank++});
    }
    return run;
}

}  // namespace clirforge
