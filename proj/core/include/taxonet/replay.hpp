#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taxonet/eval.hpp"
#include "taxonet/protocol.hpp"

namespace taxonet {

enum class EvalMode { Direct, Rewrite };

/// One processed message of a single-source replay: what came in, what went
/// out, and the query-program note when bookkeeping changed without output.
struct ReplayRow {
    std::string incoming;
    std::vector<std::string> generated;
    std::uint64_t program_of = 0;  // display serial, 0 when no program note
    std::string program;
};

struct ReplayResult {
    std::vector<ReplayRow> rows;
    std::vector<std::string> messages;  // all emitted messages, emission order
    AnswerSet answer;                   // direct mode
    RewritePtr rewrite;                 // rewrite mode, fully materialized
    std::string final_payload;          // last tell's payload rendering
};

/// Runs the cache-less ask/tell engine on one source: asks expand
/// breadth-first (FIFO), then pending tells resolve deepest sub-query
/// first. Sub-queries are numbered from the root in creation order.
ReplayResult replay(const Source& source, const NameTable& names, const Query& q,
                    EvalMode mode);

}  // namespace taxonet
