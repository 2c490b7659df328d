#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "taxonet/bgraph.hpp"
#include "taxonet/model.hpp"

namespace taxonet {

/// One evaluation call: the term, the path of terms from the root to it,
/// and whether any incoming hyperedge was skipped because its tail met the
/// path (cycle guard).
struct EvalCall {
    TermId term;
    std::vector<TermId> path;  // root first, `term` last
    bool pruned = false;
};

struct EvalTrace {
    std::vector<EvalCall> calls;
    std::uint64_t set_ops = 0;  // unions + intersections performed

    std::string render(const NameTable& names) const;
};

/// Recursive term evaluation over a taxonomy B-graph: the result for x is
/// I(x) joined with, for every incoming hyperedge whose tail avoids the
/// path, the intersection of the tail terms' recursive results. The path
/// grows monotonically, which bounds the recursion on cyclic taxonomies.
/// Calls are expanded breadth-first and recorded in expansion order.
AnswerSet evaluate_term(const BGraph& graph, const Interpretation& interp,
                        TermId term, EvalTrace* trace = nullptr);

/// Least fixpoint of the index of `o` under the source's subsumptions
/// (taxonomy plus articulations). Independent of the B-graph machinery:
/// iterates the raw pair set to saturation.
std::set<TermId> closure(const Source& source, ObjectId o);

/// Full query answer: reduce to a fresh term query, then evaluate it.
AnswerSet answer(const Source& source, const Query& q, EvalTrace* trace = nullptr);

/// Certain-answer check done per object: an object answers q iff some
/// disjunct has all its terms in the object's closure.
AnswerSet answer_oracle(const Source& source, const Query& q);

}  // namespace taxonet
