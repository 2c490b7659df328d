#include "taxonet/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cassert>
#include <deque>
#include <optional>

namespace taxonet {

std::string EvalTrace::render(const NameTable& names) const {
    std::string out;
    for (const auto& c : calls) {
        out += names.term_name(c.term);
        out += " {";
        for (std::size_t i = 0; i < c.path.size(); ++i) {
            if (i) out += ',';
            out += names.term_name(c.path[i]);
        }
        out += c.pruned ? "} *\n" : "}\n";
    }
    return out;
}

namespace {

// Worklist form of the recursive evaluation. Each pending call owns one
// slot in its parent's combination; a parent completes when all slots of
// all its edge groups are filled.
struct Call {
    TermId term;
    std::vector<TermId> path;
    std::uint32_t parent = UINT32_MAX;  // index into calls
    std::uint32_t group = 0;            // which edge group of the parent
    // Per eligible edge: the pending/filled results of its tail calls.
    std::vector<std::vector<std::optional<AnswerSet>>> groups;
    std::vector<std::uint32_t> group_pending;
    std::uint32_t open = 0;  // total pending slots
    AnswerSet base;          // I(term)
    std::uint32_t slot = 0;  // position inside the parent group
};

struct Engine {
    const BGraph& graph;
    const Interpretation& interp;
    EvalTrace* trace;
    std::vector<Call> calls;
    std::deque<std::uint32_t> frontier;
    std::uint64_t set_ops = 0;

    AnswerSet run(TermId root) {
        spawn(root, {root}, UINT32_MAX, 0, 0);
        std::optional<AnswerSet> result;
        while (!frontier.empty()) {
            std::uint32_t ci = frontier.front();
            frontier.pop_front();
            expand(ci, result);
        }
        assert(result.has_value());
        if (trace) trace->set_ops = set_ops;
        return *result;
    }

    void spawn(TermId term, std::vector<TermId> path, std::uint32_t parent,
               std::uint32_t group, std::uint32_t slot) {
        Call c;
        c.term = term;
        c.path = std::move(path);
        c.parent = parent;
        c.group = group;
        c.slot = slot;
        calls.push_back(std::move(c));
        frontier.push_back(static_cast<std::uint32_t>(calls.size() - 1));
    }

    void expand(std::uint32_t ci, std::optional<AnswerSet>& result) {
        bool pruned = false;
        std::vector<const Hyperedge*> eligible;
        for (std::uint32_t ei : graph.incoming(calls[ci].term)) {
            const Hyperedge& e = graph.edges()[ei];
            bool blocked = std::any_of(e.tail.begin(), e.tail.end(), [&](TermId t) {
                return std::find(calls[ci].path.begin(), calls[ci].path.end(), t) !=
                       calls[ci].path.end();
            });
            if (blocked)
                pruned = true;
            else
                eligible.push_back(&e);
        }
        if (trace) trace->calls.push_back({calls[ci].term, calls[ci].path, pruned});
        calls[ci].base = interp.extent(calls[ci].term);
        if (eligible.empty()) {
            complete(ci, calls[ci].base, result);
            return;
        }
        calls[ci].groups.resize(eligible.size());
        calls[ci].group_pending.resize(eligible.size());
        for (std::size_t gi = 0; gi < eligible.size(); ++gi) {
            const auto& tail = eligible[gi]->tail;
            calls[ci].groups[gi].resize(tail.size());
            calls[ci].group_pending[gi] = static_cast<std::uint32_t>(tail.size());
            calls[ci].open += static_cast<std::uint32_t>(tail.size());
        }
        // Children are queued after the bookkeeping above: expansion may
        // recurse into this call's own slots once the frontier drains.
        for (std::size_t gi = 0; gi < eligible.size(); ++gi) {
            for (std::size_t si = 0; si < eligible[gi]->tail.size(); ++si) {
                TermId u = eligible[gi]->tail[si];
                std::vector<TermId> child_path = calls[ci].path;
                child_path.push_back(u);
                spawn(u, std::move(child_path), ci, static_cast<std::uint32_t>(gi),
                      static_cast<std::uint32_t>(si));
            }
        }
    }

    void complete(std::uint32_t ci, AnswerSet value, std::optional<AnswerSet>& result) {
        for (;;) {
            std::uint32_t parent = calls[ci].parent;
            if (parent == UINT32_MAX) {
                result = std::move(value);
                return;
            }
            Call& p = calls[parent];
            p.groups[calls[ci].group][calls[ci].slot] = std::move(value);
            --p.group_pending[calls[ci].group];
            if (--p.open > 0) return;
            // All slots filled: union of per-edge intersections over I(term).
            AnswerSet acc = p.base;
            for (auto& group : p.groups) {
                AnswerSet inter = *group[0];
                for (std::size_t i = 1; i < group.size(); ++i) {
                    inter = inter.intersected(*group[i]);
                    ++set_ops;
                }
                acc = acc.united(inter);
                ++set_ops;
            }
            value = std::move(acc);
            ci = parent;
        }
    }
};

}  // namespace

AnswerSet evaluate_term(const BGraph& graph, const Interpretation& interp,
                        TermId term, EvalTrace* trace) {
    Engine engine{graph, interp, trace};
    return engine.run(term);
}

std::set<TermId> closure(const Source& source, ObjectId o) {
    std::set<TermId> derived = index_of(source, o);
    std::vector<const SubsumptionPair*> rules;
    for (const auto& p : source.taxonomy.pairs) rules.push_back(&p);
    for (const auto& p : source.articulations) rules.push_back(&p);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto* r : rules) {
            if (derived.count(r->head)) continue;
            bool all = std::all_of(r->tail.terms().begin(), r->tail.terms().end(),
                                   [&](TermId t) { return derived.count(t) > 0; });
            if (all) {
                derived.insert(r->head);
                changed = true;
            }
        }
    }
    return derived;
}

AnswerSet answer(const Source& source, const Query& q, EvalTrace* trace) {
    for (const auto& d : q.disjuncts)
        for (TermId t : d.terms())
            if (!source.taxonomy.terminology.count(t))
                throw std::invalid_argument("query uses a term outside the terminology");
    if (q.is_single_term()) {
        BGraph g = taxonomy_graph(source);
        return evaluate_term(g, source.interpretation, q.disjuncts[0].terms()[0], trace);
    }
    auto [overlay, fresh] = reduce_to_term_query(source, q);
    BGraph g = taxonomy_graph(overlay);
    return evaluate_term(g, overlay.interpretation, fresh, trace);
}

AnswerSet answer_oracle(const Source& source, const Query& q) {
    // Candidate objects: anything in some extent. Objects outside every
    // extent can never satisfy a positive query.
    std::set<ObjectId> universe;
    for (const auto& [t, ext] : source.interpretation.extents())
        for (ObjectId o : ext.objects()) universe.insert(o);
    AnswerSet out;
    for (ObjectId o : universe) {
        std::set<TermId> cl = closure(source, o);
        for (const auto& d : q.disjuncts) {
            bool all = std::all_of(d.terms().begin(), d.terms().end(),
                                   [&](TermId t) { return cl.count(t) > 0; });
            if (all) {
                out.insert(o);
                break;
            }
        }
    }
    return out;
}

}  // namespace taxonet
