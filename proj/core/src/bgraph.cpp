#include "taxonet/bgraph.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cassert>
#include <deque>

namespace taxonet {

namespace {

bool edge_order(const Hyperedge& a, const Hyperedge& b) {
    if (a.tail.size() != b.tail.size()) return a.tail.size() < b.tail.size();
    if (a.tail != b.tail) return a.tail < b.tail;
    return a.head < b.head;
}

}  // namespace

void BGraph::add_edge(Hyperedge e) {
    assert(!e.tail.empty());
    std::sort(e.tail.begin(), e.tail.end());
    e.tail.erase(std::unique(e.tail.begin(), e.tail.end()), e.tail.end());
    edges_.push_back(std::move(e));
    finalized_ = false;
}

void BGraph::finalize() {
    if (finalized_) return;
    std::sort(edges_.begin(), edges_.end(), edge_order);
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    incoming_.clear();
    tail_uses_.clear();
    for (std::uint32_t i = 0; i < edges_.size(); ++i) {
        incoming_[edges_[i].head].push_back(i);
        for (TermId t : edges_[i].tail) tail_uses_[t].push_back(i);
    }
    finalized_ = true;
}

const std::vector<std::uint32_t>& BGraph::incoming(TermId n) const {
    static const std::vector<std::uint32_t> kNone;
    assert(finalized_);
    auto it = incoming_.find(n);
    return it == incoming_.end() ? kNone : it->second;
}

const std::vector<std::uint32_t>& BGraph::tail_uses(TermId n) const {
    static const std::vector<std::uint32_t> kNone;
    assert(finalized_);
    auto it = tail_uses_.find(n);
    return it == tail_uses_.end() ? kNone : it->second;
}

BGraph taxonomy_graph(const Taxonomy& tax, const std::set<SubsumptionPair>& articulations) {
    BGraph g;
    for (const auto& p : tax.pairs) g.add_edge(Hyperedge{p.tail.terms(), p.head});
    for (const auto& p : articulations) g.add_edge(Hyperedge{p.tail.terms(), p.head});
    g.finalize();
    return g;
}

BGraph taxonomy_graph(const Source& source) {
    return taxonomy_graph(source.taxonomy, source.articulations);
}

BGraph object_graph(const Source& source, ObjectId o) {
    BGraph g = taxonomy_graph(source);
    for (TermId u : index_of(source, o)) g.add_edge(Hyperedge{{kTrueNode}, u});
    g.finalize();
    return g;
}

std::set<TermId> b_connected_set(const BGraph& g) {
    std::size_t fired = 0;
    std::set<TermId> marked{kTrueNode};
    std::vector<std::size_t> missing(g.edges().size());
    std::deque<TermId> frontier{kTrueNode};
    for (std::size_t i = 0; i < g.edges().size(); ++i)
        missing[i] = g.edges()[i].tail.size();
    while (!frontier.empty()) {
        TermId n = frontier.front();
        frontier.pop_front();
        for (std::uint32_t ei : g.tail_uses(n)) {
            if (--missing[ei] == 0) {
                ++fired;
                TermId head = g.edges()[ei].head;
                if (marked.insert(head).second) frontier.push_back(head);
            }
        }
    }
    (void)fired;
    marked.erase(kTrueNode);
    return marked;
}

bool b_connected(const BGraph& g, TermId target, std::size_t* fired_out) {
    if (target == kTrueNode) {
        if (fired_out) *fired_out = 0;
        return true;
    }
    std::size_t fired = 0;
    std::set<TermId> marked{kTrueNode};
    std::vector<std::size_t> missing(g.edges().size());
    std::deque<TermId> frontier{kTrueNode};
    for (std::size_t i = 0; i < g.edges().size(); ++i)
        missing[i] = g.edges()[i].tail.size();
    bool found = false;
    while (!frontier.empty()) {
        TermId n = frontier.front();
        frontier.pop_front();
        for (std::uint32_t ei : g.tail_uses(n)) {
            if (--missing[ei] == 0) {
                ++fired;
                TermId head = g.edges()[ei].head;
                if (marked.insert(head).second) {
                    if (head == target) found = true;
                    frontier.push_back(head);
                }
            }
        }
    }
    if (fired_out) *fired_out = fired;
    return found;
}

namespace {

struct PathCounter {
    const BGraph& g;
    TermId to;
    std::uint64_t bound;
    std::uint64_t count = 0;
    std::vector<bool> used;

    // Enumerates edge sequences chained head-to-tail; every arrival at `to`
    // completes one path, and the walk continues through it since simple
    // paths may revisit vertices (only edges are consumed).
    void walk(TermId at, std::size_t depth) {
        if (count >= bound) return;
        for (std::uint32_t ei : g.tail_uses(at)) {
            if (used[ei]) continue;
            const Hyperedge& e = g.edges()[ei];
            // A path whose first tail contains the endpoint is a cycle.
            if (depth == 0 && std::binary_search(e.tail.begin(), e.tail.end(), to))
                continue;
            used[ei] = true;
            if (e.head == to) ++count;
            if (count >= bound) {
                used[ei] = false;
                return;
            }
            walk(e.head, depth + 1);
            used[ei] = false;
        }
    }
};

}  // namespace

std::uint64_t count_simple_paths(const BGraph& g, TermId from, TermId to,
                                 std::uint64_t bound) {
    PathCounter pc{g, to, bound};
    pc.used.assign(g.edges().size(), false);
    pc.walk(from, 0);
    return std::min(pc.count, bound);
}

std::string to_dot(const BGraph& g, const NameTable& names) {
    std::string out = "digraph bgraph {\n  rankdir=BT;\n";
    std::set<TermId> nodes;
    for (const auto& e : g.edges()) {
        nodes.insert(e.head);
        nodes.insert(e.tail.begin(), e.tail.end());
    }
    for (TermId n : nodes)
        out += fmt::format("  \"{}\";\n", names.term_name(n));
    int junction = 0;
    for (const auto& e : g.edges()) {
        if (e.tail.size() == 1) {
            out += fmt::format("  \"{}\" -> \"{}\";\n", names.term_name(e.tail[0]),
                               names.term_name(e.head));
        } else {
            std::string j = fmt::format("j{}", junction++);
            out += fmt::format("  {} [shape=point];\n", j);
            for (TermId t : e.tail)
                out += fmt::format("  \"{}\" -> {} [arrowhead=none];\n",
                                   names.term_name(t), j);
            out += fmt::format("  {} -> \"{}\";\n", j, names.term_name(e.head));
        }
    }
    out += "}\n";
    return out;
}

}  // namespace taxonet
