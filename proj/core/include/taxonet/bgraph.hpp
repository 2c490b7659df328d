#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "taxonet/model.hpp"

namespace taxonet {

/// Directed hyperedge with a single-node head.
struct Hyperedge {
    std::vector<TermId> tail;  // sorted, non-empty
    TermId head;

    auto operator<=>(const Hyperedge&) const = default;
};

/// Directed B-hypergraph over terms plus the distinguished TRUE node.
/// Edges are kept in a canonical order (tail size, tail, head) so that
/// traversals and traces are reproducible.
class BGraph {
public:
    void add_edge(Hyperedge e);
    void finalize();  // sorts edges, builds indices; idempotent

    const std::vector<Hyperedge>& edges() const { return edges_; }
    /// Indices of edges whose head is `n`, in canonical order.
    const std::vector<std::uint32_t>& incoming(TermId n) const;
    /// Indices of edges whose tail contains `n`.
    const std::vector<std::uint32_t>& tail_uses(TermId n) const;

    std::size_t edge_count() const { return edges_.size(); }

private:
    std::vector<Hyperedge> edges_;
    std::map<TermId, std::vector<std::uint32_t>> incoming_;
    std::map<TermId, std::vector<std::uint32_t>> tail_uses_;
    bool finalized_ = false;
};

/// One hyperedge per simplified pair; articulations contribute alike.
BGraph taxonomy_graph(const Taxonomy& tax,
                      const std::set<SubsumptionPair>& articulations = {});
BGraph taxonomy_graph(const Source& source);

/// Taxonomy graph plus a ({TRUE}, u) edge for every u in the index of `o`.
BGraph object_graph(const Source& source, ObjectId o);

/// True iff `target` is B-connected to TRUE: forward marking from TRUE,
/// firing an edge once its whole tail is marked, to fixpoint. Linear in the
/// total edge size. `fired` (optional) reports how many edge firings ran.
bool b_connected(const BGraph& g, TermId target, std::size_t* fired = nullptr);

/// Marked set of the same fixpoint (every node B-connected to TRUE).
std::set<TermId> b_connected_set(const BGraph& g);

/// Number of cycle-free simple paths from `from` to `to`, saturating at
/// `bound`. Paths chain edges head-to-tail; "simple" means no edge repeats,
/// and paths whose first tail already contains `to` are cycles and excluded.
std::uint64_t count_simple_paths(const BGraph& g, TermId from, TermId to,
                                 std::uint64_t bound);

/// GraphViz rendering for debugging; hyperedges with multi-node tails are
/// drawn through a synthetic junction point.
std::string to_dot(const BGraph& g, const NameTable& names);

}  // namespace taxonet
