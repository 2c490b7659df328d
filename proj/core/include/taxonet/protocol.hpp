#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "taxonet/model.hpp"

namespace taxonet {

/// Identifier of a (sub)query. The creator of the id is recoverable (tells
/// route back to it); sub-query ids extend their parent's path with a fresh
/// per-creator serial.
struct QueryId {
    SourceId origin = 0;            // source that minted the last component
    std::uint64_t root_serial = 0;  // serial of the root query at its origin
    std::vector<std::uint32_t> path;

    bool is_root() const { return path.empty(); }
    /// Serial shown in traces: the most recently minted component.
    std::uint64_t display() const { return path.empty() ? root_serial : path.back(); }
    QueryId child(SourceId creator, std::uint32_t serial) const {
        QueryId c = *this;
        c.origin = creator;
        c.path.push_back(serial);
        return c;
    }
    auto operator<=>(const QueryId&) const = default;
};

/// Rewrite syntax tree. Completed rewrites contain only union,
/// intersection and term nodes; placeholders stand for still-open
/// sub-queries during assembly, and an empty atom replaces a sub-rewrite
/// lost to a timeout.
struct RewriteNode;
using RewritePtr = std::shared_ptr<const RewriteNode>;

struct RewriteNode {
    enum class Kind { Union, Intersection, Term, Placeholder, Empty };
    Kind kind = Kind::Empty;
    TermId term{};                    // Kind::Term
    std::uint64_t placeholder = 0;    // Kind::Placeholder
    std::vector<RewritePtr> children; // Union / Intersection

    static RewritePtr make_term(TermId t);
    static RewritePtr make_placeholder(std::uint64_t serial);
    static RewritePtr make_empty();
    static RewritePtr make_union(std::vector<RewritePtr> children);
    static RewritePtr make_intersection(std::vector<RewritePtr> children);
};

bool rewrite_equal(const RewritePtr& a, const RewritePtr& b);

/// Leaf terms of a completed rewrite (duplicates collapsed).
std::set<TermId> rewrite_leaves(const RewritePtr& root);

/// Replaces placeholder nodes via `bind`; nodes without a binding are kept.
RewritePtr substitute(const RewritePtr& root,
                      const std::map<std::uint64_t, RewritePtr>& bind);

/// Bottom-up set evaluation; `lookup` must cover every leaf term.
AnswerSet evaluate_rewrite(const RewritePtr& root,
                           const std::function<AnswerSet(TermId)>& lookup);

/// Text form: `t`, `R(n)`, `0`, `(e ∪ e …)`, `(e ∩ e …)`; the outermost
/// node is printed without parentheses. parse_rewrite accepts the same
/// grammar and round-trips linearize exactly.
std::string linearize(const RewritePtr& root, const NameTable& names);
RewritePtr parse_rewrite(std::string_view text, const TermResolver& resolve);

/// Direct-mode tell payloads: an object set, a rewrite fragment, or the
/// distinguished empty-and-not-cacheable marker.
struct Epsilon {
    auto operator<=>(const Epsilon&) const = default;
};
using TellPayload = std::variant<AnswerSet, Epsilon, RewritePtr>;

struct AskMessage {
    QueryId id;
    TermId term;
    std::vector<TermId> visited;  // path order, term last
};

struct TellMessage {
    QueryId id;
    TellPayload payload;
};

/// A call inside a query program: open (awaiting a sub-query) or closed
/// (payload recorded). A call closes exactly once.
struct Call {
    QueryId id;                           // set while open; kept for display
    std::optional<TellPayload> payload;   // set once closed

    bool open() const { return !payload.has_value(); }
};

/// Set of sub-programs tracking one in-flight evaluation; each sub-program
/// holds the calls of one hyperedge.
struct QueryProgram {
    std::vector<std::vector<Call>> sub_programs;
    std::uint32_t open_calls = 0;

    bool closed() const { return open_calls == 0; }
    std::string render(const NameTable& names) const;
};

QueryProgram make_program(const std::vector<std::vector<QueryId>>& groups);

struct StaleTell : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Closes the open call `id` with `payload`; throws StaleTell when no such
/// open call exists (duplicate or expired tell — callers drop the message).
void close_call(QueryProgram& qp, const QueryId& id, TellPayload payload);

/// Union over sub-programs of the intersection of their answer payloads.
/// Requires a closed program whose calls all carry answer sets.
AnswerSet compute_answer(const QueryProgram& qp);

/// Assembles the rewrite combination of a closed rewrite-mode program:
/// union over sub-programs of the intersection of the call fragments.
RewritePtr compute_rewrite(const QueryProgram& qp);

std::map<SourceId, std::set<TermId>> group_by_source(const std::set<TermId>& terms);

}  // namespace taxonet
