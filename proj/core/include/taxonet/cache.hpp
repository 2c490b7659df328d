#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "taxonet/protocol.hpp"

namespace taxonet {

enum class CacheState {
    Free,        // being evaluated, nobody depends on it
    Principal,   // being evaluated, has dependents
    Dependent,   // parked on another entry with the same expression
    Declined,    // own requester timed out; kept alive for dependents
    Closed,      // answered; cached for reuse until the cache timeout
    Total,       // sub-query whose answer is reusable once closed
    Partial,     // sub-query whose answer is path-dependent; never cached
    FreeRw,      // rewrite completed (or stage two running), no dependents
    PrincipalRw, // as FreeRw, with dependents
};

const char* to_string(CacheState s);

/// Expression key for reuse: disjuncts and terms are order-normalized, and
/// a one-disjunct/one-term query collapses to its term. Entries that track
/// a rewrite request live in a separate key space from answer-producing
/// entries with the same expression.
struct CanonicalExpr {
    std::vector<std::vector<TermId>> disjuncts;  // sorted inside and across
    bool rewrite_artifact = false;

    static CanonicalExpr for_term(TermId t);
    static CanonicalExpr for_query(const Query& q);
    static CanonicalExpr for_rewrite_of(const Query& q);
    bool is_term() const { return disjuncts.size() == 1 && disjuncts[0].size() == 1; }
    auto operator<=>(const CanonicalExpr&) const = default;
};

inline constexpr double kNeverExpires = std::numeric_limits<double>::infinity();

struct CacheEntry {
    QueryId id;
    CanonicalExpr exp;
    CacheState state = CacheState::Free;
    std::optional<QueryId> dep;           // set iff state == Dependent
    std::optional<TellPayload> answer;    // set iff Closed (or a cached rewrite)
    double timeout = kNeverExpires;       // virtual time
    double created = 0;
    std::optional<QueryProgram> qp;
    std::uint32_t open_calls = 0;
    bool rewriting = false;
    // A dormant entry holds a cached artifact with no evaluation in flight
    // (a reusable rewrite kept under FreeRw); sweep treats it like Closed.
    bool dormant = false;

    bool is_sub_query() const {
        return state == CacheState::Total || state == CacheState::Partial;
    }
};

struct AdmitDecision {
    enum class Kind { Evaluate, AnswerNow, Dependent } kind;
    std::optional<TellPayload> cached;  // AnswerNow
    std::optional<QueryId> depends_on;  // Dependent
};

struct Notification {
    QueryId entry;        // the entry the notification is for
    std::optional<TellPayload> payload;  // nullopt: timed out, no answer
};

struct SweepResult {
    std::vector<Notification> notifications;
    std::vector<QueryId> deletions;
    std::vector<QueryId> epsilon_tells;  // expired total/partial sub-queries
};

struct AnswerResult {
    std::vector<Notification> notifications;  // own entry first, dependents after
    std::vector<QueryId> deletions;
};

struct CacheStats {
    std::uint64_t hits = 0;
    std::uint64_t dependents_created = 0;
    std::uint64_t declines = 0;
    std::uint64_t epsilon_tells = 0;
};

/// Per-source query cache: lifecycle records for queries and sub-queries,
/// dependency coalescing, answer reuse and timeout management. Owned and
/// driven by exactly one source actor.
class QueryCache {
public:
    QueryCache(double answer_timeout, double cache_timeout)
        : t_a_(answer_timeout), t_c_(cache_timeout) {}

    double answer_timeout() const { return t_a_; }
    double cache_timeout() const { return t_c_; }

    /// Arrival of a fresh query `id` with expression `exp`.
    AdmitDecision admit(const QueryId& id, CanonicalExpr exp, double now);

    /// Creates the record of a sub-query launched by an expansion; callers
    /// pass the ask's visited-set size, which decides total vs partial.
    CacheEntry& create_sub_entry(const QueryId& id, TermId term,
                                 std::size_t visited_size, double now);

    /// Creates the root record of an evaluation started without admit()
    /// (e.g. a rewrite performed on behalf of a remote requester).
    CacheEntry& create_root_entry(const QueryId& id, CanonicalExpr exp, double now);

    /// Answer arrival for a query entry (free/principal/declined and their
    /// -rw variants): closes it and fans out to dependents. When
    /// `as_dormant_rewrite` is set the entry keeps the payload as a
    /// reusable rewrite under FreeRw instead of closing.
    AnswerResult on_answer(const QueryId& id, TellPayload payload, double now,
                           bool as_dormant_rewrite = false);

    /// Tell arrival for a sub-query entry: a total entry closes and caches
    /// the payload, anything else is deleted. Returns false if no entry.
    bool close_sub_entry(const QueryId& id, const TellPayload& payload, double now);

    /// Parks a cached artifact on the entry and makes it dormant under
    /// FreeRw (reusable rewrite).
    void make_dormant(const QueryId& id, TellPayload artifact, double now);

    /// Timeout pass; deterministic over entry-id order.
    SweepResult sweep(double now);

    CacheEntry* find(const QueryId& id);
    const CacheEntry* find(const QueryId& id) const;
    /// Entry whose program has `id` as an open call, if any.
    CacheEntry* find_parent_of(const QueryId& id);
    /// Closed answer (or dormant rewrite) reusable for `exp`.
    std::optional<TellPayload> find_reusable(const CanonicalExpr& exp) const;

    void erase(const QueryId& id);
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::map<QueryId, CacheEntry>& entries() const { return entries_; }
    const CacheStats& stats() const { return stats_; }

    /// Structural invariants; throws std::logic_error on violation.
    void check_invariants() const;

private:
    CacheEntry& insert(CacheEntry e);
    const QueryId* dependency_target(const CanonicalExpr& exp) const;
    void promote_target(CacheEntry& target);
    std::vector<QueryId> dependents_of(const QueryId& id) const;

    double t_a_;
    double t_c_;
    std::map<QueryId, CacheEntry> entries_;
    std::map<CanonicalExpr, std::set<QueryId>> by_expr_;
    CacheStats stats_;
};

/// State a sub-query record starts in: total when the ask sits directly
/// under the root (visited = {root, term}), partial when deeper.
CacheState mark_total_or_partial(std::size_t visited_size);

}  // namespace taxonet
