#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "taxonet/bgraph.hpp"
#include "taxonet/cache.hpp"
#include "taxonet/eval.hpp"
#include "taxonet/protocol.hpp"
#include "taxonet/rng.hpp"

namespace taxonet {

enum class Architecture { CCD, CDR, DCR, DDR, DDD };

const char* to_string(Architecture a);
std::optional<Architecture> parse_architecture(std::string_view name);

enum class SourceRole {
    CcdClient,
    CcdServer,
    DddPeer,
    CdrPeer,
    CdrTaxonomyServer,
    DcrPeer,
    DcrInterpServer,
    DdrPeer,
};

const char* to_string(SourceRole r);

// ---------------------------------------------------------------------------
// Wire vocabulary

struct QueryMsg {
    QueryId id;
    Query q;
};
struct AnswerMsg {
    QueryId id;
    AnswerSet objects;
};
struct AskMsg {
    QueryId id;
    TermId term;
    std::vector<TermId> visited;  // path order, term last
};
struct TellMsg {
    QueryId id;
    TellPayload payload;
};
struct RewriteReqMsg {
    QueryId id;
    Query q;
};
struct RewriteResMsg {  // also carries a completed rewrite to its evaluator
    QueryId id;
    RewritePtr rewrite;
};
struct InterpReqMsg {
    QueryId id;
    std::vector<TermId> terms;
};
struct InterpAnsMsg {
    QueryId id;
    std::vector<std::pair<TermId, AnswerSet>> extents;
};

using MessageBody = std::variant<QueryMsg, AnswerMsg, AskMsg, TellMsg, RewriteReqMsg,
                                 RewriteResMsg, InterpReqMsg, InterpAnsMsg>;

struct Message {
    SourceId from = 0;
    SourceId to = 0;
    MessageBody body;
};

const char* message_kind(const MessageBody& body);

/// Delivery of an answer (or a timeout notice) to a local application.
struct AppAnswer {
    QueryId id;
    std::optional<AnswerSet> objects;  // nullopt: no answer before timeout
};

/// Everything a handler produced in one step. `local` messages loop through
/// the source's own queues; `network` messages leave through the ORQ.
struct Emission {
    std::vector<Message> network;
    std::vector<Message> local;
    std::vector<AppAnswer> app;
    int disk_accesses = 0;
};

// ---------------------------------------------------------------------------
// Source actor

/// Message handlers for one source. All five architectures share the same
/// evaluation core (cache admission, hyperedge expansion, query programs);
/// the role decides routing, payload kind and what happens when a root
/// evaluation completes. Handlers run to completion per event and only
/// communicate through the returned emissions.
class SourceActor {
public:
    struct Setup {
        SourceRole role = SourceRole::DddPeer;
        SourceId self = 0;
        const Source* local = nullptr;                 // own taxonomy + extents
        std::shared_ptr<const BGraph> graph;           // own or global, per role
        const Interpretation* interp = nullptr;        // own or global, per role
        std::vector<SourceId> servers;                 // selection pool
        double answer_timeout = 60.0;
        double cache_timeout = 600.0;
    };

    explicit SourceActor(Setup setup);

    Emission on_app_query(std::uint64_t serial, const Query& q, double now, Rng& rng);
    Emission on_message(const Message& m, double now, Rng& rng);
    Emission on_sweep(double now);

    const QueryCache& cache() const { return cache_; }
    SourceRole role() const { return role_; }
    SourceId id() const { return self_; }

private:
    bool rewrite_engine() const;   // tells carry rewrite fragments
    bool routes_remotely() const;  // sub-asks cross source boundaries

    void handle_query(const QueryMsg& m, double now, Rng& rng, Emission& out);
    void handle_answer(const AnswerMsg& m, double now, Emission& out);
    void handle_ask(const AskMsg& m, SourceId from, double now, Emission& out);
    void handle_tell(const TellMsg& m, double now, Emission& out);
    void handle_rewrite_req(const RewriteReqMsg& m, SourceId from, double now,
                            Emission& out);
    void handle_rewrite_res(const RewriteResMsg& m, SourceId from, double now,
                            Rng& rng, Emission& out);
    void handle_interp_req(const InterpReqMsg& m, SourceId from, double now,
                           Emission& out);
    void handle_interp_ans(const InterpAnsMsg& m, double now, Emission& out);

    /// Starts the evaluation of a freshly admitted root entry.
    void start_root_evaluation(CacheEntry& entry, const Query& q, double now,
                               Emission& out);
    /// Expands a term against the graph; returns false when no hyperedge
    /// survives the visited test (the caller answers from the extent).
    bool expand_term(CacheEntry& entry, TermId term, const std::vector<TermId>& visited,
                     double now, Emission& out);
    void send_ask(const AskMsg& ask, Emission& out);
    void send_tell(const QueryId& id, TellPayload payload, Emission& out);
    void deliver_answer(const QueryId& root_id, const AnswerSet& objects, double now,
                        Emission& out);
    void complete_root(CacheEntry& entry, double now, Emission& out);
    void finish_rewrite_root(CacheEntry& entry, const RewritePtr& rw, double now,
                             Emission& out);
    void start_stage_two(CacheEntry& entry, RewritePtr rw, double now, Emission& out);
    void try_finish_stage_two(const QueryId& id, double now, Emission& out);
    void route_notifications(const std::vector<Notification>& notes, double now,
                             Emission& out);
    AnswerSet lookup_extent(TermId t, Emission& out);  // counts a disk access

    TermId fresh_term();
    QueryId mint_child(const QueryId& parent);

    SourceRole role_;
    SourceId self_;
    const Source* local_;
    std::shared_ptr<const BGraph> graph_;
    const Interpretation* interp_;
    std::vector<SourceId> servers_;
    QueryCache cache_;
    std::uint32_t next_num_ = 1;
    std::uint32_t next_fresh_ = 0;

    std::map<QueryId, QueryId> parent_of_;  // open sub-query -> owning entry

    struct Stage2 {
        RewritePtr rewrite;
        std::map<QueryId, SourceId> pending;        // interp requests in flight
        std::map<TermId, AnswerSet> resolved;
    };
    std::map<QueryId, Stage2> stage2_;

    // Rewrite requests this source performs for others: entry id -> requester.
    std::map<QueryId, SourceId> rewrite_requester_;
    // DCR: rewrites sent for evaluation: entry id kept until the answer returns.
    std::map<QueryId, SourceId> eval_pending_;
};

/// Builds the actor fleet for one architecture over a generated network.
/// Global copies (taxonomy, interpretation) are shared between servers.
struct Fleet {
    std::vector<std::unique_ptr<SourceActor>> actors;     // by SourceId
    std::shared_ptr<const BGraph> global_graph;           // when a role needs it
    std::shared_ptr<const Interpretation> global_interp;
    std::shared_ptr<const Source> merged;
};
Fleet build_fleet(Architecture arch, const Network& net, std::size_t n_servers,
                  double answer_timeout, double cache_timeout);

}  // namespace taxonet
