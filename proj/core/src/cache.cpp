#include "taxonet/cache.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace taxonet {

const char* to_string(CacheState s) {
    switch (s) {
        case CacheState::Free: return "free";
        case CacheState::Principal: return "principal";
        case CacheState::Dependent: return "dependent";
        case CacheState::Declined: return "declined";
        case CacheState::Closed: return "closed";
        case CacheState::Total: return "total";
        case CacheState::Partial: return "partial";
        case CacheState::FreeRw: return "free-rw";
        case CacheState::PrincipalRw: return "principal-rw";
    }
    return "?";
}

CanonicalExpr CanonicalExpr::for_term(TermId t) { return CanonicalExpr{{{t}}}; }

CanonicalExpr CanonicalExpr::for_query(const Query& q) {
    CanonicalExpr e;
    for (const auto& d : q.disjuncts) e.disjuncts.push_back(d.terms());
    std::sort(e.disjuncts.begin(), e.disjuncts.end());
    e.disjuncts.erase(std::unique(e.disjuncts.begin(), e.disjuncts.end()),
                      e.disjuncts.end());
    return e;
}

CanonicalExpr CanonicalExpr::for_rewrite_of(const Query& q) {
    CanonicalExpr e = for_query(q);
    e.rewrite_artifact = true;
    return e;
}

CacheState mark_total_or_partial(std::size_t visited_size) {
    assert(visited_size >= 2);
    return visited_size == 2 ? CacheState::Total : CacheState::Partial;
}

CacheEntry& QueryCache::insert(CacheEntry e) {
    QueryId id = e.id;
    by_expr_[e.exp].insert(id);
    auto [it, fresh] = entries_.emplace(id, std::move(e));
    if (!fresh) throw std::logic_error("duplicate cache entry id");
    return it->second;
}

void QueryCache::erase(const QueryId& id) {
    auto it = entries_.find(id);
    if (it == entries_.end()) return;
    auto idx = by_expr_.find(it->second.exp);
    if (idx != by_expr_.end()) {
        idx->second.erase(id);
        if (idx->second.empty()) by_expr_.erase(idx);
    }
    entries_.erase(it);
}

CacheEntry* QueryCache::find(const QueryId& id) {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
}

const CacheEntry* QueryCache::find(const QueryId& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
}

CacheEntry* QueryCache::find_parent_of(const QueryId& id) {
    for (auto& [eid, entry] : entries_) {
        if (!entry.qp) continue;
        for (const auto& group : entry.qp->sub_programs)
            for (const auto& call : group)
                if (call.open() && call.id == id) return &entry;
    }
    return nullptr;
}

std::optional<TellPayload> QueryCache::find_reusable(const CanonicalExpr& exp) const {
    auto idx = by_expr_.find(exp);
    if (idx == by_expr_.end()) return std::nullopt;
    for (const QueryId& id : idx->second) {
        const CacheEntry& e = entries_.at(id);
        if (e.state == CacheState::Closed && e.answer) return e.answer;
        if (e.state == CacheState::FreeRw && e.dormant && e.answer) return e.answer;
    }
    return std::nullopt;
}

const QueryId* QueryCache::dependency_target(const CanonicalExpr& exp) const {
    auto idx = by_expr_.find(exp);
    if (idx == by_expr_.end()) return nullptr;
    const QueryId* best = nullptr;
    double best_created = 0;
    for (const QueryId& id : idx->second) {
        const CacheEntry& e = entries_.at(id);
        switch (e.state) {
            case CacheState::Free:
            case CacheState::Principal:
            case CacheState::Declined:
            case CacheState::FreeRw:
            case CacheState::PrincipalRw:
                break;
            default:
                continue;
        }
        if (e.dormant) continue;
        // oldest entry wins; entry-id order breaks creation-time ties
        if (!best || e.created < best_created) {
            best = &e.id;
            best_created = e.created;
        }
    }
    return best;
}

void QueryCache::promote_target(CacheEntry& target) {
    if (target.state == CacheState::Free) target.state = CacheState::Principal;
    else if (target.state == CacheState::FreeRw) target.state = CacheState::PrincipalRw;
}

std::vector<QueryId> QueryCache::dependents_of(const QueryId& id) const {
    std::vector<QueryId> out;
    for (const auto& [eid, e] : entries_)
        if (e.state == CacheState::Dependent && e.dep && *e.dep == id) out.push_back(eid);
    return out;
}

AdmitDecision QueryCache::admit(const QueryId& id, CanonicalExpr exp, double now) {
    if (auto reusable = find_reusable(exp)) {
        ++stats_.hits;
        return {AdmitDecision::Kind::AnswerNow, std::move(reusable), std::nullopt};
    }
    if (const QueryId* target = dependency_target(exp)) {
        QueryId tid = *target;
        CacheEntry e;
        e.id = id;
        e.exp = std::move(exp);
        e.state = CacheState::Dependent;
        e.dep = tid;
        e.created = now;
        e.timeout = now + t_a_;
        insert(std::move(e));
        promote_target(entries_.at(tid));
        ++stats_.dependents_created;
        return {AdmitDecision::Kind::Dependent, std::nullopt, tid};
    }
    CacheEntry e;
    e.id = id;
    e.exp = std::move(exp);
    e.state = CacheState::Free;
    e.created = now;
    e.timeout = now + t_a_;
    insert(std::move(e));
    return {AdmitDecision::Kind::Evaluate, std::nullopt, std::nullopt};
}

CacheEntry& QueryCache::create_sub_entry(const QueryId& id, TermId term,
                                         std::size_t visited_size, double now) {
    CacheEntry e;
    e.id = id;
    e.exp = CanonicalExpr::for_term(term);
    e.state = mark_total_or_partial(visited_size);
    e.created = now;
    e.timeout = now + t_a_;
    return insert(std::move(e));
}

CacheEntry& QueryCache::create_root_entry(const QueryId& id, CanonicalExpr exp,
                                          double now) {
    CacheEntry e;
    e.id = id;
    e.exp = std::move(exp);
    e.state = CacheState::Free;
    e.created = now;
    e.timeout = now + t_a_;
    return insert(std::move(e));
}

AnswerResult QueryCache::on_answer(const QueryId& id, TellPayload payload, double now,
                                   bool as_dormant_rewrite) {
    AnswerResult out;
    CacheEntry* e = find(id);
    if (!e) return out;  // stale answer for an expired entry
    assert(!std::holds_alternative<Epsilon>(payload) && "epsilon is never cached");
    bool was_declined = e->state == CacheState::Declined;
    bool notify_deps = e->state == CacheState::Principal ||
                       e->state == CacheState::PrincipalRw || was_declined;
    if (!was_declined)
        out.notifications.push_back({id, payload});
    if (notify_deps) {
        for (const QueryId& dep_id : dependents_of(id)) {
            out.notifications.push_back({dep_id, payload});
            out.deletions.push_back(dep_id);
            erase(dep_id);
        }
    }
    e = find(id);  // iterator-stable map, but be explicit after erasures
    if (as_dormant_rewrite) {
        e->state = CacheState::FreeRw;
        e->dormant = true;
    } else {
        e->state = CacheState::Closed;
    }
    e->answer = std::move(payload);
    e->timeout = now + t_c_;
    e->dep.reset();
    e->qp.reset();
    return out;
}

bool QueryCache::close_sub_entry(const QueryId& id, const TellPayload& payload,
                                 double now) {
    CacheEntry* e = find(id);
    if (!e) return false;
    bool reusable = e->state == CacheState::Total &&
                    !std::holds_alternative<Epsilon>(payload);
    if (reusable) {
        if (e->rewriting) {
            // Completed term rewrites stay reusable under free-rw.
            e->state = CacheState::FreeRw;
            e->dormant = true;
        } else {
            e->state = CacheState::Closed;
        }
        e->answer = payload;
        e->timeout = now + t_c_;
        e->qp.reset();
    } else {
        erase(id);
    }
    return true;
}

void QueryCache::make_dormant(const QueryId& id, TellPayload artifact, double now) {
    CacheEntry* e = find(id);
    if (!e) return;
    e->state = CacheState::FreeRw;
    e->dormant = true;
    e->answer = std::move(artifact);
    e->timeout = now + t_c_;
    e->qp.reset();
}

SweepResult QueryCache::sweep(double now) {
    SweepResult out;
    std::vector<QueryId> expired;
    for (const auto& [id, e] : entries_)
        if (e.timeout <= now) expired.push_back(id);

    for (const QueryId& id : expired) {
        CacheEntry* e = find(id);
        if (!e) continue;  // removed earlier in this pass
        switch (e->state) {
            case CacheState::Free:
                out.notifications.push_back({id, std::nullopt});
                out.deletions.push_back(id);
                erase(id);
                break;
            case CacheState::FreeRw:
                if (e->dormant) {  // cached artifact, expires silently
                    out.deletions.push_back(id);
                    erase(id);
                } else {
                    out.notifications.push_back({id, std::nullopt});
                    out.deletions.push_back(id);
                    erase(id);
                }
                break;
            case CacheState::Principal:
            case CacheState::PrincipalRw:
                out.notifications.push_back({id, std::nullopt});
                e->state = CacheState::Declined;
                e->timeout = kNeverExpires;  // lives while dependents do
                ++stats_.declines;
                break;
            case CacheState::Dependent:
                out.notifications.push_back({id, std::nullopt});
                out.deletions.push_back(id);
                erase(id);
                break;
            case CacheState::Closed:
                out.deletions.push_back(id);
                erase(id);
                break;
            case CacheState::Total:
            case CacheState::Partial:
                out.epsilon_tells.push_back(id);
                ++stats_.epsilon_tells;
                // the ε tell deletes the entry when it is processed
                e->timeout = kNeverExpires;
                break;
            case CacheState::Declined:
                break;  // handled below
        }
    }

    // Declined entries die when the last dependent is gone.
    std::vector<QueryId> orphaned;
    for (const auto& [id, e] : entries_)
        if (e.state == CacheState::Declined && dependents_of(id).empty())
            orphaned.push_back(id);
    for (const QueryId& id : orphaned) {
        out.deletions.push_back(id);
        erase(id);
    }
    return out;
}

void QueryCache::check_invariants() const {
    for (const auto& [id, e] : entries_) {
        if ((e.state == CacheState::Dependent) != e.dep.has_value())
            throw std::logic_error("dep set iff state is dependent");
        if (e.dep) {
            auto it = entries_.find(*e.dep);
            if (it == entries_.end())
                throw std::logic_error("dangling dependency target");
            if (it->second.state == CacheState::Dependent)
                throw std::logic_error("dependency chains must be stars");
        }
        if (e.state == CacheState::Closed && !e.answer)
            throw std::logic_error("closed entry without an answer");
        if (e.answer && std::holds_alternative<Epsilon>(*e.answer))
            throw std::logic_error("epsilon stored in an answer field");
        if (e.state == CacheState::Declined && dependents_of(id).empty())
            throw std::logic_error("declined entry without dependents");
    }
}

}  // namespace taxonet
