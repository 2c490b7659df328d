#include "taxonet/replay.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <optional>
#include <set>

namespace taxonet {

namespace {

struct Entry {
    TermId term;
    std::vector<TermId> path;
    std::uint64_t parent = 0;  // 0: root
    // program: groups of child serials with their results
    std::vector<std::vector<std::uint64_t>> groups;
    std::map<std::uint64_t, AnswerSet> results;       // direct
    std::map<std::uint64_t, RewritePtr> fragments;    // rewrite
    std::uint32_t open = 0;
};

struct Replayer {
    const Source& source;
    const NameTable& names;
    EvalMode mode;
    BGraph graph;
    const Interpretation* interp;
    std::map<std::uint64_t, Entry> entries;
    std::deque<std::uint64_t> ask_queue;
    std::set<std::uint64_t> tell_pool;  // resolved max-first
    std::uint64_t next_serial = 1;
    ReplayResult out;

    std::string term_name(TermId t) const { return names.term_name(t); }

    std::string path_str(const std::vector<TermId>& path) const {
        std::string s = "{";
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (i) s += ',';
            s += term_name(path[i]);
        }
        return s + "}";
    }

    std::string render_ask(std::uint64_t serial) const {
        const Entry& e = entries.at(serial);
        return fmt::format("ask({},{},{})", serial, term_name(e.term), path_str(e.path));
    }

    // Symbolic payload of the tell that answers `serial`: the entry's own
    // interpretation joined with its closed program combination.
    std::string render_tell_payload(std::uint64_t serial) const {
        const Entry& e = entries.at(serial);
        std::string own = mode == EvalMode::Direct
                              ? fmt::format("I({})", term_name(e.term))
                              : term_name(e.term);
        if (e.groups.empty()) return own;
        std::string s = own;
        for (const auto& group : e.groups) {
            s += " ∪ ";
            if (group.size() == 1) {
                s += fmt::format("R({})", group[0]);
            } else {
                s += '(';
                for (std::size_t i = 0; i < group.size(); ++i) {
                    if (i) s += " ∩ ";
                    s += fmt::format("R({})", group[i]);
                }
                s += ')';
            }
        }
        return s;
    }

    std::string render_tell(std::uint64_t serial) const {
        std::string payload = render_tell_payload(serial);
        if (mode == EvalMode::Rewrite) payload = fmt::format("\"{}\"", payload);
        return fmt::format("tell({},{})", serial, payload);
    }

    std::string render_program(std::uint64_t serial) const {
        const Entry& e = entries.at(serial);
        std::string s = "{";
        for (std::size_t g = 0; g < e.groups.size(); ++g) {
            if (g) s += ',';
            s += '{';
            for (std::size_t i = 0; i < e.groups[g].size(); ++i) {
                if (i) s += ',';
                std::uint64_t child = e.groups[g][i];
                bool closed = e.results.count(child) || e.fragments.count(child);
                s += closed ? fmt::format("R({})", child) : fmt::format("{}", child);
            }
            s += '}';
        }
        return s + "}";
    }

    AnswerSet entry_value(const Entry& e) const {
        AnswerSet acc = interp->extent(e.term);
        for (const auto& group : e.groups) {
            AnswerSet inter = e.results.at(group[0]);
            for (std::size_t i = 1; i < group.size(); ++i)
                inter = inter.intersected(e.results.at(group[i]));
            acc = acc.united(inter);
        }
        return acc;
    }

    RewritePtr entry_fragment(const Entry& e) const {
        std::vector<RewritePtr> kids{RewriteNode::make_term(e.term)};
        for (const auto& group : e.groups) {
            std::vector<RewritePtr> inters;
            for (std::uint64_t child : group) inters.push_back(e.fragments.at(child));
            kids.push_back(RewriteNode::make_intersection(std::move(inters)));
        }
        // splice a union-valued single child into the top-level union
        if (kids.size() == 2 && kids[1]->kind == RewriteNode::Kind::Union) {
            std::vector<RewritePtr> flat{kids[0]};
            flat.insert(flat.end(), kids[1]->children.begin(), kids[1]->children.end());
            return RewriteNode::make_union(std::move(flat));
        }
        return RewriteNode::make_union(std::move(kids));
    }

    void run(const Query& q) {
        std::optional<std::pair<Source, TermId>> overlay;
        if (q.is_single_term()) {
            graph = taxonomy_graph(source);
            interp = &source.interpretation;
            Entry root{q.disjuncts[0].terms()[0], {q.disjuncts[0].terms()[0]}};
            entries[next_serial] = root;
            ask_queue.push_back(next_serial++);
        } else {
            overlay = reduce_to_term_query(source, q);
            graph = taxonomy_graph(overlay->first);
            interp = &overlay->first.interpretation;
            Entry root{overlay->second, {overlay->second}};
            entries[next_serial] = root;
            ask_queue.push_back(next_serial++);
        }

        while (!ask_queue.empty()) {
            std::uint64_t serial = ask_queue.front();
            ask_queue.pop_front();
            process_ask(serial);
        }
        while (!tell_pool.empty()) {
            std::uint64_t serial = *tell_pool.rbegin();
            tell_pool.erase(std::prev(tell_pool.end()));
            process_tell(serial);
        }
    }

    void process_ask(std::uint64_t serial) {
        Entry& e = entries.at(serial);
        ReplayRow row;
        row.incoming = render_ask(serial);
        std::vector<const Hyperedge*> eligible;
        for (std::uint32_t ei : graph.incoming(e.term)) {
            const Hyperedge& edge = graph.edges()[ei];
            bool blocked = std::any_of(edge.tail.begin(), edge.tail.end(), [&](TermId t) {
                return std::find(e.path.begin(), e.path.end(), t) != e.path.end();
            });
            if (!blocked) eligible.push_back(&edge);
        }
        if (eligible.empty()) {
            tell_pool.insert(serial);
            std::string msg = render_tell(serial);
            row.generated.push_back(msg);
            out.messages.push_back(msg);
            out.rows.push_back(std::move(row));
            return;
        }
        std::vector<std::uint64_t> children;
        for (const Hyperedge* edge : eligible) {
            std::vector<std::uint64_t> group;
            for (TermId u : edge->tail) {
                std::uint64_t child = ++next_serial - 1;
                Entry c;
                c.term = u;
                c.path = e.path;
                c.path.push_back(u);
                c.parent = serial;
                entries[child] = std::move(c);
                group.push_back(child);
                children.push_back(child);
                ++e.open;
            }
            e.groups.push_back(std::move(group));
        }
        for (std::uint64_t child : children) {
            ask_queue.push_back(child);
            std::string msg = render_ask(child);
            row.generated.push_back(msg);
            out.messages.push_back(msg);
        }
        row.program_of = serial;
        row.program = render_program(serial);
        out.rows.push_back(std::move(row));
    }

    void process_tell(std::uint64_t serial) {
        // The rendered payload reflects the state before this tell closes
        // its parent's call.
        ReplayRow row;
        row.incoming = render_tell(serial);
        Entry& e = entries.at(serial);
        if (e.parent == 0) {
            // final answer: nothing left to do
            out.rows.push_back(std::move(row));
            return;
        }
        Entry& p = entries.at(e.parent);
        if (mode == EvalMode::Direct)
            p.results[serial] = entry_value(e);
        else
            p.fragments[serial] = entry_fragment(e);
        assert(p.open > 0);
        if (--p.open > 0) {
            row.program_of = e.parent;
            row.program = render_program(e.parent);
            out.rows.push_back(std::move(row));
            return;
        }
        tell_pool.insert(e.parent);
        std::string msg = render_tell(e.parent);
        row.generated.push_back(msg);
        out.messages.push_back(msg);
        out.rows.push_back(std::move(row));
    }
};

}  // namespace

ReplayResult replay(const Source& source, const NameTable& names, const Query& q,
                    EvalMode mode) {
    Replayer r{source, names, mode};
    r.run(q);
    ReplayResult out = std::move(r.out);
    const Entry& root = r.entries.at(1);
    if (mode == EvalMode::Direct) {
        out.answer = r.entry_value(root);
    } else {
        out.rewrite = r.entry_fragment(root);
        // the query answer falls out of the rewrite as well
        out.answer = evaluate_rewrite(
            out.rewrite, [&](TermId t) { return r.interp->extent(t); });
    }
    out.final_payload = r.render_tell_payload(1);
    return out;
}

}  // namespace taxonet
