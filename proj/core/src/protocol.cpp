#include "taxonet/protocol.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cassert>

namespace taxonet {

RewritePtr RewriteNode::make_term(TermId t) {
    auto n = std::make_shared<RewriteNode>();
    n->kind = Kind::Term;
    n->term = t;
    return n;
}

RewritePtr RewriteNode::make_placeholder(std::uint64_t serial) {
    auto n = std::make_shared<RewriteNode>();
    n->kind = Kind::Placeholder;
    n->placeholder = serial;
    return n;
}

RewritePtr RewriteNode::make_empty() {
    auto n = std::make_shared<RewriteNode>();
    n->kind = Kind::Empty;
    return n;
}

RewritePtr RewriteNode::make_union(std::vector<RewritePtr> children) {
    assert(!children.empty());
    if (children.size() == 1) return children[0];
    auto n = std::make_shared<RewriteNode>();
    n->kind = Kind::Union;
    n->children = std::move(children);
    return n;
}

RewritePtr RewriteNode::make_intersection(std::vector<RewritePtr> children) {
    assert(!children.empty());
    if (children.size() == 1) return children[0];
    auto n = std::make_shared<RewriteNode>();
    n->kind = Kind::Intersection;
    n->children = std::move(children);
    return n;
}

bool rewrite_equal(const RewritePtr& a, const RewritePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case RewriteNode::Kind::Term: return a->term == b->term;
        case RewriteNode::Kind::Placeholder: return a->placeholder == b->placeholder;
        case RewriteNode::Kind::Empty: return true;
        default: break;
    }
    if (a->children.size() != b->children.size()) return false;
    for (std::size_t i = 0; i < a->children.size(); ++i)
        if (!rewrite_equal(a->children[i], b->children[i])) return false;
    return true;
}

std::set<TermId> rewrite_leaves(const RewritePtr& root) {
    std::set<TermId> out;
    if (!root) return out;
    if (root->kind == RewriteNode::Kind::Term) {
        out.insert(root->term);
        return out;
    }
    for (const auto& c : root->children) {
        auto sub = rewrite_leaves(c);
        out.insert(sub.begin(), sub.end());
    }
    return out;
}

RewritePtr substitute(const RewritePtr& root,
                      const std::map<std::uint64_t, RewritePtr>& bind) {
    if (!root) return root;
    if (root->kind == RewriteNode::Kind::Placeholder) {
        auto it = bind.find(root->placeholder);
        return it == bind.end() ? root : it->second;
    }
    if (root->children.empty()) return root;
    std::vector<RewritePtr> kids;
    kids.reserve(root->children.size());
    bool changed = false;
    for (const auto& c : root->children) {
        kids.push_back(substitute(c, bind));
        changed = changed || kids.back() != c;
    }
    if (!changed) return root;
    auto n = std::make_shared<RewriteNode>(*root);
    n->children = std::move(kids);
    return n;
}

AnswerSet evaluate_rewrite(const RewritePtr& root,
                           const std::function<AnswerSet(TermId)>& lookup) {
    assert(root);
    switch (root->kind) {
        case RewriteNode::Kind::Term: return lookup(root->term);
        case RewriteNode::Kind::Empty: return {};
        case RewriteNode::Kind::Placeholder:
            throw std::logic_error("evaluating a rewrite with open placeholders");
        case RewriteNode::Kind::Union: {
            AnswerSet acc;
            for (const auto& c : root->children) acc = acc.united(evaluate_rewrite(c, lookup));
            return acc;
        }
        case RewriteNode::Kind::Intersection: {
            AnswerSet acc = evaluate_rewrite(root->children[0], lookup);
            for (std::size_t i = 1; i < root->children.size(); ++i)
                acc = acc.intersected(evaluate_rewrite(root->children[i], lookup));
            return acc;
        }
    }
    return {};
}

namespace {

void linearize_into(const RewritePtr& n, const NameTable& names, bool parens,
                    std::string& out) {
    switch (n->kind) {
        case RewriteNode::Kind::Term: out += names.term_name(n->term); return;
        case RewriteNode::Kind::Placeholder:
            out += fmt::format("R({})", n->placeholder);
            return;
        case RewriteNode::Kind::Empty: out += "0"; return;
        default: break;
    }
    const char* sep = n->kind == RewriteNode::Kind::Union ? " ∪ " : " ∩ ";
    if (parens) out += '(';
    for (std::size_t i = 0; i < n->children.size(); ++i) {
        if (i) out += sep;
        linearize_into(n->children[i], names, true, out);
    }
    if (parens) out += ')';
}

struct RwParser {
    std::string_view text;
    std::size_t pos = 0;
    const TermResolver& resolve;

    void skip_ws() {
        while (pos < text.size() && text[pos] == ' ') ++pos;
    }
    bool at(std::string_view tok) {
        skip_ws();
        return text.substr(pos, tok.size()) == tok;
    }
    void expect(std::string_view tok) {
        if (!at(tok))
            throw ParseError(fmt::format("expected '{}' at offset {}", tok, pos), pos);
        pos += tok.size();
    }

    RewritePtr parse_expr() {
        RewritePtr first = parse_atom();
        skip_ws();
        bool is_union = at("∪");
        bool is_inter = at("∩");
        if (!is_union && !is_inter) return first;
        std::string_view op = is_union ? "∪" : "∩";
        std::vector<RewritePtr> kids{first};
        while (at(op)) {
            pos += op.size();
            kids.push_back(parse_atom());
            skip_ws();
        }
        if (at("∪") || at("∩"))
            throw ParseError(fmt::format("mixed operators need parentheses at offset {}", pos),
                             pos);
        return is_union ? RewriteNode::make_union(std::move(kids))
                        : RewriteNode::make_intersection(std::move(kids));
    }

    RewritePtr parse_atom() {
        skip_ws();
        if (pos >= text.size())
            throw ParseError("unexpected end of rewrite", pos);
        if (text[pos] == '(') {
            ++pos;
            RewritePtr inner = parse_expr();
            expect(")");
            return inner;
        }
        if (text.substr(pos, 2) == "R(") {
            pos += 2;
            std::size_t start = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
                ++pos;
            if (pos == start)
                throw ParseError("expected placeholder serial", pos);
            std::uint64_t serial = std::stoull(std::string(text.substr(start, pos - start)));
            expect(")");
            return RewriteNode::make_placeholder(serial);
        }
        if (text[pos] == '0' &&
            (pos + 1 >= text.size() || !std::isalnum(static_cast<unsigned char>(text[pos + 1])))) {
            ++pos;
            return RewriteNode::make_empty();
        }
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' ||
                text[pos] == '.' || text[pos] == '#' || text[pos] == '-'))
            ++pos;
        if (pos == start)
            throw ParseError(fmt::format("expected atom at offset {}", pos), pos);
        std::string_view name = text.substr(start, pos - start);
        auto id = resolve(name);
        if (!id) throw ParseError(fmt::format("unknown term '{}'", name), start);
        return RewriteNode::make_term(*id);
    }
};

}  // namespace

std::string linearize(const RewritePtr& root, const NameTable& names) {
    std::string out;
    linearize_into(root, names, false, out);
    return out;
}

RewritePtr parse_rewrite(std::string_view text, const TermResolver& resolve) {
    RwParser p{text, 0, resolve};
    RewritePtr root = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size())
        throw ParseError(fmt::format("unexpected input at offset {}", p.pos), p.pos);
    return root;
}

// ---------------------------------------------------------------------------
// Query programs

std::string QueryProgram::render(const NameTable& names) const {
    std::string out = "{";
    for (std::size_t g = 0; g < sub_programs.size(); ++g) {
        if (g) out += ',';
        out += '{';
        for (std::size_t i = 0; i < sub_programs[g].size(); ++i) {
            if (i) out += ',';
            const Call& c = sub_programs[g][i];
            if (c.open())
                out += fmt::format("{}", c.id.display());
            else
                out += fmt::format("R({})", c.id.display());
        }
        out += '}';
    }
    out += '}';
    (void)names;
    return out;
}

QueryProgram make_program(const std::vector<std::vector<QueryId>>& groups) {
    QueryProgram qp;
    for (const auto& g : groups) {
        std::vector<Call> calls;
        for (const auto& id : g) calls.push_back(Call{id, std::nullopt});
        qp.open_calls += static_cast<std::uint32_t>(calls.size());
        qp.sub_programs.push_back(std::move(calls));
    }
    return qp;
}

void close_call(QueryProgram& qp, const QueryId& id, TellPayload payload) {
    for (auto& group : qp.sub_programs) {
        for (auto& call : group) {
            if (call.open() && call.id == id) {
                call.payload = std::move(payload);
                assert(qp.open_calls > 0);
                --qp.open_calls;
                return;
            }
        }
    }
    throw StaleTell("no open call with the given id");
}

AnswerSet compute_answer(const QueryProgram& qp) {
    if (!qp.closed()) throw std::logic_error("program still has open calls");
    AnswerSet acc;
    for (const auto& group : qp.sub_programs) {
        AnswerSet inter;
        for (std::size_t i = 0; i < group.size(); ++i) {
            const auto* objs = std::get_if<AnswerSet>(&*group[i].payload);
            AnswerSet value = objs ? *objs : AnswerSet{};  // ε reads as empty
            inter = i == 0 ? std::move(value) : inter.intersected(value);
        }
        acc = acc.united(inter);
    }
    return acc;
}

RewritePtr compute_rewrite(const QueryProgram& qp) {
    if (!qp.closed()) throw std::logic_error("program still has open calls");
    std::vector<RewritePtr> unions;
    for (const auto& group : qp.sub_programs) {
        std::vector<RewritePtr> inters;
        for (const auto& call : group) {
            if (const auto* frag = std::get_if<RewritePtr>(&*call.payload))
                inters.push_back(*frag);
            else
                inters.push_back(RewriteNode::make_empty());  // ε-closed call
        }
        unions.push_back(RewriteNode::make_intersection(std::move(inters)));
    }
    return RewriteNode::make_union(std::move(unions));
}

std::map<SourceId, std::set<TermId>> group_by_source(const std::set<TermId>& terms) {
    std::map<SourceId, std::set<TermId>> out;
    for (TermId t : terms) out[t.source].insert(t);
    return out;
}

}  // namespace taxonet
