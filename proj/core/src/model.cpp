#include "taxonet/model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace taxonet {

AnswerSet::AnswerSet(std::vector<ObjectId> objects) : objects_(std::move(objects)) {
    std::sort(objects_.begin(), objects_.end());
    objects_.erase(std::unique(objects_.begin(), objects_.end()), objects_.end());
}

AnswerSet AnswerSet::of(std::initializer_list<std::uint64_t> ids) {
    std::vector<ObjectId> v;
    v.reserve(ids.size());
    for (auto i : ids) v.push_back(ObjectId{i});
    return AnswerSet(std::move(v));
}

bool AnswerSet::contains(ObjectId o) const {
    return std::binary_search(objects_.begin(), objects_.end(), o);
}

void AnswerSet::insert(ObjectId o) {
    auto it = std::lower_bound(objects_.begin(), objects_.end(), o);
    if (it == objects_.end() || *it != o) objects_.insert(it, o);
}

AnswerSet AnswerSet::united(const AnswerSet& other) const {
    AnswerSet out;
    out.objects_.reserve(objects_.size() + other.objects_.size());
    std::set_union(objects_.begin(), objects_.end(), other.objects_.begin(),
                   other.objects_.end(), std::back_inserter(out.objects_));
    return out;
}

AnswerSet AnswerSet::intersected(const AnswerSet& other) const {
    AnswerSet out;
    std::set_intersection(objects_.begin(), objects_.end(), other.objects_.begin(),
                          other.objects_.end(), std::back_inserter(out.objects_));
    return out;
}

ConjunctiveQuery::ConjunctiveQuery(std::vector<TermId> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("conjunctive query must be non-empty");
    std::sort(terms_.begin(), terms_.end());
    terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
}

const AnswerSet& Interpretation::extent(TermId t) const {
    static const AnswerSet kEmpty;
    auto it = extents_.find(t);
    return it == extents_.end() ? kEmpty : it->second;
}

void Interpretation::set_extent(TermId t, AnswerSet objects) {
    extents_[t] = std::move(objects);
}

void Interpretation::add(TermId t, ObjectId o) { extents_[t].insert(o); }

void Interpretation::merge(const Interpretation& other) {
    for (const auto& [t, ext] : other.extents_) {
        auto it = extents_.find(t);
        if (it == extents_.end())
            extents_.emplace(t, ext);
        else
            it->second = it->second.united(ext);
    }
}

// ---------------------------------------------------------------------------
// Names

TermId NameTable::intern_term(SourceId src, std::string name) {
    std::string qualified = name_by_src_.count(src)
                                ? name_by_src_[src] + "." + name
                                : name;
    if (auto it = term_by_name_.find(qualified); it != term_by_name_.end())
        return it->second;
    TermId id{src, static_cast<std::uint32_t>(
                       std::count_if(name_by_term_.begin(), name_by_term_.end(),
                                     [&](const auto& kv) { return kv.first.source == src; }))};
    term_by_name_[qualified] = id;
    name_by_term_[id] = name;
    term_name_uses_[name] += 1;
    if (term_name_uses_[name] == 1) term_by_name_[name] = id;
    return id;
}

ObjectId NameTable::intern_object(std::string name) {
    if (auto it = obj_by_name_.find(name); it != obj_by_name_.end()) return it->second;
    ObjectId id{obj_by_name_.size() + 1};
    obj_by_name_[name] = id;
    name_by_obj_[id] = std::move(name);
    return id;
}

void NameTable::name_source(SourceId src, std::string name) {
    src_by_name_[name] = src;
    name_by_src_[src] = std::move(name);
}

std::optional<TermId> NameTable::term(std::string_view name) const {
    auto it = term_by_name_.find(name);
    if (it == term_by_name_.end()) return std::nullopt;
    // Unqualified lookups are refused when the bare name is ambiguous.
    if (name.find('.') == name.npos) {
        auto uses = term_name_uses_.find(name);
        if (uses != term_name_uses_.end() && uses->second > 1) return std::nullopt;
    }
    return it->second;
}

std::optional<ObjectId> NameTable::object(std::string_view name) const {
    auto it = obj_by_name_.find(name);
    if (it == obj_by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<SourceId> NameTable::source(std::string_view name) const {
    auto it = src_by_name_.find(name);
    if (it == src_by_name_.end()) return std::nullopt;
    return it->second;
}

std::string NameTable::term_name(TermId t) const {
    if (t == kTrueNode) return "true";
    if (auto it = name_by_term_.find(t); it != name_by_term_.end()) return it->second;
    if (t.is_fresh()) return fmt::format("q#{}", t.local - kFreshTermBase);
    return fmt::format("s{}.t{}", t.source, t.local);
}

std::string NameTable::object_name(ObjectId o) const {
    if (auto it = name_by_obj_.find(o); it != name_by_obj_.end()) return it->second;
    return fmt::format("o{}", o.value);
}

std::string NameTable::source_name(SourceId s) const {
    if (auto it = name_by_src_.find(s); it != name_by_src_.end()) return it->second;
    return fmt::format("s{}", s);
}

// ---------------------------------------------------------------------------
// Query parsing

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
           c == '#' || c == '-';
}

struct Lexer {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    std::string_view ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && is_ident_char(text[pos])) ++pos;
        if (pos == start)
            throw ParseError(fmt::format("expected term at offset {}", start), start);
        return text.substr(start, pos - start);
    }
};

}  // namespace

Query parse_query(std::string_view text, const TermResolver& resolve) {
    Lexer lex{text};
    Query q;
    for (;;) {
        std::vector<TermId> conj;
        for (;;) {
            std::size_t at = lex.pos;
            std::string_view name = lex.ident();
            auto id = resolve(name);
            if (!id) throw ParseError(fmt::format("unknown term '{}'", name), at);
            conj.push_back(*id);
            if (lex.peek() == '&') {
                ++lex.pos;
                continue;
            }
            break;
        }
        q.disjuncts.emplace_back(std::move(conj));
        if (lex.peek() == '|') {
            ++lex.pos;
            continue;
        }
        break;
    }
    if (!lex.done())
        throw ParseError(fmt::format("unexpected input at offset {}", lex.pos), lex.pos);
    return q;
}

std::string print_query(const Query& q, const NameTable& names) {
    std::string out;
    for (std::size_t d = 0; d < q.disjuncts.size(); ++d) {
        if (d) out += " | ";
        const auto& terms = q.disjuncts[d].terms();
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (i) out += " & ";
            out += names.term_name(terms[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model operations

std::set<SubsumptionPair> simplify(
    const std::vector<std::pair<Query, ConjunctiveQuery>>& raw) {
    std::set<SubsumptionPair> out;
    for (const auto& [lhs, rhs] : raw)
        for (const auto& disjunct : lhs.disjuncts)
            for (TermId head : rhs.terms())
                out.insert(SubsumptionPair{disjunct, head});
    return out;
}

std::pair<Source, TermId> reduce_to_term_query(const Source& source, const Query& q) {
    Source overlay = source;
    TermId fresh{source.id, kFreshTermBase};
    while (overlay.taxonomy.terminology.count(fresh)) ++fresh.local;
    overlay.taxonomy.terminology.insert(fresh);
    for (const auto& d : q.disjuncts)
        overlay.taxonomy.pairs.insert(SubsumptionPair{d, fresh});
    overlay.interpretation.set_extent(fresh, AnswerSet{});
    return {std::move(overlay), fresh};
}

std::set<TermId> index_of(const Source& source, ObjectId o) {
    std::set<TermId> out;
    for (const auto& [t, ext] : source.interpretation.extents())
        if (ext.contains(o)) out.insert(t);
    return out;
}

Source network_source(const Network& net) {
    Source merged;
    merged.id = kMergedSource;
    for (const auto& [sid, src] : net.sources) {
        merged.taxonomy.terminology.insert(src.taxonomy.terminology.begin(),
                                           src.taxonomy.terminology.end());
        merged.taxonomy.pairs.insert(src.taxonomy.pairs.begin(), src.taxonomy.pairs.end());
        merged.taxonomy.pairs.insert(src.articulations.begin(), src.articulations.end());
        merged.interpretation.merge(src.interpretation);
    }
    return merged;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(sep, start);
        if (end == s.npos) end = s.size();
        std::string piece(s.substr(start, end - start));
        // trim
        while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.front())))
            piece.erase(piece.begin());
        while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.back())))
            piece.pop_back();
        if (!piece.empty()) out.push_back(std::move(piece));
        start = end + 1;
    }
    return out;
}

}  // namespace

LoadedNetwork load_network(std::string_view text) {
    LoadedNetwork ln;
    SourceId next_sid = 0;
    Source* current = nullptr;

    auto ensure_source = [&]() -> Source& {
        if (!current) {
            SourceId sid = next_sid++;
            ln.names.name_source(sid, "S");
            current = &ln.net.sources.emplace(sid, Source{.id = sid}).first->second;
        }
        return *current;
    };
    auto resolve_term = [&](const std::string& name, int line) -> TermId {
        auto id = ln.names.term(name);
        if (!id) throw ParseError(fmt::format("line {}: unknown term '{}'", line, name),
                                  static_cast<std::size_t>(line));
        return *id;
    };

    // Two passes: terminology first so pair/artic/obj lines can reference
    // terms declared later in the file.
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<std::pair<int, std::string>> body;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != line.npos) line.erase(hash);
        auto words = split(line, ' ');
        if (words.empty()) continue;
        std::string joined;
        for (std::size_t i = 1; i < words.size(); ++i) {
            if (i > 1) joined += ' ';
            joined += words[i];
        }
        if (words[0] == "source") {
            SourceId sid = next_sid++;
            ln.names.name_source(sid, joined);
            current = &ln.net.sources.emplace(sid, Source{.id = sid}).first->second;
        } else if (words[0] == "term") {
            Source& s = ensure_source();
            TermId t = ln.names.intern_term(s.id, joined);
            s.taxonomy.terminology.insert(t);
        } else {
            body.emplace_back(lineno, line);
        }
    }

    current = nullptr;
    for (auto& [ln_no, raw] : body) {
        auto words = split(raw, ' ');
        const std::string& kind = words[0];
        std::string rest;
        for (std::size_t i = 1; i < words.size(); ++i) {
            if (i > 1) rest += ' ';
            rest += words[i];
        }
        if (kind == "pair" || kind == "artic") {
            auto arrow = rest.find("->");
            if (arrow == rest.npos)
                throw ParseError(fmt::format("line {}: expected '->'", ln_no),
                                 static_cast<std::size_t>(ln_no));
            auto tails = split(rest.substr(0, arrow), ',');
            auto heads = split(rest.substr(arrow + 2), ',');
            if (tails.empty() || heads.size() != 1)
                throw ParseError(fmt::format("line {}: malformed subsumption", ln_no),
                                 static_cast<std::size_t>(ln_no));
            TermId head = resolve_term(heads[0], ln_no);
            Source& owner = ln.net.sources.at(head.source);
            std::vector<TermId> tail_ids;
            for (auto& t : tails) tail_ids.push_back(resolve_term(t, ln_no));
            SubsumptionPair p{ConjunctiveQuery(std::move(tail_ids)), head};
            bool foreign = std::any_of(p.tail.terms().begin(), p.tail.terms().end(),
                                       [&](TermId t) { return t.source != head.source; });
            if (kind == "artic" || foreign)
                owner.articulations.insert(std::move(p));
            else
                owner.taxonomy.pairs.insert(std::move(p));
        } else if (kind == "obj") {
            auto colon = rest.find(':');
            if (colon == rest.npos)
                throw ParseError(fmt::format("line {}: expected ':'", ln_no),
                                 static_cast<std::size_t>(ln_no));
            auto names = split(rest.substr(0, colon), ',');
            if (names.size() != 1)
                throw ParseError(fmt::format("line {}: one object id expected", ln_no),
                                 static_cast<std::size_t>(ln_no));
            ObjectId o = ln.names.intern_object(names[0]);
            for (auto& tname : split(rest.substr(colon + 1), ',')) {
                TermId t = resolve_term(tname, ln_no);
                ln.net.sources.at(t.source).interpretation.add(t, o);
            }
        } else {
            throw ParseError(fmt::format("line {}: unknown directive '{}'", ln_no, kind),
                             static_cast<std::size_t>(ln_no));
        }
    }
    if (ln.net.sources.empty())
        throw ParseError("no sources defined", 0);
    return ln;
}

LoadedNetwork load_network_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_network(ss.str());
}

}  // namespace taxonet
