#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace taxonet {

using SourceId = std::uint32_t;

/// Reserved source ids for pseudo entities.
inline constexpr SourceId kPseudoSource = 0xFFFFFFFFu;   // TRUE node, etc.
inline constexpr SourceId kMergedSource = 0xFFFFFFFEu;   // network_source() result

/// Local indices at or above this value are reserved for fresh query terms;
/// they are never part of a persisted terminology.
inline constexpr std::uint32_t kFreshTermBase = 0x80000000u;

/// A term, globally unique across a network: the owning source is part of
/// the identity, so ownership is recoverable from the id alone.
struct TermId {
    SourceId source = 0;
    std::uint32_t local = 0;

    auto operator<=>(const TermId&) const = default;
    bool is_fresh() const { return local >= kFreshTermBase; }
};

/// Distinguished node used by object decision graphs.
inline constexpr TermId kTrueNode{kPseudoSource, 0};

struct ObjectId {
    std::uint64_t value = 0;
    auto operator<=>(const ObjectId&) const = default;
};

/// Sorted, duplicate-free object set with value semantics.
class AnswerSet {
public:
    AnswerSet() = default;
    explicit AnswerSet(std::vector<ObjectId> objects);

    static AnswerSet of(std::initializer_list<std::uint64_t> ids);

    bool contains(ObjectId o) const;
    void insert(ObjectId o);
    std::size_t size() const { return objects_.size(); }
    bool empty() const { return objects_.empty(); }

    AnswerSet united(const AnswerSet& other) const;
    AnswerSet intersected(const AnswerSet& other) const;

    const std::vector<ObjectId>& objects() const { return objects_; }
    auto operator<=>(const AnswerSet&) const = default;

private:
    std::vector<ObjectId> objects_;  // sorted, unique
};

/// Conjunction of terms; set semantics, never empty.
class ConjunctiveQuery {
public:
    ConjunctiveQuery() = default;
    explicit ConjunctiveQuery(std::vector<TermId> terms);

    const std::vector<TermId>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    auto operator<=>(const ConjunctiveQuery&) const = default;

private:
    std::vector<TermId> terms_;  // sorted, unique
};

/// DNF query: a non-empty sequence of disjuncts, kept in textual order.
struct Query {
    std::vector<ConjunctiveQuery> disjuncts;

    bool is_single_term() const {
        return disjuncts.size() == 1 && disjuncts[0].terms().size() == 1;
    }
    auto operator<=>(const Query&) const = default;
};

/// A simplified subsumption: conjunctive tail, single-term head.
/// Articulations use the same shape with foreign tail terms.
struct SubsumptionPair {
    ConjunctiveQuery tail;
    TermId head;
    auto operator<=>(const SubsumptionPair&) const = default;
};

struct Taxonomy {
    std::set<TermId> terminology;
    std::set<SubsumptionPair> pairs;  // stored simplified
};

/// Total map term -> extent; absent terms have empty extents.
class Interpretation {
public:
    const AnswerSet& extent(TermId t) const;
    void set_extent(TermId t, AnswerSet objects);
    void add(TermId t, ObjectId o);
    const std::map<TermId, AnswerSet>& extents() const { return extents_; }

    /// Union with another interpretation (extents merged per term).
    void merge(const Interpretation& other);

private:
    std::map<TermId, AnswerSet> extents_;
};

struct Source {
    SourceId id = 0;
    Taxonomy taxonomy;
    Interpretation interpretation;
    // Inter-source bridges: tails may use foreign terms, heads are local.
    std::set<SubsumptionPair> articulations;

    bool owns(TermId t) const { return t.source == id; }
};

struct Network {
    std::map<SourceId, Source> sources;
};

/// Human-readable names for terms, objects and sources; kept outside the
/// model types, which carry ids only.
class NameTable {
public:
    TermId intern_term(SourceId src, std::string name);
    ObjectId intern_object(std::string name);
    void name_source(SourceId src, std::string name);

    std::optional<TermId> term(std::string_view name) const;       // unqualified or "src.term"
    std::optional<ObjectId> object(std::string_view name) const;
    std::optional<SourceId> source(std::string_view name) const;

    std::string term_name(TermId t) const;
    std::string object_name(ObjectId o) const;
    std::string source_name(SourceId s) const;

private:
    std::map<std::string, TermId, std::less<>> term_by_name_;
    std::map<TermId, std::string> name_by_term_;
    std::map<std::string, ObjectId, std::less<>> obj_by_name_;
    std::map<ObjectId, std::string> name_by_obj_;
    std::map<std::string, SourceId, std::less<>> src_by_name_;
    std::map<SourceId, std::string> name_by_src_;
    // count of unqualified term-name collisions, to refuse ambiguous lookups
    std::map<std::string, int, std::less<>> term_name_uses_;
};

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(std::string msg, std::size_t off)
        : std::runtime_error(std::move(msg)), offset(off) {}
};

using TermResolver = std::function<std::optional<TermId>(std::string_view)>;

/// Parses the surface syntax  q ::= d | q "|" d ;  d ::= t | t "&" d.
/// Disjuncts keep textual order; terms inside a disjunct collapse as a set.
/// Throws ParseError (with offset) on bad syntax or unknown terms.
Query parse_query(std::string_view text, const TermResolver& resolve);

std::string print_query(const Query& q, const NameTable& names);

/// Cross-product simplification of raw (DNF, conjunction) subsumptions into
/// (conjunction, term) pairs, duplicate-free.
std::set<SubsumptionPair> simplify(
    const std::vector<std::pair<Query, ConjunctiveQuery>>& raw);

/// Extends `source` with a fresh term subsuming each disjunct of `q` and an
/// empty extent for it. The input source is not modified.
std::pair<Source, TermId> reduce_to_term_query(const Source& source, const Query& q);

/// Terms whose extent contains `o`.
std::set<TermId> index_of(const Source& source, ObjectId o);

/// Collapses a network into the equivalent single source: terminologies,
/// interpretations and taxonomies-plus-articulations are unioned.
Source network_source(const Network& net);

/// Line-oriented source/network file:
///   source <name>            (optional section header; implicit "S" otherwise)
///   term <name>
///   pair <t1,..,tk> -> <t>
///   obj <id> : <t1,..,tk>
///   artic <s.t1,..> -> <t>
struct LoadedNetwork {
    Network net;
    NameTable names;
};
LoadedNetwork load_network(std::string_view text);
LoadedNetwork load_network_file(const std::string& path);

}  // namespace taxonet
