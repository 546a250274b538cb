#pragma once

// Dictionary-encoded fact storage with set semantics.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wfsmr/program.hpp"

namespace wfsmr {

using Value = std::uint32_t;
using Tuple = std::vector<Value>;

struct TupleHash {
    std::size_t operator()(const Tuple& t) const noexcept;
};

/// Bidirectional constant <-> dense id map. Ids are assigned in first-seen
/// order and never change.
class SymbolTable {
public:
    Value intern(std::string_view symbol);
    std::optional<Value> find(std::string_view symbol) const;
    const std::string& symbol(Value id) const;
    std::size_t size() const { return symbols_.size(); }

private:
    std::unordered_map<std::string, Value> ids_;
    std::vector<std::string> symbols_;
};

class Relation {
public:
    using Set = std::unordered_set<Tuple, TupleHash>;

    Relation(std::string predicate, std::size_t arity) : predicate_(std::move(predicate)), arity_(arity) {}

    const std::string& predicate() const { return predicate_; }
    std::size_t arity() const { return arity_; }
    std::size_t size() const { return tuples_.size(); }
    bool empty() const { return tuples_.empty(); }

    bool insert(Tuple tuple);
    bool erase(const Tuple& tuple) { return tuples_.erase(tuple) > 0; }
    bool contains(const Tuple& tuple) const { return tuples_.contains(tuple); }

    Set::const_iterator begin() const { return tuples_.begin(); }
    Set::const_iterator end() const { return tuples_.end(); }

    /// Tuples in ascending encoded order.
    std::vector<Tuple> sorted() const;

    friend bool operator==(const Relation& a, const Relation& b) {
        return a.predicate_ == b.predicate_ && a.arity_ == b.arity_ && a.tuples_ == b.tuples_;
    }

private:
    std::string predicate_;
    std::size_t arity_;
    Set tuples_;
};

/// Facts grouped by predicate. Relations with no tuples may be present;
/// equality ignores them.
class Database {
public:
    bool insert(const std::string& predicate, Tuple tuple);
    bool insert(const Fact& fact, SymbolTable& symbols);

    bool contains(const std::string& predicate, const Tuple& tuple) const;
    const Relation* find(const std::string& predicate) const;
    Relation& relation(const std::string& predicate, std::size_t arity);

    /// Total fact count over all predicates.
    std::size_t count() const;
    bool empty() const { return count() == 0; }

    /// In-place union; returns the number of facts that were new.
    std::size_t merge(const Database& other);
    void clear() { relations_.clear(); }

    const std::map<std::string, Relation>& relations() const { return relations_; }

    /// Decoded facts, ordered by predicate then encoded tuple.
    std::vector<Fact> facts(const SymbolTable& symbols) const;

    friend bool operator==(const Database& a, const Database& b);

private:
    std::map<std::string, Relation> relations_;
};

Database unite(const Database& a, const Database& b);
Database subtract(const Database& a, const Database& b);
bool is_subset(const Database& a, const Database& b);
bool disjoint(const Database& a, const Database& b);

Fact decode(const std::string& predicate, const Tuple& tuple, const SymbolTable& symbols);

/// Read-only union of several databases, used wherever an operator input is
/// logically `A ∪ B` but both parts are stored separately.
class FactView {
public:
    FactView() = default;
    FactView(const Database& db) : layers_{&db} {}
    FactView(std::initializer_list<const Database*> layers) : layers_(layers) {}

    FactView with(const Database& db) const;

    bool contains(const std::string& predicate, const Tuple& tuple) const;
    std::vector<const Relation*> parts(const std::string& predicate) const;

    /// Sum of layer sizes; equals the view's cardinality when layers are
    /// pairwise disjoint.
    std::size_t count() const;

    /// Materializes the union.
    Database collect() const;

private:
    std::vector<const Database*> layers_;
};

}  // namespace wfsmr
