#include "wfsmr/store.hpp"

#include <algorithm>
#include <stdexcept>

namespace wfsmr {

std::size_t TupleHash::operator()(const Tuple& t) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (Value v : t) {
        h ^= v;
        h *= 0x100000001b3ull;
        h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
}

Value SymbolTable::intern(std::string_view symbol) {
    if (auto it = ids_.find(std::string(symbol)); it != ids_.end()) return it->second;
    const auto id = static_cast<Value>(symbols_.size());
    symbols_.emplace_back(symbol);
    ids_.emplace(symbols_.back(), id);
    return id;
}

std::optional<Value> SymbolTable::find(std::string_view symbol) const {
    if (auto it = ids_.find(std::string(symbol)); it != ids_.end()) return it->second;
    return std::nullopt;
}

const std::string& SymbolTable::symbol(Value id) const {
    if (id >= symbols_.size()) throw std::out_of_range("unknown symbol id " + std::to_string(id));
    return symbols_[id];
}

bool Relation::insert(Tuple tuple) {
    if (tuple.size() != arity_) throw ArityError(predicate_, arity_, tuple.size());
    return tuples_.insert(std::move(tuple)).second;
}

std::vector<Tuple> Relation::sorted() const {
    std::vector<Tuple> out(tuples_.begin(), tuples_.end());
    std::sort(out.begin(), out.end());
    return out;
}

bool Database::insert(const std::string& predicate, Tuple tuple) {
    const auto arity = tuple.size();
    return relation(predicate, arity).insert(std::move(tuple));
}

bool Database::insert(const Fact& fact, SymbolTable& symbols) {
    Tuple t;
    t.reserve(fact.args.size());
    for (const auto& a : fact.args) t.push_back(symbols.intern(a));
    return insert(fact.predicate, std::move(t));
}

bool Database::contains(const std::string& predicate, const Tuple& tuple) const {
    const auto* r = find(predicate);
    return r && r->contains(tuple);
}

const Relation* Database::find(const std::string& predicate) const {
    auto it = relations_.find(predicate);
    return it == relations_.end() ? nullptr : &it->second;
}

Relation& Database::relation(const std::string& predicate, std::size_t arity) {
    auto it = relations_.find(predicate);
    if (it == relations_.end()) it = relations_.emplace(predicate, Relation(predicate, arity)).first;
    if (it->second.arity() != arity) throw ArityError(predicate, it->second.arity(), arity);
    return it->second;
}

std::size_t Database::count() const {
    std::size_t n = 0;
    for (const auto& [_, r] : relations_) n += r.size();
    return n;
}

std::size_t Database::merge(const Database& other) {
    std::size_t added = 0;
    for (const auto& [pred, rel] : other.relations_) {
        auto& mine = relation(pred, rel.arity());
        for (const auto& t : rel) added += mine.insert(t);
    }
    return added;
}

std::vector<Fact> Database::facts(const SymbolTable& symbols) const {
    std::vector<Fact> out;
    for (const auto& [pred, rel] : relations_)
        for (const auto& t : rel.sorted()) out.push_back(decode(pred, t, symbols));
    return out;
}

bool operator==(const Database& a, const Database& b) { return is_subset(a, b) && is_subset(b, a); }

Database unite(const Database& a, const Database& b) {
    Database out = a;
    out.merge(b);
    return out;
}

Database subtract(const Database& a, const Database& b) {
    Database out;
    for (const auto& [pred, rel] : a.relations()) {
        const auto* other = b.find(pred);
        if (other && other->arity() != rel.arity()) throw ArityError(pred, other->arity(), rel.arity());
        auto& dst = out.relation(pred, rel.arity());
        for (const auto& t : rel)
            if (!other || !other->contains(t)) dst.insert(t);
    }
    return out;
}

bool is_subset(const Database& a, const Database& b) {
    for (const auto& [pred, rel] : a.relations())
        for (const auto& t : rel)
            if (!b.contains(pred, t)) return false;
    return true;
}

bool disjoint(const Database& a, const Database& b) {
    for (const auto& [pred, rel] : a.relations())
        for (const auto& t : rel)
            if (b.contains(pred, t)) return false;
    return true;
}

Fact decode(const std::string& predicate, const Tuple& tuple, const SymbolTable& symbols) {
    Fact f{predicate, {}};
    f.args.reserve(tuple.size());
    for (Value v : tuple) f.args.push_back(symbols.symbol(v));
    return f;
}

FactView FactView::with(const Database& db) const {
    FactView v = *this;
    v.layers_.push_back(&db);
    return v;
}

bool FactView::contains(const std::string& predicate, const Tuple& tuple) const {
    return std::any_of(layers_.begin(), layers_.end(),
                       [&](const Database* db) { return db->contains(predicate, tuple); });
}

std::vector<const Relation*> FactView::parts(const std::string& predicate) const {
    std::vector<const Relation*> out;
    for (const auto* db : layers_)
        if (const auto* r = db->find(predicate)) out.push_back(r);
    return out;
}

std::size_t FactView::count() const {
    std::size_t n = 0;
    for (const auto* db : layers_) n += db->count();
    return n;
}

Database FactView::collect() const {
    Database out;
    for (const auto* db : layers_) out.merge(*db);
    return out;
}

}  // namespace wfsmr
