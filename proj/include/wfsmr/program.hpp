#pragma once

// Abstract syntax, parser and validator for safe normal logic programs.
//
// Grammar (one clause per `.`; `%` starts a comment running to end of line):
//
//   clause  := atom [ (":-" | "<-") literal ("," literal)* ] "."
//   literal := ["not" ws] atom
//   atom    := pred [ "(" [ term ("," term)* ] ")" ]
//   term    := Variable | constant
//
// Variables match [A-Z][A-Za-z0-9_]*, constants [a-z0-9][A-Za-z0-9_]*,
// predicates [a-z][A-Za-z0-9_]*.

#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wfsmr {

struct Term {
    enum class Kind { variable, constant };

    Kind kind = Kind::constant;
    std::string name;

    static Term variable(std::string name) { return {Kind::variable, std::move(name)}; }
    static Term constant(std::string name) { return {Kind::constant, std::move(name)}; }

    bool is_variable() const { return kind == Kind::variable; }

    friend auto operator<=>(const Term&, const Term&) = default;
};

struct Atom {
    std::string predicate;
    std::vector<Term> args;

    std::size_t arity() const { return args.size(); }
    bool is_ground() const;

    friend auto operator<=>(const Atom&, const Atom&) = default;
};

struct Literal {
    Atom atom;
    bool negated = false;

    friend auto operator<=>(const Literal&, const Literal&) = default;
};

struct Rule {
    Atom head;
    std::vector<Literal> body;

    bool is_fact() const { return body.empty(); }
    bool is_definite() const;

    std::vector<const Atom*> positive() const;
    std::vector<const Atom*> negative() const;

    friend bool operator==(const Rule&, const Rule&) = default;
};

/// A ground atom. Constants are kept as their source symbols; encoding to
/// dense ids happens in the store.
struct Fact {
    std::string predicate;
    std::vector<std::string> args;

    friend auto operator<=>(const Fact&, const Fact&) = default;
};

using Signatures = std::map<std::string, std::size_t>;

struct Program {
    std::vector<Rule> rules;
    Signatures signatures;
    std::set<std::string> edb;

    bool empty() const { return rules.empty(); }

    friend bool operator==(const Program&, const Program&) = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column);

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class ArityError : public std::runtime_error {
public:
    ArityError(std::string predicate, std::size_t expected, std::size_t found);

    const std::string& predicate() const { return predicate_; }

private:
    std::string predicate_;
};

struct SafetyViolation {
    std::size_t rule_index = 0;
    std::string rule;
    std::vector<std::string> variables;
};

class SafetyError : public std::runtime_error {
public:
    explicit SafetyError(std::vector<SafetyViolation> violations);

    const std::vector<SafetyViolation>& violations() const { return violations_; }

private:
    std::vector<SafetyViolation> violations_;
};

/// Result of the per-rule safety check. `unsafe` lists, in first-occurrence
/// order, the variables that do not occur in any positive subgoal.
struct SafetyCheck {
    std::vector<std::string> unsafe;

    bool ok() const { return unsafe.empty(); }
};

SafetyCheck check_safety(const Rule& rule);

/// Parses and validates a program. Every rule is checked; all safety
/// violations are reported together in one SafetyError.
Program parse_program(std::string_view text);

/// Parses a facts file: ground atoms terminated by `.`. Duplicates collapse.
std::set<Fact> parse_facts(std::string_view text);

/// Rebuilds signatures and the EDB set from `program.rules` and validates
/// arity consistency and safety.
void validate(Program& program);

/// Checks that `facts` agree with the program's predicate signatures and
/// with each other.
void check_arities(const Signatures& signatures, const std::set<Fact>& facts);

Program definite_subprogram(const Program& program);

std::string to_string(const Term& term);
std::string to_string(const Atom& atom);
std::string to_string(const Rule& rule);
std::string to_string(const Program& program);
std::string to_string(const Fact& fact);

}  // namespace wfsmr
