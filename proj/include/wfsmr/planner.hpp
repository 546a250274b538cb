#pragma once

// Compiles a safe rule into a left-deep evaluation plan:
//
//   scan(pos_0) -> join(pos_1) -> ... -> join(pos_m)   positive goal
//     -> anti-join(neg_0) -> ... -> anti-join(neg_k)    filtered goal
//     -> head projection
//
// The positive goal keeps the head variables plus every variable shared
// between positive and negative subgoals; by safety that is enough to make
// each anti-join an exact-key lookup.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "wfsmr/program.hpp"
#include "wfsmr/store.hpp"

namespace wfsmr {

/// One output column of a job: a column of the left or right input, or a
/// literal constant.
struct Column {
    enum class Source { left, right, constant };

    Source source = Source::left;
    std::size_t index = 0;
    Value constant = 0;

    static Column left(std::size_t i) { return {Source::left, i, 0}; }
    static Column right(std::size_t i) { return {Source::right, i, 0}; }
    static Column literal(Value v) { return {Source::constant, 0, v}; }

    friend bool operator==(const Column&, const Column&) = default;
};

/// Filters applied to stored tuples before they enter a job: constant
/// arguments and repeated variables.
struct Selection {
    std::vector<std::pair<std::size_t, Value>> constants;
    std::vector<std::pair<std::size_t, std::size_t>> equalities;

    bool matches(const Tuple& t) const;
    bool empty() const { return constants.empty() && equalities.empty(); }
};

/// Reads one subgoal's relation: select, then project onto `schema`.
struct SubgoalScan {
    Atom atom;
    Selection selection;
    std::vector<std::string> schema;
    std::vector<std::size_t> columns;  // atom position for each schema variable
};

struct JoinStep {
    std::vector<std::string> left_schema;
    std::size_t right = 0;  // index into RulePlan::scans
    std::vector<std::string> join_vars;
    std::vector<std::size_t> left_key;
    std::vector<std::size_t> right_key;
    std::vector<std::string> output_schema;
    std::vector<Column> output;
};

struct AntiJoinStep {
    SubgoalScan negative;            // schema = key variables, in subgoal order
    std::vector<std::size_t> key;    // positions in the positive-goal schema
};

struct RulePlan {
    Rule rule;
    std::string label;
    std::vector<SubgoalScan> scans;  // positive subgoals, textual order
    std::vector<JoinStep> joins;
    std::vector<std::string> positive_goal;
    /// Maps the last join output (or scan 0) onto the positive goal.
    std::vector<std::size_t> goal_projection;
    std::vector<AntiJoinStep> anti_joins;
    std::vector<Column> head;  // left = positive-goal column
    std::vector<std::string> warnings;

    bool definite() const { return anti_joins.empty(); }
    const std::string& head_predicate() const { return rule.head.predicate; }
};

struct PlanOptions {
    /// Drop columns not needed by later joins, anti-joins or the head. When
    /// off, every join keeps all variables seen so far.
    bool minimize_projections = true;
};

/// Throws std::invalid_argument for unsafe rules and facts. Constants are
/// interned into `symbols`.
RulePlan compile_rule(const Rule& rule, SymbolTable& symbols, const PlanOptions& options = {});

/// One plan per non-fact rule, in program order.
std::vector<RulePlan> compile_program(const Program& program, SymbolTable& symbols, const PlanOptions& options = {});

/// One line per step.
std::string explain(const RulePlan& plan, const SymbolTable& symbols);

}  // namespace wfsmr
