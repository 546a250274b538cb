#pragma once

// Well-founded model computation by alternating fixpoints.
//
// Two drivers are provided. The naive driver recomputes every least fixpoint
// from the empty set and keeps both consecutive (K, U) pairs. The optimized
// driver starts each least fixpoint from the facts already known to hold in
// it and stores only K, U - K and the delta currently being computed.

#include <cstddef>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "wfsmr/mapreduce.hpp"
#include "wfsmr/planner.hpp"
#include "wfsmr/program.hpp"
#include "wfsmr/store.hpp"

namespace wfsmr {

/// Compiled rules plus base facts.
struct Problem {
    std::vector<RulePlan> plans;
    Database facts;
    Signatures signatures;
};

/// Base facts are the program's empty-body rules plus `facts`. Throws
/// ArityError when the two disagree on a predicate's arity.
Problem make_problem(const Program& program, const std::set<Fact>& facts, SymbolTable& symbols,
                     const PlanOptions& options = {});

enum class RuleSet { all, definite };
enum class Mode { naive, optimized };

enum class TruthValue { True, Undefined, False };

std::string to_string(TruthValue v);
std::string to_string(Mode m);

class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct SolverOptions {
    /// Inner least-fixpoint iterations evaluate only rule instances that use
    /// at least one fact derived in the previous iteration.
    bool semi_naive = false;
    /// Check monotonicity of K and U, the count-based termination test, and
    /// recompute U at the fixpoint.
    bool verify = false;
    /// Check the start-set precondition of every optimized least fixpoint
    /// against a from-scratch computation.
    bool check_preconditions = false;
    std::size_t max_steps = 10000;
    /// Receives one line per inference step when set.
    std::ostream* trace = nullptr;
};

struct StepTrace {
    std::size_t step = 0;
    std::size_t known = 0;          // |K|
    std::size_t possible_only = 0;  // |U - K|
    std::size_t new_facts = 0;      // facts added to K by this step
    std::size_t jobs = 0;

    std::string to_line() const;
};

struct FixpointStats {
    Mode mode = Mode::optimized;
    bool semi_naive = false;
    std::size_t steps = 0;
    std::size_t lfp_calls = 0;
    std::vector<std::size_t> inner_iterations;  // per least-fixpoint call
    std::size_t tp_calls = 0;
    std::size_t jobs = 0;
    /// Head tuples produced by rule evaluation, summed over every T call.
    std::size_t derived = 0;
    /// Facts added to least-fixpoint results.
    std::size_t inserted = 0;
    std::size_t peak_sets = 0;
    std::size_t peak_facts = 0;
    std::vector<StepTrace> trace;
    double millis = 0;
};

struct FixpointResult {
    Database true_facts;
    Database undefined_facts;
    Signatures signatures;
    FixpointStats stats;
};

class Evaluator {
public:
    Evaluator(const Problem& problem, mr::Engine& engine, SolverOptions options = {});

    /// Immediate consequences of `known` w.r.t. `blocking`: base facts plus
    /// the heads of rule instances whose positive subgoals are in `known`
    /// and whose negative subgoals are not in `blocking`.
    Database tp(RuleSet rules, const FactView& known, const FactView& blocking);

    /// Least fixpoint of T w.r.t. `blocking`, iterated from the empty set.
    Database lfp_naive(RuleSet rules, const FactView& blocking);

    /// Returns S with start ∪ S = lfp and start ∩ S = ∅. `start` must be a
    /// subset of the least fixpoint; it is never modified.
    Database opt_lfp(RuleSet rules, const FactView& start, const FactView& blocking);

    FixpointResult afp_naive();
    FixpointResult wfs_optimized();

    const FixpointStats& stats() const { return stats_; }

private:
    template <typename Sink>
    void derive(RuleSet rules, const FactView& known, const FactView& blocking, Sink&& sink);
    template <typename Sink>
    void derive_delta(RuleSet rules, const FactView& old, const FactView& delta, const FactView& full,
                      const FactView& blocking, Sink&& sink);

    void reset(Mode mode);
    void emit_trace(const StepTrace& t);

    const Problem& problem_;
    mr::Engine& engine_;
    SolverOptions options_;
    FixpointStats stats_;
};

FixpointResult solve(const Problem& problem, mr::Engine& engine, Mode mode, const SolverOptions& options = {});

/// True if in the true facts, undefined if in the undefined facts, false
/// otherwise. Throws std::invalid_argument for a predicate the program does
/// not know or a wrong arity.
TruthValue classify(const Fact& atom, const FixpointResult& result, const SymbolTable& symbols);

}  // namespace wfsmr
