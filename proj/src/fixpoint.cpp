#include "wfsmr/fixpoint.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <ostream>
#include <sstream>

#include "wfsmr/operators.hpp"

namespace wfsmr {

Problem make_problem(const Program& program, const std::set<Fact>& facts, SymbolTable& symbols,
                     const PlanOptions& options) {
    check_arities(program.signatures, facts);
    Problem p;
    p.signatures = program.signatures;
    for (const auto& f : facts) p.signatures.emplace(f.predicate, f.args.size());
    for (const auto& rule : program.rules) {
        if (!rule.is_fact()) continue;
        Fact f{rule.head.predicate, {}};
        for (const auto& t : rule.head.args) f.args.push_back(t.name);
        p.facts.insert(f, symbols);
    }
    for (const auto& f : facts) p.facts.insert(f, symbols);
    p.plans = compile_program(program, symbols, options);
    return p;
}

std::string to_string(TruthValue v) {
    switch (v) {
        case TruthValue::True: return "true";
        case TruthValue::Undefined: return "undefined";
        case TruthValue::False: return "false";
    }
    return "?";
}

std::string to_string(Mode m) { return m == Mode::naive ? "naive" : "optimized"; }

std::string StepTrace::to_line() const {
    std::ostringstream os;
    os << "step=" << step << " K=" << known << " UminusK=" << possible_only << " new=" << new_facts
       << " jobs=" << jobs;
    return os.str();
}

namespace {

// Tracks which fact sets the driver currently keeps and their sizes.
class StorageLedger {
public:
    explicit StorageLedger(FixpointStats& stats) : stats_(stats) {}

    void hold(const std::string& name, std::size_t size) {
        sets_[name] = size;
        stats_.peak_sets = std::max(stats_.peak_sets, sets_.size());
        std::size_t total = 0;
        for (const auto& [_, n] : sets_) total += n;
        stats_.peak_facts = std::max(stats_.peak_facts, total);
    }

    void drop(const std::string& name) { sets_.erase(name); }

private:
    FixpointStats& stats_;
    std::map<std::string, std::size_t> sets_;
};

void require(bool condition, const std::string& what) {
    if (!condition) throw InvariantViolation(what);
}

std::size_t positive_count(const RulePlan& plan) { return plan.scans.size(); }

}  // namespace

Evaluator::Evaluator(const Problem& problem, mr::Engine& engine, SolverOptions options)
    : problem_(problem), engine_(engine), options_(options) {
    stats_.semi_naive = options_.semi_naive;
}

void Evaluator::reset(Mode mode) {
    stats_ = {};
    stats_.mode = mode;
    stats_.semi_naive = options_.semi_naive;
}

void Evaluator::emit_trace(const StepTrace& t) {
    stats_.trace.push_back(t);
    if (options_.trace) *options_.trace << t.to_line() << '\n';
}

template <typename Sink>
void Evaluator::derive(RuleSet rules, const FactView& known, const FactView& blocking, Sink&& sink) {
    ++stats_.tp_calls;
    for (const auto& [pred, rel] : problem_.facts.relations())
        for (const auto& t : rel) sink(pred, t);
    for (const auto& plan : problem_.plans) {
        if (rules == RuleSet::definite && !plan.definite()) continue;
        for (auto& t : ops::eval_rule(engine_, plan, known, blocking)) {
            ++stats_.derived;
            sink(plan.head_predicate(), t);
        }
    }
}

template <typename Sink>
void Evaluator::derive_delta(RuleSet rules, const FactView& old, const FactView& delta, const FactView& full,
                             const FactView& blocking, Sink&& sink) {
    ++stats_.tp_calls;
    for (const auto& plan : problem_.plans) {
        if (rules == RuleSet::definite && !plan.definite()) continue;
        const auto m = positive_count(plan);
        // instance must use a delta fact at some position i; positions before
        // i read old facts only so that each instance is counted once
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<FactView> sources;
            for (std::size_t j = 0; j < m; ++j) sources.push_back(j < i ? old : j == i ? delta : full);
            for (auto& t : ops::eval_rule(engine_, plan, sources, blocking)) {
                ++stats_.derived;
                sink(plan.head_predicate(), t);
            }
        }
    }
}

Database Evaluator::tp(RuleSet rules, const FactView& known, const FactView& blocking) {
    Database out;
    derive(rules, known, blocking, [&](const std::string& pred, const Tuple& t) { out.insert(pred, t); });
    return out;
}

Database Evaluator::lfp_naive(RuleSet rules, const FactView& blocking) {
    ++stats_.lfp_calls;
    Database current;
    std::size_t iterations = 0;
    while (true) {
        if (++iterations > options_.max_steps)
            throw std::runtime_error("least fixpoint exceeded " + std::to_string(options_.max_steps) + " iterations");
        Database next = tp(rules, current, blocking);
        if (options_.verify) require(is_subset(current, next), "T is not inflationary on the naive lfp sequence");
        if (next.count() == current.count()) break;
        stats_.inserted += next.count() - current.count();
        current = std::move(next);
    }
    stats_.inner_iterations.push_back(iterations);
    return current;
}

Database Evaluator::opt_lfp(RuleSet rules, const FactView& start, const FactView& blocking) {
    if (options_.check_preconditions) {
        auto saved = stats_;
        const Database reference = lfp_naive(rules, blocking);
        stats_ = std::move(saved);
        require(is_subset(start.collect(), reference), "opt_lfp precondition violated: start set exceeds the lfp");
    }

    ++stats_.lfp_calls;
    Database settled;  // S minus the latest delta
    Database delta;    // facts added by the previous iteration
    std::size_t iterations = 0;
    while (true) {
        if (++iterations > options_.max_steps)
            throw std::runtime_error("least fixpoint exceeded " + std::to_string(options_.max_steps) + " iterations");
        const FactView full = start.with(settled).with(delta);
        Database fresh;
        auto keep_new = [&](const std::string& pred, const Tuple& t) {
            if (!full.contains(pred, t)) fresh.insert(pred, t);
        };
        if (options_.semi_naive && iterations > 1)
            derive_delta(rules, start.with(settled), FactView(delta), full, blocking, keep_new);
        else
            derive(rules, full, blocking, keep_new);

        if (fresh.empty()) break;
        const auto added = settled.merge(delta);
        if (options_.verify) require(added == delta.count(), "a fact entered the lfp delta twice");
        stats_.inserted += fresh.count();
        delta = std::move(fresh);
    }
    settled.merge(delta);
    stats_.inner_iterations.push_back(iterations);
    return settled;
}

FixpointResult Evaluator::afp_naive() {
    reset(Mode::naive);
    const auto t0 = std::chrono::steady_clock::now();
    const auto jobs0 = engine_.jobs_run();
    StorageLedger ledger(stats_);

    Database k = lfp_naive(RuleSet::definite, Database{});
    ledger.hold("K", k.count());
    Database u = lfp_naive(RuleSet::all, k);
    ledger.hold("U", u.count());
    if (options_.verify) require(is_subset(k, u), "K0 is not a subset of U0");

    while (true) {
        if (stats_.steps >= options_.max_steps)
            throw std::runtime_error("exceeded " + std::to_string(options_.max_steps) + " inference steps");
        const auto step_jobs = engine_.jobs_run();
        Database k_next = lfp_naive(RuleSet::all, u);
        ledger.hold("K'", k_next.count());
        Database u_next = lfp_naive(RuleSet::all, k_next);
        ledger.hold("U'", u_next.count());
        ++stats_.steps;

        if (options_.verify) {
            require(is_subset(k, k_next), "K is not increasing");
            require(is_subset(u_next, u), "U is not decreasing");
            require(is_subset(k_next, u_next), "K is not a subset of U");
        }
        emit_trace({stats_.steps, k_next.count(), u_next.count() - k_next.count(), k_next.count() - k.count(),
                    engine_.jobs_run() - step_jobs});

        const bool stationary = k_next == k && u_next == u;
        k = std::move(k_next);
        u = std::move(u_next);
        ledger.drop("K'");
        ledger.drop("U'");
        ledger.hold("K", k.count());
        ledger.hold("U", u.count());
        if (stationary) break;
    }

    FixpointResult result;
    result.undefined_facts = subtract(u, k);
    result.true_facts = std::move(k);
    result.signatures = problem_.signatures;
    stats_.jobs = engine_.jobs_run() - jobs0;
    stats_.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.stats = stats_;
    return result;
}

FixpointResult Evaluator::wfs_optimized() {
    reset(Mode::optimized);
    const auto t0 = std::chrono::steady_clock::now();
    const auto jobs0 = engine_.jobs_run();
    StorageLedger ledger(stats_);

    const Database empty;
    ledger.hold("K", 0);
    Database known = opt_lfp(RuleSet::definite, empty, empty);
    ledger.hold("K", known.count());

    Database previous_possible;  // verification snapshot of U - K
    bool have_previous = false;

    while (true) {
        if (stats_.steps >= options_.max_steps)
            throw std::runtime_error("exceeded " + std::to_string(options_.max_steps) + " inference steps");
        const auto step_jobs = engine_.jobs_run();

        // U_i = K_i ∪ opt_lfp(P, K_i, K_i)
        Database possible = opt_lfp(RuleSet::all, known, known);
        ledger.hold("U-K", possible.count());
        if (options_.verify) {
            require(disjoint(known, possible), "U - K overlaps K");
            if (have_previous) require(is_subset(possible, previous_possible), "U is not decreasing");
        }
        ++stats_.steps;

        // K_{i+1} = K_i ∪ opt_lfp(P, K_i, U_i)
        Database gained = opt_lfp(RuleSet::all, known, FactView{&known, &possible});
        ledger.hold("S", gained.count());
        if (options_.verify) require(is_subset(gained, possible), "K is not a subset of U");

        const auto before = known.count();
        known.merge(gained);
        const bool fixpoint = known.count() == before;
        if (options_.verify) require(fixpoint == gained.empty(), "size-based termination disagrees with set equality");
        emit_trace({stats_.steps, known.count(), possible.count() - gained.count(), gained.count(),
                    engine_.jobs_run() - step_jobs});
        ledger.drop("S");
        ledger.hold("K", known.count());

        if (fixpoint) {
            if (options_.verify) {
                auto saved = stats_;
                const Database again = opt_lfp(RuleSet::all, known, known);
                stats_ = std::move(saved);
                require(again == possible, "U changed although K reached its fixpoint");
            }
            FixpointResult result;
            result.true_facts = std::move(known);
            result.undefined_facts = std::move(possible);
            result.signatures = problem_.signatures;
            stats_.jobs = engine_.jobs_run() - jobs0;
            stats_.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            result.stats = stats_;
            return result;
        }

        if (options_.verify) {
            previous_possible = subtract(possible, gained);
            have_previous = true;
        }
        ledger.drop("U-K");
    }
}

FixpointResult solve(const Problem& problem, mr::Engine& engine, Mode mode, const SolverOptions& options) {
    Evaluator evaluator(problem, engine, options);
    return mode == Mode::naive ? evaluator.afp_naive() : evaluator.wfs_optimized();
}

TruthValue classify(const Fact& atom, const FixpointResult& result, const SymbolTable& symbols) {
    auto sig = result.signatures.find(atom.predicate);
    if (sig == result.signatures.end()) throw std::invalid_argument("unknown predicate '" + atom.predicate + "'");
    if (sig->second != atom.args.size())
        throw std::invalid_argument("predicate '" + atom.predicate + "' has arity " + std::to_string(sig->second));
    Tuple t;
    for (const auto& a : atom.args) {
        auto id = symbols.find(a);
        if (!id) return TruthValue::False;
        t.push_back(*id);
    }
    if (result.true_facts.contains(atom.predicate, t)) return TruthValue::True;
    if (result.undefined_facts.contains(atom.predicate, t)) return TruthValue::Undefined;
    return TruthValue::False;
}

}  // namespace wfsmr
