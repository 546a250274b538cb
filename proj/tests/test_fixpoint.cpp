#include <doctest.h>

#include <sstream>

#include "oracle.hpp"
#include "wfsmr/bench.hpp"
#include "wfsmr/fixpoint.hpp"

using namespace wfsmr;

namespace {

struct Setup {
    SymbolTable symbols;
    Problem problem;
    mr::Engine engine;

    Setup(const std::string& program, const std::string& facts, mr::EngineConfig ec = {})
        : problem(make_problem(parse_program(program), parse_facts(facts), symbols)), engine(ec) {}

    Database db(const std::string& facts) {
        Database out;
        for (const auto& f : parse_facts(facts)) out.insert(f, symbols);
        return out;
    }
    oracle::Atoms atoms(const Database& d) const { return oracle::to_atoms(d, symbols); }
};

const std::string kWin = "win(X) :- move(X,Y), not win(Y).";
const std::string kTwoCycle = "move(1,2).\nmove(2,1).";

std::string facts_text(const std::set<Fact>& facts) {
    std::string s;
    for (const auto& f : facts) s += to_string(f) + "\n";
    return s;
}

}  // namespace

TEST_CASE("tp") {
    Setup facts_only("a(1).\nb(2,3).", "");
    Evaluator e1(facts_only.problem, facts_only.engine);
    CHECK(facts_only.atoms(e1.tp(RuleSet::all, Database{}, Database{})) ==
          oracle::Atoms{{"a", {"1"}}, {"b", {"2", "3"}}});

    Setup rule4("p(X,Y) :- a(X,Z), b(Z,Y), not c(X,Z), not d(Z,Y).", "");
    Evaluator e2(rule4.problem, rule4.engine);
    const auto i = rule4.db("a(1,2).\na(1,3).\nb(2,4).\nb(3,5).");
    const auto j = rule4.db("c(1,2).\nd(2,3).");
    // tp returns only heads and base facts; the caller owns I
    CHECK(rule4.atoms(e2.tp(RuleSet::all, i, j)) == oracle::Atoms{{"p", {"1", "5"}}});

    Setup win(kWin, kTwoCycle);
    Evaluator e3(win.problem, win.engine);
    const auto moves = win.db(kTwoCycle);
    CHECK(win.atoms(e3.tp(RuleSet::all, moves, win.db("win(1)."))) ==
          oracle::Atoms{{"move", {"1", "2"}}, {"move", {"2", "1"}}, {"win", {"1"}}});
    CHECK(win.atoms(e3.tp(RuleSet::definite, moves, Database{})) == win.atoms(moves));
}

TEST_CASE("lfp_naive") {
    Setup win(kWin, kTwoCycle);
    Evaluator e(win.problem, win.engine);
    const auto k0 = e.lfp_naive(RuleSet::definite, Database{});
    CHECK(k0 == win.db(kTwoCycle));
    CHECK(win.atoms(e.lfp_naive(RuleSet::all, k0)) ==
          oracle::Atoms{{"move", {"1", "2"}}, {"move", {"2", "1"}}, {"win", {"1"}}, {"win", {"2"}}});

    Setup empty("", "");
    Evaluator e2(empty.problem, empty.engine);
    CHECK(e2.lfp_naive(RuleSet::all, Database{}).empty());
}

TEST_CASE("opt_lfp") {
    Setup win(kWin, kTwoCycle);
    Evaluator e(win.problem, win.engine);
    const auto k0 = e.opt_lfp(RuleSet::definite, Database{}, Database{});
    CHECK(k0 == win.db(kTwoCycle));
    CHECK(win.atoms(e.opt_lfp(RuleSet::all, k0, k0)) == oracle::Atoms{{"win", {"1"}}, {"win", {"2"}}});
    const auto full = e.lfp_naive(RuleSet::all, k0);
    CHECK(e.opt_lfp(RuleSet::all, full, k0).empty());
}

TEST_CASE("opt_lfp completes any subset of the least fixpoint") {
    for (bool semi : {false, true}) {
        Setup tc(std::string(bench::builtin_source("tc-neg")), facts_text(bench::gen_chain(8, 2)));
        SolverOptions opts;
        opts.semi_naive = semi;
        Evaluator e(tc.problem, tc.engine, opts);
        const auto j = e.lfp_naive(RuleSet::definite, Database{});
        const auto lfp = e.lfp_naive(RuleSet::all, j);
        Database start;
        std::size_t n = 0;
        for (const auto& f : lfp.facts(tc.symbols))
            if (n++ % 3 == 0) start.insert(f, tc.symbols);
        const auto s = e.opt_lfp(RuleSet::all, start, j);
        CHECK(disjoint(s, start));
        CHECK(unite(s, start) == lfp);
    }
}

TEST_CASE("two-cycle partition") {
    for (auto mode : {Mode::naive, Mode::optimized}) {
        Setup win(kWin, kTwoCycle);
        const auto r = solve(win.problem, win.engine, mode);
        CHECK(win.atoms(r.true_facts) == oracle::Atoms{{"move", {"1", "2"}}, {"move", {"2", "1"}}});
        CHECK(win.atoms(r.undefined_facts) == oracle::Atoms{{"win", {"1"}}, {"win", {"2"}}});
        CHECK(classify({"win", {"1"}}, r, win.symbols) == TruthValue::Undefined);
        CHECK(classify({"move", {"1", "2"}}, r, win.symbols) == TruthValue::True);
        CHECK(classify({"win", {"99"}}, r, win.symbols) == TruthValue::False);
        CHECK(classify({"move", {"2", "2"}}, r, win.symbols) == TruthValue::False);
        CHECK_THROWS_AS(classify({"lose", {"1"}}, r, win.symbols), std::invalid_argument);
        CHECK_THROWS_AS(classify({"win", {"1", "2"}}, r, win.symbols), std::invalid_argument);
    }
}

TEST_CASE("smallest tree") {
    for (auto mode : {Mode::naive, Mode::optimized}) {
        Setup win(kWin, "move(1,2).\nmove(1,3).");
        const auto r = solve(win.problem, win.engine, mode);
        CHECK(win.atoms(r.true_facts) ==
              oracle::Atoms{{"move", {"1", "2"}}, {"move", {"1", "3"}}, {"win", {"1"}}});
        CHECK(r.undefined_facts.empty());
    }
}

TEST_CASE("definite programs have no undefined atoms") {
    const std::string tc = "tc(X,Y) :- e(X,Y).\ntc(X,Y) :- e(X,Z), tc(Z,Y).";
    Setup s(tc, "e(1,2).\ne(2,3).\ne(3,1).\ne(4,4).");
    const auto r = solve(s.problem, s.engine, Mode::optimized);
    CHECK(r.undefined_facts.empty());
    CHECK(s.atoms(r.true_facts) == oracle::lfp(oracle::ground(parse_program(tc), parse_facts("e(1,2).\ne(2,3).\ne(3,1).\ne(4,4).")), {}));
}

TEST_CASE("facts-only input takes one inference step") {
    Setup s("", "a(1).\nb(2).");
    const auto r = solve(s.problem, s.engine, Mode::optimized);
    CHECK(r.stats.steps == 1);
    CHECK(r.true_facts.count() == 2);
    CHECK(r.undefined_facts.empty());
}

TEST_CASE("optimized and naive agree on gen_chain(8,2)") {
    Setup s(std::string(bench::builtin_source("tc-neg")), facts_text(bench::gen_chain(8, 2)));
    const auto naive = solve(s.problem, s.engine, Mode::naive);
    const auto opt = solve(s.problem, s.engine, Mode::optimized);
    CHECK(naive.true_facts == opt.true_facts);
    CHECK(naive.undefined_facts == opt.undefined_facts);
    const auto expected = oracle::ground_afp(bench::builtin_program("tc-neg"), bench::gen_chain(8, 2));
    CHECK(oracle::partition_of(opt, s.symbols) == expected);
}

TEST_CASE("random programs agree with the ground alternating fixpoint") {
    for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
        const auto rc = oracle::random_case(seed);
        const auto expected = oracle::ground_afp(parse_program(rc.program), parse_facts(rc.facts));
        for (auto mode : {Mode::naive, Mode::optimized}) {
            for (bool semi : {false, true}) {
                mr::EngineConfig ec;
                ec.workers = 1 + seed % 3;
                ec.partitions = 1 + seed % 4;
                Setup s(rc.program, rc.facts, ec);
                SolverOptions opts;
                opts.semi_naive = semi;
                opts.verify = true;
                opts.check_preconditions = true;
                const auto r = solve(s.problem, s.engine, mode, opts);
                CHECK_MESSAGE(oracle::partition_of(r, s.symbols) == expected,
                              "seed " << seed << " mode " << to_string(mode) << "\n" << rc.program << rc.facts);
            }
        }
    }
}

TEST_CASE("storage ledger and step trace") {
    for (std::uint64_t seed = 2000; seed < 2060; ++seed) {
        const auto rc = oracle::random_case(seed);
        oracle::AfpTrace trace;
        oracle::ground_afp(parse_program(rc.program), parse_facts(rc.facts), &trace);
        // along the ground sequence K grows, U shrinks and K stays inside U
        for (std::size_t i = 0; i + 1 < trace.k.size(); ++i) {
            CHECK(std::includes(trace.k[i + 1].begin(), trace.k[i + 1].end(), trace.k[i].begin(), trace.k[i].end()));
            CHECK(std::includes(trace.u[i].begin(), trace.u[i].end(), trace.u[i + 1].begin(), trace.u[i + 1].end()));
            CHECK(std::includes(trace.u[i].begin(), trace.u[i].end(), trace.k[i].begin(), trace.k[i].end()));
        }

        Setup s(rc.program, rc.facts);
        SolverOptions opts;
        opts.verify = true;
        std::ostringstream log;
        opts.trace = &log;
        const auto r = solve(s.problem, s.engine, Mode::optimized, opts);
        CHECK(r.stats.peak_sets <= 3);
        REQUIRE(r.stats.trace.size() == r.stats.steps);
        for (std::size_t i = 0; i + 1 < r.stats.trace.size(); ++i) {
            const auto& a = r.stats.trace[i];
            const auto& b = r.stats.trace[i + 1];
            CHECK(a.known <= b.known);
            CHECK(b.known + b.possible_only <= a.known + a.possible_only);
        }
        const auto text = log.str();
        CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == r.stats.steps);

        const auto naive = solve(s.problem, s.engine, Mode::naive, opts);
        CHECK(naive.stats.peak_sets <= 4);
    }
}

TEST_CASE("cycles of every small length") {
    for (std::size_t n = 1; n <= 12; ++n) {
        const auto facts = bench::gen_cycle(n);
        const auto expected = oracle::ground_afp(bench::builtin_program("win-not-win"), facts);
        Setup s(kWin, facts_text(facts));
        const auto r = solve(s.problem, s.engine, Mode::optimized);
        CHECK(oracle::partition_of(r, s.symbols) == expected);
        CHECK(r.undefined_facts.count() == n);
    }
}

TEST_CASE("trees agree with the game oracle") {
    for (std::size_t n = 1; n <= 63; n = 2 * n + 1) {
        const auto facts = bench::gen_tree(n);
        const auto game = oracle::solve_game(facts);
        Setup s(kWin, facts_text(facts));
        const auto r = solve(s.problem, s.engine, Mode::optimized);
        CHECK(r.undefined_facts.empty());
        CHECK(game.drawn.empty());
        oracle::Atoms won;
        for (const auto& x : game.won) won.insert({"win", {x}});
        oracle::Atoms got;
        for (const auto& f : s.atoms(r.true_facts))
            if (f.predicate == "win") got.insert(f);
        CHECK(got == won);
    }
}

TEST_CASE("semi-naive evaluation derives less and agrees") {
    Setup s(std::string(bench::builtin_source("tc-neg")), facts_text(bench::gen_chain(40, 4)));
    SolverOptions semi;
    semi.semi_naive = true;
    const auto plain = solve(s.problem, s.engine, Mode::optimized);
    const auto fast = solve(s.problem, s.engine, Mode::optimized, semi);
    CHECK(plain.true_facts == fast.true_facts);
    CHECK(plain.undefined_facts == fast.undefined_facts);
    CHECK(fast.stats.derived < plain.stats.derived);
}

TEST_CASE("arity conflicts between program and facts are rejected") {
    SymbolTable symbols;
    CHECK_THROWS_AS(make_problem(parse_program(kWin), parse_facts("move(1)."), symbols), ArityError);
}

TEST_CASE("max_steps bounds the outer loop") {
    Setup s(std::string(bench::builtin_source("tc-neg")), facts_text(bench::gen_chain(20, 2)));
    SolverOptions opts;
    opts.max_steps = 1;
    CHECK_THROWS(solve(s.problem, s.engine, Mode::optimized, opts));
}
