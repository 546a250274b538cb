#include "wfsmr/bench.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wfsmr::bench {

namespace {

Fact edge(const char* pred, std::size_t a, std::size_t b) {
    return Fact{pred, {std::to_string(a), std::to_string(b)}};
}

constexpr std::string_view kWinNotWin = "win(X) :- move(X,Y), not win(Y).\n";

constexpr std::string_view kTcNeg =
    "tc(X,Y) :- par(X,Y).\n"
    "tc(X,Y) :- par(X,Z), tc(Z,Y).\n"
    "par(X,Y) :- b(X,Y), not q(X,Y).\n"
    "par(X,Y) :- b(X,Y), b(Y,Z), not q(Y,Z).\n"
    "q(X,Y) :- b(Z,X), b(X,Y), not q(Z,X).\n";

}  // namespace

std::set<Fact> gen_cycle(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gen_cycle: n must be >= 1");
    std::set<Fact> out;
    for (std::size_t i = 1; i < n; ++i) out.insert(edge("move", i, i + 1));
    out.insert(edge("move", n, 1));
    return out;
}

std::set<Fact> gen_tree(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gen_tree: n must be >= 1");
    std::set<Fact> out;
    for (std::size_t i = 1; i <= n; ++i) {
        out.insert(edge("move", i, 2 * i));
        out.insert(edge("move", i, 2 * i + 1));
    }
    return out;
}

std::set<Fact> gen_chain(std::size_t n, std::size_t k) {
    if (k < 1 || k >= n) throw std::invalid_argument("gen_chain: requires 1 <= k < n");
    std::set<Fact> out;
    for (std::size_t i = 1; i <= n; ++i) out.insert(edge("b", i, i + k));
    return out;
}

std::size_t chain_levels(std::size_t n, std::size_t k) {
    if (k == 0) throw std::invalid_argument("chain_levels: k must be >= 1");
    return (n + k - 1) / k;
}

std::string_view builtin_source(std::string_view name) {
    if (name == "win-not-win") return kWinNotWin;
    if (name == "tc-neg") return kTcNeg;
    throw std::invalid_argument("unknown builtin program '" + std::string(name) + "'");
}

Program builtin_program(std::string_view name) { return parse_program(builtin_source(name)); }

void BenchConfig::validate() const {
    if (test != "win-cycle" && test != "win-tree" && test != "tc-chain")
        throw std::invalid_argument("unknown benchmark '" + test + "'");
    if (n == 0) throw std::invalid_argument("n must be >= 1");
    if (test == "tc-chain" && (k < 1 || k >= n)) throw std::invalid_argument("tc-chain requires 1 <= k < n");
    if (workers == 0 || partitions == 0) throw std::invalid_argument("workers and partitions must be >= 1");
}

std::string to_csv(const BenchRow& row) {
    std::ostringstream os;
    const auto& c = row.config;
    os << c.test << ',' << c.n << ',' << c.k << ',' << to_string(c.mode) << ',' << c.workers << ',' << c.partitions
       << ',' << row.rep << ',' << row.wall_ms << ',' << row.steps << ',' << row.jobs << ',' << row.peak_facts << ','
       << row.true_count << ',' << row.undefined_count;
    return os.str();
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
    config.validate();
    const bool win = config.test != "tc-chain";
    const auto program = builtin_program(win ? "win-not-win" : "tc-neg");
    const auto facts = config.test == "win-cycle" ? gen_cycle(config.n)
                       : config.test == "win-tree" ? gen_tree(config.n)
                                                   : gen_chain(config.n, config.k);

    std::vector<BenchRow> rows;
    for (std::size_t rep = 0; rep < std::max<std::size_t>(1, config.repetitions); ++rep) {
        mr::EngineConfig ec;
        ec.workers = config.workers;
        ec.partitions = config.partitions;
        mr::Engine engine(ec);
        SolverOptions options;
        options.semi_naive = config.semi_naive;
        options.verify = config.verify;

        const auto t0 = std::chrono::steady_clock::now();
        SymbolTable symbols;
        FixpointResult result;
        try {
            const auto problem = make_problem(program, facts, symbols);
            result = solve(problem, engine, config.mode, options);
        } catch (const std::exception& e) {
            throw std::runtime_error("benchmark " + config.test + " n=" + std::to_string(config.n) +
                                     " k=" + std::to_string(config.k) + " mode=" + to_string(config.mode) + ": " +
                                     e.what());
        }
        const auto t1 = std::chrono::steady_clock::now();

        BenchRow row;
        row.config = config;
        row.rep = rep;
        row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        row.steps = result.stats.steps;
        row.jobs = result.stats.jobs;
        row.peak_facts = result.stats.peak_facts;
        row.true_count = result.true_facts.count();
        row.undefined_count = result.undefined_facts.count();
        row.derived = result.stats.derived;
        rows.push_back(row);
    }
    return rows;
}

void append_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    if (fresh) out << csv_header << '\n';
    for (const auto& r : rows) out << to_csv(r) << '\n';
}

}  // namespace wfsmr::bench
