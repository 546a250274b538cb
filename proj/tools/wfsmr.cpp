#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wfsmr/cli.hpp"

int main(int argc, char** argv) {
    using namespace wfsmr;

    CLI::App app{"wfsmr: well-founded semantics over an in-process MapReduce engine"};
    app.require_subcommand(1);

    std::string program;
    bool explain = false;
    auto* check = app.add_subcommand("check", "parse a program, check safety and print rule plans");
    check->add_option("--program,program", program, "program file")->required();
    check->add_flag("--explain", explain, "print the compiled plan of every rule");

    cli::SolveConfig solve;
    auto* solve_cmd = app.add_subcommand("solve", "compute the well-founded model");
    solve_cmd->add_option("--program", solve.program, "program file")->required();
    solve_cmd->add_option("--facts", solve.facts, "fact file (repeatable)");
    solve_cmd->add_option("--mode", solve.mode, "naive | optimized | both")
        ->check(CLI::IsMember({"naive", "optimized", "both"}));
    solve_cmd->add_option("--workers", solve.workers, "worker threads")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--partitions", solve.partitions, "reduce partitions (default: workers)");
    solve_cmd->add_option("--out", solve.out, "write <prefix>.true and <prefix>.undef");
    solve_cmd->add_option("--job-log", solve.job_log, "write per-job statistics to this file");
    solve_cmd->add_flag("--trace", solve.trace, "print one line per inference step to stderr");
    solve_cmd->add_flag("--semi-naive", solve.semi_naive, "evaluate rules against the delta only");
    solve_cmd->add_flag("--verify", solve.verify, "check fixpoint invariants while solving");

    std::string distribution;
    std::size_t gen_n = 0, gen_k = 1;
    std::string gen_out;
    auto* gen = app.add_subcommand("generate", "write a benchmark fact file");
    gen->add_option("distribution", distribution, "cycle | tree | chain")->required();
    gen->add_option("-n", gen_n, "size")->required()->check(CLI::PositiveNumber);
    gen->add_option("-k", gen_k, "chain stride");
    gen->add_option("--out", gen_out, "output file (default: stdout)");

    bench::BenchConfig bc;
    std::string bench_mode = "optimized";
    std::string csv;
    auto* bench_cmd = app.add_subcommand("bench", "run a benchmark and print CSV rows");
    bench_cmd->add_option("test", bc.test, "win-cycle | win-tree | tc-chain")
        ->required()
        ->check(CLI::IsMember({"win-cycle", "win-tree", "tc-chain"}));
    bench_cmd->add_option("-n", bc.n, "size")->required();
    bench_cmd->add_option("-k", bc.k, "chain stride");
    bench_cmd->add_option("--mode", bench_mode, "naive | optimized")->check(CLI::IsMember({"naive", "optimized"}));
    bench_cmd->add_option("--workers", bc.workers, "worker threads");
    bench_cmd->add_option("--partitions", bc.partitions, "reduce partitions");
    bench_cmd->add_option("--reps", bc.repetitions, "repetitions");
    bench_cmd->add_flag("--semi-naive", bc.semi_naive, "evaluate rules against the delta only");
    bench_cmd->add_flag("--verify", bc.verify, "check fixpoint invariants while solving");
    bench_cmd->add_option("--csv", csv, "append rows to this CSV file");

    std::vector<std::filesystem::path> wc_inputs;
    std::size_t wc_workers = 1, wc_partitions = 0;
    auto* wc = app.add_subcommand("wordcount", "count words in text files");
    wc->add_option("files", wc_inputs, "input files")->required()->check(CLI::ExistingFile);
    wc->add_option("--workers", wc_workers, "worker threads");
    wc->add_option("--partitions", wc_partitions, "reduce partitions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? cli::ok : cli::usage;
    }

    if (*check) return cli::cmd_check(program, explain, std::cout, std::cerr);
    if (*solve_cmd) return cli::cmd_solve(solve, std::cout, std::cerr);
    if (*gen) return cli::cmd_generate(distribution, gen_n, gen_k, gen_out, std::cout, std::cerr);
    if (*bench_cmd) {
        bc.mode = bench_mode == "naive" ? Mode::naive : Mode::optimized;
        return cli::cmd_bench(bc, csv, std::cout, std::cerr);
    }
    if (*wc) return cli::cmd_wordcount(wc_inputs, wc_workers, wc_partitions, std::cout, std::cerr);
    return cli::usage;
}
