#pragma once

// Dataset generators, the two benchmark programs, and a timing harness.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>

#include "wfsmr/fixpoint.hpp"
#include "wfsmr/program.hpp"

namespace wfsmr::bench {

/// move(1,2), ..., move(n-1,n), move(n,1).
std::set<Fact> gen_cycle(std::size_t n);

/// move(i,2i), move(i,2i+1) for 1 <= i <= n.
std::set<Fact> gen_tree(std::size_t n);

/// b(i,i+k) for 1 <= i <= n; requires 1 <= k < n.
std::set<Fact> gen_chain(std::size_t n, std::size_t k);

/// ceil(n / k): the number of levels the chain values fall into.
std::size_t chain_levels(std::size_t n, std::size_t k);

/// "win-not-win" or "tc-neg".
Program builtin_program(std::string_view name);
std::string_view builtin_source(std::string_view name);

struct BenchConfig {
    std::string test;  // win-cycle | win-tree | tc-chain
    std::size_t n = 0;
    std::size_t k = 0;
    Mode mode = Mode::optimized;
    std::size_t workers = 1;
    std::size_t partitions = 1;
    std::size_t repetitions = 1;
    bool semi_naive = false;
    bool verify = false;

    void validate() const;
};

struct BenchRow {
    BenchConfig config;
    std::size_t rep = 0;
    double wall_ms = 0;
    std::size_t steps = 0;
    std::size_t jobs = 0;
    std::size_t peak_facts = 0;
    std::size_t true_count = 0;
    std::size_t undefined_count = 0;
    std::size_t derived = 0;
};

inline constexpr std::string_view csv_header =
    "test,n,k,mode,workers,partitions,rep,wall_ms,steps,jobs,peak_facts,true_count,undefined_count";

std::string to_csv(const BenchRow& row);

/// Runs `config.repetitions` solver runs, one row each. Timing covers
/// dataset encoding, compilation and solving.
std::vector<BenchRow> run_bench(const BenchConfig& config);

/// Appends rows to `path`, writing the header first if the file is new or
/// empty.
void append_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows);

}  // namespace wfsmr::bench
