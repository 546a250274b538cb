#pragma once

// Subcommand implementations behind the `wfsmr` executable. Each returns a
// process exit code and writes to the given streams.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wfsmr/bench.hpp"
#include "wfsmr/fixpoint.hpp"
#include "wfsmr/mapreduce.hpp"
#include "wfsmr/store.hpp"

namespace wfsmr::cli {

enum ExitCode : int { ok = 0, usage = 1, validation = 2, runtime = 3 };

struct SolveConfig {
    std::filesystem::path program;
    std::vector<std::filesystem::path> facts;
    std::string mode = "optimized";  // naive | optimized | both
    std::size_t workers = 1;
    std::size_t partitions = 0;  // 0: same as workers
    /// Writes <out>.true and <out>.undef; empty prints to the output stream.
    std::filesystem::path out;
    bool trace = false;
    bool semi_naive = false;
    bool verify = false;
    std::filesystem::path job_log;
};

/// Engine settings from worker/partition counts and WFSMR_SPILL_DIR.
mr::EngineConfig engine_config(std::size_t workers, std::size_t partitions);

/// Decoded atoms, one `pred(args).` per line, sorted lexicographically.
std::string render(const Database& db, const SymbolTable& symbols);

int cmd_check(const std::filesystem::path& program, bool explain, std::ostream& out, std::ostream& err);
int cmd_solve(const SolveConfig& config, std::ostream& out, std::ostream& err);
int cmd_generate(const std::string& distribution, std::size_t n, std::size_t k, const std::filesystem::path& output,
                 std::ostream& out, std::ostream& err);
int cmd_wordcount(const std::vector<std::filesystem::path>& inputs, std::size_t workers, std::size_t partitions,
                  std::ostream& out, std::ostream& err);
int cmd_bench(const bench::BenchConfig& config, const std::filesystem::path& csv, std::ostream& out, std::ostream& err);

}  // namespace wfsmr::cli
