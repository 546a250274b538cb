#pragma once

// In-process MapReduce executor.
//
// A job maps every record of every input stream, routes each emitted pair to
// a partition by a seeded hash of its key, sorts and groups each partition by
// key, and calls the reducer once per distinct key. Map tasks run in parallel
// over input splits, reduce tasks in parallel over partitions, with a barrier
// in between. When a spill directory is configured, map-side partition
// buffers above the spill threshold are written out as sorted runs and merged
// back during the reduce phase.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wfsmr::mr {

using Bytes = std::string;

struct Record {
    Bytes key;
    Bytes value;

    friend auto operator<=>(const Record&, const Record&) = default;
};

class Emitter {
public:
    virtual void emit(Bytes key, Bytes value) = 0;

protected:
    Emitter() = default;
    ~Emitter() = default;
};

/// `source` is the index of the input stream the record came from.
using Mapper = std::function<void(std::size_t source, const Record& record, Emitter& out)>;
using Reducer = std::function<void(std::string_view key, std::span<const Bytes> values, Emitter& out)>;

struct JobSpec {
    std::string name;
    Mapper mapper;
    Reducer reducer;
    /// Optional map-side pre-aggregation; must be key-preserving.
    Reducer combiner;
    std::vector<std::vector<Record>> inputs;
    /// Copied into JobStats::warnings.
    std::vector<std::string> warnings;
};

struct JobStats {
    std::string name;
    std::size_t map_records_in = 0;
    std::size_t map_records_out = 0;
    /// Records left after map-side combining; 0 without a combiner.
    std::size_t combine_records_out = 0;
    std::size_t reduce_groups = 0;
    std::size_t reduce_records_out = 0;
    std::size_t max_group_size = 0;
    std::size_t oversized_groups = 0;
    std::size_t spilled_runs = 0;
    double millis = 0;
    std::vector<std::string> warnings;

    /// `job=<name> in=<n> map_out=<n> groups=<n> out=<n> ms=<t>` plus
    /// optional extra fields.
    std::string to_line() const;
};

struct JobResult {
    std::vector<Record> output;
    JobStats stats;
};

struct EngineConfig {
    std::size_t workers = 1;
    std::size_t partitions = 1;
    /// Records per map task.
    std::size_t split_records = 4096;
    /// Empty means memory-only.
    std::filesystem::path spill_dir;
    /// Per map task and partition, records buffered before spilling a run.
    std::size_t spill_threshold = 1u << 20;
    /// Groups larger than this are counted as oversized (skew).
    std::size_t group_limit = 1u << 20;
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

class JobError : public std::runtime_error {
public:
    JobError(std::string job, std::string phase, std::string record, std::string what,
             std::size_t stage = npos);

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    const std::string& job() const { return job_; }
    const std::string& phase() const { return phase_; }
    const std::string& record() const { return record_; }
    const std::string& cause() const { return cause_; }
    std::size_t stage() const { return stage_; }

    JobError at_stage(std::size_t stage) const { return JobError(job_, phase_, record_, cause_, stage); }

private:
    std::string job_;
    std::string phase_;
    std::string record_;
    std::string cause_;
    std::size_t stage_;
};

/// Seeded FNV-1a over the key bytes; identical on every platform.
std::uint64_t partition_hash(std::string_view key, std::uint64_t seed);

class Engine {
public:
    explicit Engine(EngineConfig config = {});

    const EngineConfig& config() const { return config_; }

    JobResult run_job(const JobSpec& spec);

    /// Runs `stages` in order. Each stage receives the previous stage's
    /// output (initially `input`) as input stream 0, followed by its own
    /// `inputs`. An empty pipeline returns `input` unchanged.
    std::vector<Record> run_pipeline(std::vector<Record> input, std::vector<JobSpec> stages);

    std::size_t jobs_run() const { return jobs_run_.load(); }
    std::vector<JobStats> stats() const;
    void clear_stats();

    /// One `to_line()` per job, in completion order.
    std::string stats_report() const;

private:
    EngineConfig config_;
    std::atomic<std::size_t> jobs_run_{0};
    mutable std::mutex stats_mutex_;
    std::vector<JobStats> stats_;
};

/// Word frequency job over text lines: map emits <word, "1"> for every
/// maximal run of letters, digits, `_` or `'`; reduce sums. With `combine`
/// the reducer also runs map-side.
JobSpec wordcount_job(std::vector<std::string> lines, bool combine = false);

/// Escapes non-printable bytes for diagnostics.
std::string printable(std::string_view bytes);

}  // namespace wfsmr::mr
