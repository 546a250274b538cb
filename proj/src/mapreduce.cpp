#include "wfsmr/mapreduce.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <optional>
#include <queue>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace wfsmr::mr {

std::string JobStats::to_line() const {
    std::ostringstream os;
    os << "job=" << name << " in=" << map_records_in << " map_out=" << map_records_out
       << " groups=" << reduce_groups << " out=" << reduce_records_out << " ms=" << millis;
    if (combine_records_out) os << " combine_out=" << combine_records_out;
    if (spilled_runs) os << " spilled_runs=" << spilled_runs;
    if (oversized_groups) os << " oversized_groups=" << oversized_groups << " max_group=" << max_group_size;
    for (const auto& w : warnings) os << " warning=\"" << w << '"';
    return os.str();
}

JobError::JobError(std::string job, std::string phase, std::string record, std::string what,
                   std::size_t stage)
    : std::runtime_error((stage == npos ? std::string() : "stage " + std::to_string(stage) + ": ") + "job '" +
                         job + "' failed in " + phase + " on " + record + ": " + what),
      job_(std::move(job)),
      phase_(std::move(phase)),
      record_(std::move(record)),
      cause_(std::move(what)),
      stage_(stage) {}

std::uint64_t partition_hash(std::string_view key, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ seed;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    // final avalanche so that short keys spread over small partition counts
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    return h;
}

std::string printable(std::string_view bytes) {
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned char c : bytes) {
        if (c >= 0x20 && c < 0x7f && c != '\\') {
            out += static_cast<char>(c);
        } else {
            out += "\\x";
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

namespace {

// Runs fn(0..tasks-1) on up to `workers` threads. The first exception wins
// and stops the remaining tasks.
template <typename Fn>
void parallel_for(std::size_t tasks, std::size_t workers, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&] {
        while (!failed.load()) {
            const auto i = next.fetch_add(1);
            if (i >= tasks) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };

    const auto n = std::min(workers, tasks);
    if (n <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n);
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
}

void write_bytes(std::ofstream& out, const Bytes& b) {
    const auto n = static_cast<std::uint32_t>(b.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

bool read_bytes(std::ifstream& in, Bytes& b) {
    std::uint32_t n = 0;
    if (!in.read(reinterpret_cast<char*>(&n), sizeof n)) return false;
    b.resize(n);
    return static_cast<bool>(in.read(b.data(), n));
}

struct SpillRun {
    std::filesystem::path path;
};

// Map-side output of one task: one buffer per partition plus any runs
// already spilled to disk.
class ShuffleBuffer final : public Emitter {
public:
    ShuffleBuffer(const EngineConfig& config, std::string file_prefix)
        : config_(config), prefix_(std::move(file_prefix)), buckets_(config.partitions), runs_(config.partitions) {}

    void emit(Bytes key, Bytes value) override {
        const auto p = config_.partitions == 1 ? 0 : partition_hash(key, config_.seed) % config_.partitions;
        buckets_[p].push_back({std::move(key), std::move(value)});
        ++(combining_ ? combined_ : emitted_);
        if (!config_.spill_dir.empty() && buckets_[p].size() >= config_.spill_threshold) spill(p);
    }

    void apply_combiner(const Reducer& combiner) {
        auto old = std::move(buckets_);
        buckets_.assign(config_.partitions, {});
        combining_ = true;
        std::vector<Bytes> values;
        for (auto& bucket : old) {
            std::sort(bucket.begin(), bucket.end());
            for (std::size_t i = 0; i < bucket.size();) {
                std::size_t j = i;
                values.clear();
                while (j < bucket.size() && bucket[j].key == bucket[i].key) values.push_back(std::move(bucket[j++].value));
                combiner(bucket[i].key, values, *this);
                i = j;
            }
        }
        combining_ = false;
    }

    void seal() {
        for (auto& bucket : buckets_) std::sort(bucket.begin(), bucket.end());
    }

    std::size_t emitted() const { return emitted_; }
    std::size_t combined() const { return combined_; }
    std::vector<Record>& bucket(std::size_t p) { return buckets_[p]; }
    const std::vector<SpillRun>& runs(std::size_t p) const { return runs_[p]; }

    std::size_t spilled_runs() const {
        std::size_t n = 0;
        for (const auto& r : runs_) n += r.size();
        return n;
    }

    void remove_runs() {
        for (auto& rs : runs_)
            for (auto& r : rs) std::filesystem::remove(r.path);
    }

private:
    void spill(std::size_t p) {
        auto& bucket = buckets_[p];
        std::sort(bucket.begin(), bucket.end());
        auto path = config_.spill_dir / (prefix_ + "-p" + std::to_string(p) + "-r" + std::to_string(runs_[p].size()));
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open spill file " + path.string());
        for (const auto& r : bucket) {
            write_bytes(out, r.key);
            write_bytes(out, r.value);
        }
        if (!out) throw std::runtime_error("failed writing spill file " + path.string());
        runs_[p].push_back({std::move(path)});
        bucket.clear();
    }

    const EngineConfig& config_;
    std::string prefix_;
    std::vector<std::vector<Record>> buckets_;
    std::vector<std::vector<SpillRun>> runs_;
    std::size_t emitted_ = 0;
    std::size_t combined_ = 0;
    bool combining_ = false;
};

// A sorted stream of records, either an in-memory bucket or a spill file.
class RunCursor {
public:
    explicit RunCursor(std::vector<Record>& records) : records_(&records) { advance(); }
    explicit RunCursor(const std::filesystem::path& path) : file_(std::make_unique<std::ifstream>(path, std::ios::binary)) {
        if (!*file_) throw std::runtime_error("cannot open spill file " + path.string());
        advance();
    }

    bool valid() const { return current_.has_value(); }
    Record& current() { return *current_; }

    void advance() {
        if (records_) {
            if (index_ < records_->size())
                current_ = std::move((*records_)[index_++]);
            else
                current_.reset();
            return;
        }
        Record r;
        if (read_bytes(*file_, r.key) && read_bytes(*file_, r.value))
            current_ = std::move(r);
        else
            current_.reset();
    }

private:
    std::vector<Record>* records_ = nullptr;
    std::size_t index_ = 0;
    std::unique_ptr<std::ifstream> file_;
    std::optional<Record> current_;
};

class VectorEmitter final : public Emitter {
public:
    explicit VectorEmitter(std::vector<Record>& out) : out_(out) {}
    void emit(Bytes key, Bytes value) override { out_.push_back({std::move(key), std::move(value)}); }

private:
    std::vector<Record>& out_;
};

struct ReduceTally {
    std::size_t groups = 0;
    std::size_t max_group = 0;
    std::size_t oversized = 0;
};

std::atomic<std::uint64_t> job_sequence{0};

}  // namespace

Engine::Engine(EngineConfig config) : config_(std::move(config)) {
    if (config_.partitions == 0) throw std::invalid_argument("partitions must be >= 1");
    if (config_.workers == 0) throw std::invalid_argument("workers must be >= 1");
    if (config_.split_records == 0) config_.split_records = 1;
    if (config_.spill_threshold == 0) config_.spill_threshold = 1;
    if (!config_.spill_dir.empty()) std::filesystem::create_directories(config_.spill_dir);
}

JobResult Engine::run_job(const JobSpec& spec) {
    if (!spec.mapper || !spec.reducer) throw std::invalid_argument("job '" + spec.name + "' lacks a mapper or reducer");
    const auto start = std::chrono::steady_clock::now();
    const auto job_id = job_sequence.fetch_add(1);

    struct Split {
        std::size_t source, begin, end;
    };
    std::vector<Split> splits;
    std::size_t records_in = 0;
    for (std::size_t s = 0; s < spec.inputs.size(); ++s) {
        const auto n = spec.inputs[s].size();
        records_in += n;
        for (std::size_t b = 0; b < n; b += config_.split_records)
            splits.push_back({s, b, std::min(n, b + config_.split_records)});
    }

    std::vector<std::unique_ptr<ShuffleBuffer>> buffers(splits.size());
    auto cleanup = [&] {
        for (auto& b : buffers)
            if (b) b->remove_runs();
    };

    try {
        parallel_for(splits.size(), config_.workers, [&](std::size_t t) {
            const auto& split = splits[t];
            auto buffer = std::make_unique<ShuffleBuffer>(
                config_, "wfsmr-" + std::to_string(::getpid()) + "-j" + std::to_string(job_id) + "-m" + std::to_string(t));
            const auto& input = spec.inputs[split.source];
            for (std::size_t i = split.begin; i < split.end; ++i) {
                try {
                    spec.mapper(split.source, input[i], *buffer);
                } catch (const std::exception& e) {
                    throw JobError(spec.name, "map",
                                   "input " + std::to_string(split.source) + " record " + std::to_string(i) + " key '" +
                                       printable(input[i].key) + "' value '" + printable(input[i].value) + "'",
                                   e.what());
                }
            }
            if (spec.combiner) buffer->apply_combiner(spec.combiner);
            buffer->seal();
            buffers[t] = std::move(buffer);
        });
    } catch (...) {
        cleanup();
        throw;
    }

    const auto partitions = config_.partitions;
    std::vector<std::vector<Record>> outputs(partitions);
    std::vector<ReduceTally> tallies(partitions);

    try {
        parallel_for(partitions, config_.workers, [&](std::size_t p) {
            std::vector<RunCursor> cursors;
            for (auto& b : buffers) {
                for (const auto& run : b->runs(p)) cursors.emplace_back(run.path);
                cursors.emplace_back(b->bucket(p));
            }
            auto greater = [&](std::size_t a, std::size_t b) { return cursors[b].current() < cursors[a].current(); };
            std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(greater)> heap(greater);
            for (std::size_t c = 0; c < cursors.size(); ++c)
                if (cursors[c].valid()) heap.push(c);

            VectorEmitter out(outputs[p]);
            auto& tally = tallies[p];
            Bytes key;
            std::vector<Bytes> values;
            while (!heap.empty()) {
                key = cursors[heap.top()].current().key;
                values.clear();
                while (!heap.empty() && cursors[heap.top()].current().key == key) {
                    const auto c = heap.top();
                    heap.pop();
                    values.push_back(std::move(cursors[c].current().value));
                    cursors[c].advance();
                    if (cursors[c].valid()) heap.push(c);
                }
                ++tally.groups;
                tally.max_group = std::max(tally.max_group, values.size());
                if (values.size() > config_.group_limit) ++tally.oversized;
                try {
                    spec.reducer(key, values, out);
                } catch (const std::exception& e) {
                    throw JobError(spec.name, "reduce", "key '" + printable(key) + "'", e.what());
                }
            }
        });
    } catch (...) {
        cleanup();
        throw;
    }

    JobResult result;
    auto& st = result.stats;
    st.name = spec.name;
    st.map_records_in = records_in;
    st.warnings = spec.warnings;
    for (auto& b : buffers) {
        st.map_records_out += b->emitted();
        st.combine_records_out += b->combined();
        st.spilled_runs += b->spilled_runs();
    }
    cleanup();
    std::size_t total = 0;
    for (const auto& o : outputs) total += o.size();
    result.output.reserve(total);
    for (std::size_t p = 0; p < partitions; ++p) {
        st.reduce_groups += tallies[p].groups;
        st.max_group_size = std::max(st.max_group_size, tallies[p].max_group);
        st.oversized_groups += tallies[p].oversized;
        std::move(outputs[p].begin(), outputs[p].end(), std::back_inserter(result.output));
    }
    st.reduce_records_out = result.output.size();
    st.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    jobs_run_.fetch_add(1);
    {
        std::lock_guard lock(stats_mutex_);
        stats_.push_back(st);
    }
    return result;
}

std::vector<Record> Engine::run_pipeline(std::vector<Record> input, std::vector<JobSpec> stages) {
    for (std::size_t i = 0; i < stages.size(); ++i) {
        auto& stage = stages[i];
        stage.inputs.insert(stage.inputs.begin(), std::move(input));
        try {
            input = run_job(stage).output;
        } catch (const JobError& e) {
            throw e.at_stage(i);
        } catch (const std::exception& e) {
            throw JobError(stage.name, "setup", "-", e.what(), i);
        }
        stage.inputs.clear();
    }
    return input;
}

std::vector<JobStats> Engine::stats() const {
    std::lock_guard lock(stats_mutex_);
    return stats_;
}

void Engine::clear_stats() {
    std::lock_guard lock(stats_mutex_);
    stats_.clear();
}

std::string Engine::stats_report() const {
    std::lock_guard lock(stats_mutex_);
    std::string out;
    for (const auto& s : stats_) {
        out += s.to_line();
        out += '\n';
    }
    return out;
}

JobSpec wordcount_job(std::vector<std::string> lines, bool combine) {
    JobSpec spec;
    spec.name = "wordcount";
    std::vector<Record> input;
    input.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) input.push_back({std::to_string(i), std::move(lines[i])});
    spec.inputs.push_back(std::move(input));

    spec.mapper = [](std::size_t, const Record& rec, Emitter& out) {
        auto word_char = [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '\'' || c >= 0x80; };
        const auto& line = rec.value;
        for (std::size_t i = 0; i < line.size();) {
            if (!word_char(static_cast<unsigned char>(line[i]))) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < line.size() && word_char(static_cast<unsigned char>(line[j]))) ++j;
            out.emit(line.substr(i, j - i), "1");
            i = j;
        }
    };
    spec.reducer = [](std::string_view key, std::span<const Bytes> values, Emitter& out) {
        std::uint64_t count = 0;
        for (const auto& v : values) count += std::stoull(v);
        out.emit(Bytes(key), std::to_string(count));
    };
    if (combine) spec.combiner = spec.reducer;
    return spec;
}

}  // namespace wfsmr::mr
