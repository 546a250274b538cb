#include "wfsmr/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wfsmr/planner.hpp"
#include "wfsmr/program.hpp"

namespace wfsmr::cli {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

// Maps validation failures to exit code 2, everything else to 3.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return validation;
    } catch (const ArityError& e) {
        err << "error: " << e.what() << '\n';
        return validation;
    } catch (const SafetyError& e) {
        err << "error: " << e.what() << '\n';
        return validation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return runtime;
    }
}

}  // namespace

mr::EngineConfig engine_config(std::size_t workers, std::size_t partitions) {
    mr::EngineConfig ec;
    ec.workers = std::max<std::size_t>(1, workers);
    ec.partitions = partitions ? partitions : ec.workers;
    if (const char* dir = std::getenv("WFSMR_SPILL_DIR"); dir && *dir) ec.spill_dir = dir;
    return ec;
}

std::string render(const Database& db, const SymbolTable& symbols) {
    std::vector<std::string> lines;
    for (const auto& f : db.facts(symbols)) lines.push_back(to_string(f));
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

int cmd_check(const std::filesystem::path& program_path, bool explain_plans, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto program = parse_program(read_file(program_path));
        if (program.empty()) {
            err << "warning: " << program_path.string() << " contains no rules\n";
            return ok;
        }
        SymbolTable symbols;
        const auto plans = compile_program(program, symbols);
        std::size_t facts = 0;
        for (const auto& r : program.rules) facts += r.is_fact();
        out << program_path.string() << ": " << program.rules.size() - facts << " rules, " << facts << " facts, "
            << program.signatures.size() << " predicates: ok\n";
        for (const auto& plan : plans) {
            for (const auto& w : plan.warnings) err << "warning: " << plan.label << ": " << w << '\n';
            if (explain_plans) out << explain(plan, symbols);
        }
        return ok;
    });
}

int cmd_solve(const SolveConfig& config, std::ostream& out, std::ostream& err) {
    if (config.mode != "naive" && config.mode != "optimized" && config.mode != "both") {
        err << "error: unknown mode '" << config.mode << "'\n";
        return usage;
    }
    return guarded(err, [&] {
        const auto program = parse_program(read_file(config.program));
        std::set<Fact> facts;
        for (const auto& path : config.facts) {
            auto more = parse_facts(read_file(path));
            facts.insert(more.begin(), more.end());
        }
        SymbolTable symbols;
        const auto problem = make_problem(program, facts, symbols);

        mr::Engine engine(engine_config(config.workers, config.partitions));
        SolverOptions options;
        options.semi_naive = config.semi_naive;
        options.verify = config.verify;
        if (config.trace) options.trace = &err;

        auto run = [&](Mode mode) {
            if (config.trace) err << "# " << to_string(mode) << '\n';
            return solve(problem, engine, mode, options);
        };

        FixpointResult result;
        bool agree = true;
        if (config.mode == "both") {
            const auto naive = run(Mode::naive);
            result = run(Mode::optimized);
            agree = naive.true_facts == result.true_facts && naive.undefined_facts == result.undefined_facts;
        } else {
            result = run(config.mode == "naive" ? Mode::naive : Mode::optimized);
        }

        const auto true_text = render(result.true_facts, symbols);
        const auto undef_text = render(result.undefined_facts, symbols);
        if (config.out.empty()) {
            out << "% true\n" << true_text << "% undefined\n" << undef_text;
        } else {
            write_file(config.out.string() + ".true", true_text);
            write_file(config.out.string() + ".undef", undef_text);
        }
        if (!config.job_log.empty()) write_file(config.job_log, engine.stats_report());

        const auto& st = result.stats;
        err << "true=" << result.true_facts.count() << " undefined=" << result.undefined_facts.count()
            << " steps=" << st.steps << " jobs=" << st.jobs << " peak_sets=" << st.peak_sets
            << " peak_facts=" << st.peak_facts << " ms=" << st.millis << '\n';
        if (config.mode == "both") {
            out << (agree ? "agreement: naive and optimized results are identical\n"
                          : "agreement: MISMATCH between naive and optimized results\n");
            if (!agree) return runtime;
        }
        return ok;
    });
}

int cmd_generate(const std::string& distribution, std::size_t n, std::size_t k, const std::filesystem::path& output,
                 std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        std::set<Fact> facts;
        if (distribution == "cycle")
            facts = bench::gen_cycle(n);
        else if (distribution == "tree")
            facts = bench::gen_tree(n);
        else if (distribution == "chain")
            facts = bench::gen_chain(n, k);
        else {
            err << "error: unknown distribution '" << distribution << "' (cycle, tree, chain)\n";
            return static_cast<int>(usage);
        }
        // numeric order rather than set (string) order
        std::vector<Fact> ordered(facts.begin(), facts.end());
        std::sort(ordered.begin(), ordered.end(), [](const Fact& a, const Fact& b) {
            auto num = [](const Fact& f) {
                std::vector<unsigned long long> v;
                for (const auto& s : f.args) v.push_back(std::stoull(s));
                return v;
            };
            return num(a) < num(b);
        });
        std::string text;
        for (const auto& f : ordered) {
            text += to_string(f);
            text += '\n';
        }
        if (output.empty() || output == "-")
            out << text;
        else
            write_file(output, text);
        return static_cast<int>(ok);
    });
}

int cmd_wordcount(const std::vector<std::filesystem::path>& inputs, std::size_t workers, std::size_t partitions,
                  std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        std::vector<std::string> lines;
        for (const auto& path : inputs) {
            std::istringstream in(read_file(path));
            for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
        }
        mr::Engine engine(engine_config(workers, partitions));
        auto result = engine.run_job(mr::wordcount_job(std::move(lines), true));
        std::sort(result.output.begin(), result.output.end());
        for (const auto& r : result.output) out << r.key << '\t' << r.value << '\n';
        return ok;
    });
}

int cmd_bench(const bench::BenchConfig& config, const std::filesystem::path& csv, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        const auto rows = bench::run_bench(config);
        if (!csv.empty()) bench::append_csv(csv, rows);
        out << bench::csv_header << '\n';
        for (const auto& r : rows) out << bench::to_csv(r) << '\n';
        return ok;
    });
}

}  // namespace wfsmr::cli
