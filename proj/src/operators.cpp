#include "wfsmr/operators.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace wfsmr::ops {

mr::Bytes encode(std::span<const Value> values) {
    mr::Bytes out(values.size() * 4, '\0');
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Value v = values[i];
        out[4 * i] = static_cast<char>(v >> 24);
        out[4 * i + 1] = static_cast<char>(v >> 16);
        out[4 * i + 2] = static_cast<char>(v >> 8);
        out[4 * i + 3] = static_cast<char>(v);
    }
    return out;
}

Tuple decode(std::string_view bytes) {
    if (bytes.size() % 4) throw std::invalid_argument("encoded tuple length " + std::to_string(bytes.size()));
    Tuple t(bytes.size() / 4);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + 4 * i;
        t[i] = (Value(p[0]) << 24) | (Value(p[1]) << 16) | (Value(p[2]) << 8) | Value(p[3]);
    }
    return t;
}

std::vector<mr::Record> to_records(const std::vector<Tuple>& tuples) {
    std::vector<mr::Record> out;
    out.reserve(tuples.size());
    for (const auto& t : tuples) out.push_back({encode(t), {}});
    return out;
}

std::vector<Tuple> to_tuples(const std::vector<mr::Record>& records) {
    std::vector<Tuple> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(decode(r.key));
    return out;
}

namespace {

constexpr char kLeft = 'L';
constexpr char kRight = 'R';
constexpr char kPositive = 'P';
constexpr char kNegative = 'N';

std::vector<std::size_t> complement(const std::vector<std::size_t>& key, std::size_t arity) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < arity; ++i)
        if (std::find(key.begin(), key.end(), i) == key.end()) rest.push_back(i);
    return rest;
}

void check_arity(const Tuple& t, std::size_t arity, const char* what) {
    if (t.size() != arity)
        throw std::invalid_argument(std::string(what) + " tuple has " + std::to_string(t.size()) +
                                    " columns, expected " + std::to_string(arity));
}

// Splits a tuple into <key columns, tag + remaining columns>.
std::pair<mr::Bytes, mr::Bytes> split(const Tuple& t, const std::vector<std::size_t>& key,
                                      const std::vector<std::size_t>& rest, char tag) {
    Tuple k, r;
    k.reserve(key.size());
    r.reserve(rest.size());
    for (auto i : key) k.push_back(t[i]);
    for (auto i : rest) r.push_back(t[i]);
    mr::Bytes value(1, tag);
    value += encode(r);
    return {encode(k), std::move(value)};
}

// Inverse of split().
Tuple rebuild(const Tuple& key_values, std::string_view payload, const std::vector<std::size_t>& key,
              const std::vector<std::size_t>& rest) {
    const Tuple r = decode(payload);
    Tuple t(key.size() + rest.size());
    for (std::size_t i = 0; i < key.size(); ++i) t[key[i]] = key_values[i];
    for (std::size_t i = 0; i < rest.size(); ++i) t[rest[i]] = r[i];
    return t;
}

Tuple project(const Tuple& t, const std::vector<Column>& columns) {
    Tuple out;
    out.reserve(columns.size());
    for (const auto& c : columns) {
        switch (c.source) {
            case Column::Source::left: out.push_back(t.at(c.index)); break;
            case Column::Source::constant: out.push_back(c.constant); break;
            case Column::Source::right: throw std::invalid_argument("right column in single-input projection");
        }
    }
    return out;
}

}  // namespace

mr::JobSpec join_job(std::string name, std::vector<std::size_t> left_key, std::vector<std::size_t> right_key,
                     std::size_t left_arity, std::size_t right_arity, std::vector<Column> output) {
    if (left_key.size() != right_key.size()) throw std::invalid_argument("join key width mismatch");
    for (auto i : left_key)
        if (i >= left_arity) throw std::invalid_argument("left join key out of range");
    for (auto i : right_key)
        if (i >= right_arity) throw std::invalid_argument("right join key out of range");
    for (const auto& c : output) {
        if (c.source == Column::Source::left && c.index >= left_arity) throw std::invalid_argument("left column out of range");
        if (c.source == Column::Source::right && c.index >= right_arity)
            throw std::invalid_argument("right column out of range");
    }

    mr::JobSpec spec;
    spec.name = std::move(name);
    if (left_key.empty()) spec.warnings.push_back("empty join key: all records meet in one reduce group");

    auto left_rest = complement(left_key, left_arity);
    auto right_rest = complement(right_key, right_arity);

    spec.mapper = [=](std::size_t source, const mr::Record& rec, mr::Emitter& out) {
        const Tuple t = decode(rec.key);
        if (source == 0) {
            check_arity(t, left_arity, "left");
            auto [k, v] = split(t, left_key, left_rest, kLeft);
            out.emit(std::move(k), std::move(v));
        } else {
            check_arity(t, right_arity, "right");
            auto [k, v] = split(t, right_key, right_rest, kRight);
            out.emit(std::move(k), std::move(v));
        }
    };

    spec.reducer = [=](std::string_view key, std::span<const mr::Bytes> values, mr::Emitter& out) {
        const Tuple key_values = decode(key);
        std::vector<Tuple> lefts, rights;
        for (const auto& v : values) {
            if (v.empty()) throw std::invalid_argument("untagged join value");
            const std::string_view payload(v.data() + 1, v.size() - 1);
            if (v[0] == kLeft)
                lefts.push_back(rebuild(key_values, payload, left_key, left_rest));
            else if (v[0] == kRight)
                rights.push_back(rebuild(key_values, payload, right_key, right_rest));
            else
                throw std::invalid_argument("unknown join tag");
        }
        std::unordered_set<mr::Bytes> emitted;
        Tuple row(output.size());
        for (const auto& l : lefts) {
            for (const auto& r : rights) {
                for (std::size_t i = 0; i < output.size(); ++i) {
                    const auto& c = output[i];
                    row[i] = c.source == Column::Source::left    ? l[c.index]
                             : c.source == Column::Source::right ? r[c.index]
                                                                 : c.constant;
                }
                auto bytes = encode(row);
                if (emitted.insert(bytes).second) out.emit(std::move(bytes), {});
            }
        }
    };
    return spec;
}

mr::JobSpec dedup_job(std::string name, std::optional<std::vector<Column>> projection) {
    mr::JobSpec spec;
    spec.name = std::move(name);
    if (!projection) {
        spec.mapper = [](std::size_t, const mr::Record& rec, mr::Emitter& out) { out.emit(rec.key, {}); };
    } else {
        spec.mapper = [projection = std::move(*projection)](std::size_t, const mr::Record& rec, mr::Emitter& out) {
            out.emit(encode(project(decode(rec.key), projection)), {});
        };
    }
    spec.reducer = [](std::string_view key, std::span<const mr::Bytes>, mr::Emitter& out) {
        out.emit(mr::Bytes(key), {});
    };
    return spec;
}

mr::JobSpec anti_join_job(std::string name, std::vector<std::size_t> key, std::size_t arity) {
    for (auto i : key)
        if (i >= arity) throw std::invalid_argument("anti-join key out of range");
    mr::JobSpec spec;
    spec.name = std::move(name);
    if (key.empty()) spec.warnings.push_back("empty anti-join key: all records meet in one reduce group");
    auto rest = complement(key, arity);

    spec.mapper = [=](std::size_t source, const mr::Record& rec, mr::Emitter& out) {
        if (source == 0) {
            const Tuple t = decode(rec.key);
            check_arity(t, arity, "positive");
            auto [k, v] = split(t, key, rest, kPositive);
            out.emit(std::move(k), std::move(v));
        } else {
            if (rec.key.size() != 4 * key.size()) throw std::invalid_argument("negative tuple does not match key width");
            out.emit(rec.key, mr::Bytes(1, kNegative));
        }
    };

    spec.reducer = [=](std::string_view k, std::span<const mr::Bytes> values, mr::Emitter& out) {
        for (const auto& v : values)
            if (!v.empty() && v[0] == kNegative) return;
        const Tuple key_values = decode(k);
        for (const auto& v : values) {
            if (v.empty() || v[0] != kPositive) throw std::invalid_argument("unknown anti-join tag");
            out.emit(encode(rebuild(key_values, std::string_view(v.data() + 1, v.size() - 1), key, rest)), {});
        }
    };
    return spec;
}

std::vector<Tuple> single_join(mr::Engine& engine, const std::vector<Tuple>& left, const std::vector<Tuple>& right,
                               const std::vector<std::size_t>& left_key, const std::vector<std::size_t>& right_key,
                               const std::vector<Column>& output) {
    const auto arity_of = [](const std::vector<Tuple>& ts, const std::vector<std::size_t>& key,
                             const std::vector<Column>& cols, Column::Source side) {
        if (!ts.empty()) return ts.front().size();
        std::size_t a = 0;
        for (auto i : key) a = std::max(a, i + 1);
        for (const auto& c : cols)
            if (c.source == side) a = std::max(a, c.index + 1);
        return a;
    };
    auto spec = join_job("join", left_key, right_key, arity_of(left, left_key, output, Column::Source::left),
                         arity_of(right, right_key, output, Column::Source::right), output);
    spec.inputs = {to_records(left), to_records(right)};
    return to_tuples(engine.run_job(spec).output);
}

std::vector<Tuple> dedup(mr::Engine& engine, const std::vector<Tuple>& tuples) {
    auto spec = dedup_job("dedup");
    spec.inputs = {to_records(tuples)};
    return to_tuples(engine.run_job(spec).output);
}

std::vector<Tuple> anti_join(mr::Engine& engine, const std::vector<Tuple>& positive, const std::vector<Tuple>& negative,
                             const std::vector<std::size_t>& key) {
    std::size_t arity = 0;
    if (!positive.empty())
        arity = positive.front().size();
    else
        for (auto i : key) arity = std::max(arity, i + 1);
    auto spec = anti_join_job("anti-join", key, arity);
    spec.inputs = {to_records(positive), to_records(negative)};
    return to_tuples(engine.run_job(spec).output);
}

std::vector<Tuple> scan(const SubgoalScan& s, const FactView& facts) {
    std::vector<Tuple> out;
    const auto arity = s.atom.arity();
    for (const auto* rel : facts.parts(s.atom.predicate)) {
        if (rel->arity() != arity) throw ArityError(s.atom.predicate, rel->arity(), arity);
        for (const auto& t : *rel) {
            if (!s.selection.matches(t)) continue;
            Tuple p;
            p.reserve(s.columns.size());
            for (auto c : s.columns) p.push_back(t[c]);
            out.push_back(std::move(p));
        }
    }
    return out;
}

namespace {

std::vector<std::size_t> identity_projection(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

std::vector<mr::JobSpec> join_stages(const RulePlan& plan, const std::vector<std::vector<Tuple>>& subgoals) {
    std::vector<mr::JobSpec> stages;
    for (std::size_t k = 0; k < plan.joins.size(); ++k) {
        const auto& step = plan.joins[k];
        auto join = join_job(plan.label + "/join" + std::to_string(k + 1), step.left_key, step.right_key,
                             step.left_schema.size(), plan.scans[step.right].schema.size(), step.output);
        join.inputs.push_back(to_records(subgoals[step.right]));
        stages.push_back(std::move(join));

        // the dedup after the last join also projects onto the positive goal
        // when the join kept extra columns
        std::optional<std::vector<Column>> projection;
        if (k + 1 == plan.joins.size() && plan.goal_projection != identity_projection(step.output_schema.size())) {
            projection.emplace();
            for (auto g : plan.goal_projection) projection->push_back(Column::left(g));
        }
        stages.push_back(dedup_job(plan.label + "/dedup" + std::to_string(k + 1), std::move(projection)));
    }
    return stages;
}

std::vector<Tuple> first_input(const RulePlan& plan, const std::vector<std::vector<Tuple>>& subgoals) {
    // a rule without positive subgoals starts from the single empty row
    if (plan.scans.empty()) return {Tuple{}};
    return subgoals[0];
}

}  // namespace

std::vector<Tuple> multi_join(mr::Engine& engine, const RulePlan& plan, const std::vector<std::vector<Tuple>>& subgoals) {
    if (subgoals.size() != plan.scans.size()) throw std::invalid_argument("one tuple list per positive subgoal expected");
    auto stages = join_stages(plan, subgoals);
    // a scan may repeat tuples after projection; joins already end in a dedup
    if (plan.joins.empty()) stages.push_back(dedup_job(plan.label + "/goal"));
    return to_tuples(engine.run_pipeline(to_records(first_input(plan, subgoals)), std::move(stages)));
}

std::vector<Tuple> eval_rule(mr::Engine& engine, const RulePlan& plan, std::span<const FactView> sources,
                             const FactView& negative) {
    if (sources.size() != plan.scans.size()) throw std::invalid_argument("one source per positive subgoal expected");
    std::vector<std::vector<Tuple>> subgoals;
    subgoals.reserve(plan.scans.size());
    for (std::size_t i = 0; i < plan.scans.size(); ++i) subgoals.push_back(scan(plan.scans[i], sources[i]));

    auto stages = join_stages(plan, subgoals);
    for (std::size_t k = 0; k < plan.anti_joins.size(); ++k) {
        const auto& step = plan.anti_joins[k];
        auto job = anti_join_job(plan.label + "/anti" + std::to_string(k + 1), step.key, plan.positive_goal.size());
        job.inputs.push_back(to_records(scan(step.negative, negative)));
        stages.push_back(std::move(job));
    }
    stages.push_back(dedup_job(plan.label + "/head", plan.head));
    return to_tuples(engine.run_pipeline(to_records(first_input(plan, subgoals)), std::move(stages)));
}

std::vector<Tuple> eval_rule(mr::Engine& engine, const RulePlan& plan, const FactView& positive,
                             const FactView& negative) {
    std::vector<FactView> sources(plan.scans.size(), positive);
    return eval_rule(engine, plan, sources, negative);
}

std::size_t jobs_per_evaluation(const RulePlan& plan) { return 2 * plan.joins.size() + plan.anti_joins.size() + 1; }

}  // namespace wfsmr::ops
