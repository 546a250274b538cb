#include "wfsmr/planner.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace wfsmr {

bool Selection::matches(const Tuple& t) const {
    for (const auto& [pos, v] : constants)
        if (t[pos] != v) return false;
    for (const auto& [a, b] : equalities)
        if (t[a] != t[b]) return false;
    return true;
}

namespace {

using Names = std::vector<std::string>;

bool has(const Names& names, const std::string& v) { return std::find(names.begin(), names.end(), v) != names.end(); }

std::size_t index_of(const Names& names, const std::string& v) {
    auto it = std::find(names.begin(), names.end(), v);
    if (it == names.end()) throw std::logic_error("variable " + v + " missing from schema");
    return static_cast<std::size_t>(it - names.begin());
}

void add_unique(Names& names, const std::string& v) {
    if (!has(names, v)) names.push_back(v);
}

Names variables(const Atom& atom) {
    Names out;
    for (const auto& t : atom.args)
        if (t.is_variable()) add_unique(out, t.name);
    return out;
}

// Builds the selection for `atom` and records the first position of every
// variable.
SubgoalScan make_scan(const Atom& atom, SymbolTable& symbols) {
    SubgoalScan scan;
    scan.atom = atom;
    Names seen;
    std::vector<std::size_t> first;
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        const auto& t = atom.args[i];
        if (!t.is_variable()) {
            scan.selection.constants.emplace_back(i, symbols.intern(t.name));
        } else if (has(seen, t.name)) {
            scan.selection.equalities.emplace_back(first[index_of(seen, t.name)], i);
        } else {
            seen.push_back(t.name);
            first.push_back(i);
        }
    }
    // default projection: every distinct variable in order of appearance
    scan.schema = seen;
    scan.columns = first;
    return scan;
}

void project_scan(SubgoalScan& scan, const Names& schema) {
    const auto all = scan.schema;
    const auto cols = scan.columns;
    scan.schema.clear();
    scan.columns.clear();
    for (const auto& v : schema) {
        scan.schema.push_back(v);
        scan.columns.push_back(cols[index_of(all, v)]);
    }
}

std::string schema_string(const Names& names) {
    std::string s = "(";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) s += ',';
        s += names[i];
    }
    return s + ")";
}

}  // namespace

RulePlan compile_rule(const Rule& rule, SymbolTable& symbols, const PlanOptions& options) {
    if (rule.is_fact()) throw std::invalid_argument("cannot compile a fact: " + to_string(rule));
    if (auto check = check_safety(rule); !check.ok())
        throw std::invalid_argument("cannot compile unsafe rule " + to_string(rule) + " (variable " + check.unsafe.front() +
                                    ")");

    RulePlan plan;
    plan.rule = rule;
    plan.label = rule.head.predicate;

    const auto positives = rule.positive();
    const auto negatives = rule.negative();

    Names positive_vars;
    for (const auto* a : positives)
        for (const auto& v : variables(*a)) add_unique(positive_vars, v);

    // positive goal: head variables plus variables shared by positive and
    // negative subgoals, in order of first appearance in the positive subgoals
    Names wanted = variables(rule.head);
    for (const auto* a : negatives)
        for (const auto& v : variables(*a)) add_unique(wanted, v);
    for (const auto& v : positive_vars)
        if (has(wanted, v)) plan.positive_goal.push_back(v);

    for (const auto* a : positives) plan.scans.push_back(make_scan(*a, symbols));

    // needed_after[j]: variables consumed once subgoals 0..j have been joined
    std::vector<Names> needed_after(positives.size());
    for (std::size_t j = 0; j < positives.size(); ++j) {
        Names needed = plan.positive_goal;
        for (std::size_t l = j + 1; l < positives.size(); ++l)
            for (const auto& v : variables(*positives[l])) add_unique(needed, v);
        needed_after[j] = std::move(needed);
    }

    if (positives.size() == 1) {
        project_scan(plan.scans[0], plan.positive_goal);
    } else if (positives.size() > 1 && options.minimize_projections) {
        Names keep;
        for (const auto& v : plan.scans[0].schema)
            if (has(needed_after[0], v)) keep.push_back(v);
        project_scan(plan.scans[0], keep);
    }

    Names left = positives.empty() ? Names{} : plan.scans[0].schema;
    for (std::size_t j = 1; j < positives.size(); ++j) {
        auto& right = plan.scans[j];
        JoinStep step;
        step.left_schema = left;
        step.right = j;
        for (const auto& v : right.schema)
            if (has(left, v)) step.join_vars.push_back(v);

        if (options.minimize_projections) {
            Names keep;
            for (const auto& v : right.schema)
                if (has(step.join_vars, v) || has(needed_after[j], v)) keep.push_back(v);
            project_scan(right, keep);
        }
        for (const auto& v : step.join_vars) {
            step.left_key.push_back(index_of(left, v));
            step.right_key.push_back(index_of(right.schema, v));
        }

        Names out;
        const bool last = j + 1 == positives.size();
        if (options.minimize_projections && last) {
            out = plan.positive_goal;
        } else {
            for (const auto& v : left)
                if (!options.minimize_projections || has(needed_after[j], v)) out.push_back(v);
            for (const auto& v : right.schema)
                if (!has(out, v) && (!options.minimize_projections || has(needed_after[j], v))) out.push_back(v);
        }
        for (const auto& v : out)
            step.output.push_back(has(left, v) ? Column::left(index_of(left, v))
                                               : Column::right(index_of(right.schema, v)));
        step.output_schema = out;
        if (step.join_vars.empty())
            plan.warnings.push_back("cartesian product: " + to_string(*positives[j - 1]) + " and " +
                                    to_string(*positives[j]) + " share no variable");
        left = out;
        plan.joins.push_back(std::move(step));
    }

    for (const auto& v : plan.positive_goal) plan.goal_projection.push_back(index_of(left, v));

    for (const auto* a : negatives) {
        AntiJoinStep step;
        step.negative = make_scan(*a, symbols);
        for (const auto& v : step.negative.schema) {
            if (!has(plan.positive_goal, v))
                throw std::logic_error("anti-join key variable " + v + " missing from positive goal");
            step.key.push_back(index_of(plan.positive_goal, v));
        }
        plan.anti_joins.push_back(std::move(step));
    }

    for (const auto& t : rule.head.args)
        plan.head.push_back(t.is_variable() ? Column::left(index_of(plan.positive_goal, t.name))
                                            : Column::literal(symbols.intern(t.name)));
    return plan;
}

std::vector<RulePlan> compile_program(const Program& program, SymbolTable& symbols, const PlanOptions& options) {
    std::vector<RulePlan> plans;
    for (std::size_t i = 0; i < program.rules.size(); ++i) {
        if (program.rules[i].is_fact()) continue;
        plans.push_back(compile_rule(program.rules[i], symbols, options));
        plans.back().label = "r" + std::to_string(i + 1) + ":" + program.rules[i].head.predicate;
    }
    return plans;
}

std::string explain(const RulePlan& plan, const SymbolTable& symbols) {
    std::ostringstream os;
    os << "rule " << plan.label << ": " << to_string(plan.rule) << '\n';
    auto selection = [&](const SubgoalScan& s) {
        std::string out;
        for (const auto& [pos, v] : s.selection.constants)
            out += " where #" + std::to_string(pos) + "=" + symbols.symbol(v);
        for (const auto& [a, b] : s.selection.equalities)
            out += " where #" + std::to_string(a) + "=#" + std::to_string(b);
        return out;
    };
    if (plan.scans.empty()) {
        os << "  scan   unit ()\n";
    } else {
        const auto& s = plan.scans[0];
        os << "  scan   " << to_string(s.atom) << " -> " << schema_string(s.schema) << selection(s) << '\n';
    }
    for (const auto& j : plan.joins) {
        const auto& r = plan.scans[j.right];
        os << "  join   " << schema_string(j.left_schema) << " with " << to_string(r.atom) << " -> "
           << schema_string(r.schema) << selection(r) << " on " << schema_string(j.join_vars) << " -> "
           << schema_string(j.output_schema) << '\n';
        os << "  dedup  " << schema_string(j.output_schema) << '\n';
    }
    os << "  goal   " << schema_string(plan.positive_goal) << '\n';
    for (const auto& a : plan.anti_joins)
        os << "  anti   not " << to_string(a.negative.atom) << " on " << schema_string(a.negative.schema)
           << selection(a.negative) << '\n';
    os << "  head   " << to_string(plan.rule.head) << " + dedup\n";
    for (const auto& w : plan.warnings) os << "  warning: " << w << '\n';
    return os.str();
}

}  // namespace wfsmr
