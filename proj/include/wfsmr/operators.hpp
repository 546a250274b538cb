#pragma once

// Relational operators as MapReduce jobs: reduce-side join, duplicate
// elimination and anti-join, plus per-rule evaluation chaining them.
//
// Every record flowing between jobs carries one tuple, encoded as its key
// (4 big-endian bytes per column) with an empty value.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wfsmr/mapreduce.hpp"
#include "wfsmr/planner.hpp"
#include "wfsmr/store.hpp"

namespace wfsmr::ops {

mr::Bytes encode(std::span<const Value> values);
Tuple decode(std::string_view bytes);

std::vector<mr::Record> to_records(const std::vector<Tuple>& tuples);
std::vector<Tuple> to_tuples(const std::vector<mr::Record>& records);

/// Input 0 = left tuples, input 1 = right tuples. Map emits
/// <join key, tag + non-key columns>; reduce cross-products the two tag
/// lists and emits each distinct output tuple of the group once.
mr::JobSpec join_job(std::string name, std::vector<std::size_t> left_key, std::vector<std::size_t> right_key,
                     std::size_t left_arity, std::size_t right_arity, std::vector<Column> output);

/// Record-as-key duplicate elimination. A `projection` (left and constant
/// columns only) is applied in the mapper.
mr::JobSpec dedup_job(std::string name, std::optional<std::vector<Column>> projection = std::nullopt);

/// Input 0 = positive tuples, input 1 = negative key tuples. Reduce emits the
/// positive tuples of a key only when no negative record shares it. Values of
/// a group are scanned completely before deciding; arrival order is not
/// assumed.
mr::JobSpec anti_join_job(std::string name, std::vector<std::size_t> key, std::size_t arity);

std::vector<Tuple> single_join(mr::Engine& engine, const std::vector<Tuple>& left, const std::vector<Tuple>& right,
                               const std::vector<std::size_t>& left_key, const std::vector<std::size_t>& right_key,
                               const std::vector<Column>& output);

std::vector<Tuple> dedup(mr::Engine& engine, const std::vector<Tuple>& tuples);

std::vector<Tuple> anti_join(mr::Engine& engine, const std::vector<Tuple>& positive, const std::vector<Tuple>& negative,
                             const std::vector<std::size_t>& key);

/// Selected and projected tuples of one subgoal. Duplicates introduced by
/// projection are kept.
std::vector<Tuple> scan(const SubgoalScan& scan, const FactView& facts);

/// Folds the plan's join chain over `subgoals` (one tuple list per positive
/// subgoal, already scanned), deduplicating after every join, and returns the
/// duplicate-free positive goal.
std::vector<Tuple> multi_join(mr::Engine& engine, const RulePlan& plan, const std::vector<std::vector<Tuple>>& subgoals);

/// Head tuples derivable from the rule with positive subgoals matched in
/// `positive` and negative subgoals absent from `negative`. Duplicate-free.
std::vector<Tuple> eval_rule(mr::Engine& engine, const RulePlan& plan, const FactView& positive, const FactView& negative);

/// As above, but positive subgoal i is read from `sources[i]`. Used for
/// delta-driven evaluation.
std::vector<Tuple> eval_rule(mr::Engine& engine, const RulePlan& plan, std::span<const FactView> sources,
                             const FactView& negative);

/// MapReduce jobs one eval_rule call runs for this plan.
std::size_t jobs_per_evaluation(const RulePlan& plan);

}  // namespace wfsmr::ops
