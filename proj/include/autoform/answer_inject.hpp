#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/types.hpp"

namespace autoform::inject {

// One successful answer extraction from a Lean statement.
struct AnswerExtraction {
    std::string pattern_id;
    std::string value_text;    // answer rendered as display text
    std::size_t span_begin = 0; // byte range of the matched value in the
    std::size_t span_end = 0;   // original statement

    bool operator==(const AnswerExtraction&) const = default;
};

// A parsed theorem conclusion: the text between the signature colon and
// the final `:=`, with its byte offset in the full statement.
struct GoalView {
    std::string_view statement;
    std::string_view goal;
    std::size_t goal_begin = 0;
};

std::optional<GoalView> split_goal(std::string_view lean_statement);

struct PatternDef {
    std::string id;
    std::string description;
    std::function<std::optional<AnswerExtraction>(const GoalView&)> match;
};

// Ordered answer patterns; earlier entries take precedence. The standard
// registry ships twelve matchers covering the goal shapes that carry a
// concrete answer:
//
//   tendsto_nhds_literal   limit value inside `nhds`/`𝓝`
//   sum_eq_literal         series or product equal to a literal
//   card_eq_literal        cardinality equal to a literal
//   greatest_least_literal IsGreatest/IsLeast with a literal extremum
//   iff_eq_literal         iff-characterization whose side fixes a literal
//   eq_rational_literal    goal `... = a / b`
//   eq_tuple_literal       goal `... = (a, b, ...)`
//   eq_set_builder         goal `... = {...}`
//   interval_mem_literal   membership in Icc/Ico/Ioc/Ioo with literal ends
//   eq_numeric_ident       trailing `= ident` for a named numeric constant
//   bound_literal          closed-form bound `... ≤/≥ literal`
//   eq_literal             plain `... = literal` (catch-all)
class PatternRegistry {
public:
    static const PatternRegistry& standard();

    // Reorders/subsets by id; unknown ids throw.
    PatternRegistry subset(const std::vector<std::string>& ids) const;

    const std::vector<PatternDef>& patterns() const { return patterns_; }
    std::vector<std::string> ids() const;

private:
    std::vector<PatternDef> patterns_;
};

// True iff the text asks for a value rather than a proof (case-
// insensitive keyword match: find, determine, compute, evaluate,
// what is, how many, calculate).
bool classify_find_type(std::string_view nl_text);

// First matching pattern in registry order, or nullopt. Absence is a
// normal outcome.
std::optional<AnswerExtraction> extract_answer(
    std::string_view lean_statement,
    const PatternRegistry& registry = PatternRegistry::standard());

// Appends " Show that the answer is <value>." — idempotent on text that
// already ends with that exact sentence.
std::string inject(std::string_view nl_text,
                   const AnswerExtraction& extraction);

struct InjectStats {
    std::map<std::string, std::uint64_t> per_pattern;
    std::uint64_t injected = 0;
    std::uint64_t extraction_misses = 0; // find-type, no pattern matched
    std::uint64_t non_find_type = 0;
};

// classify -> extract -> inject per record; non-find-type and
// extraction-miss records pass through byte-identical. Injected records
// get injected_answer set and their id recomputed from the new NL text.
InjectStats inject_corpus(
    std::vector<NlFlPair>& records,
    const PatternRegistry& registry = PatternRegistry::standard());

} // namespace autoform::inject
