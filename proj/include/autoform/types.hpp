#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace autoform {

// Field order in serialized records follows declaration order.
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Common helpers

// Reals are stored in JSONL as decimal strings with 4 fractional digits
// so re-serialization is byte-stable.
std::string decimal4(double v);

// Accepts both the decimal-string form and plain JSON numbers.
double parse_real(const json& v);

// Single-line dump with invalid UTF-8 replaced rather than thrown on.
std::string dump_line(const json& j);

// ---------------------------------------------------------------------------
// Sources

enum class Source { NuminaMath, Leanabell, Herald, LeanWorkbook, Other };

constexpr int kSourceCount = 5;

const char* to_string(Source s);
Source source_from_string(std::string_view name);
const std::vector<Source>& all_sources();

// ---------------------------------------------------------------------------
// Record identity

// Hex SHA-256 of the normalized natural-language text (composed,
// trimmed, whitespace runs collapsed). Identity is NL-only so overlap
// between prompt pools is well defined. Throws std::invalid_argument if
// the text is empty after normalization.
std::string canonical_id(std::string_view nl_text);

// ---------------------------------------------------------------------------
// NlFlPair

struct Provenance {
    std::string file;
    std::uint64_t line = 0;

    bool operator==(const Provenance&) const = default;
};

// One (natural-language, Lean 4) record; the unit of all curation.
struct NlFlPair {
    std::string id;
    Source source = Source::Other;
    std::string nl_text;
    std::string lean_statement;
    std::string topic;
    std::optional<std::string> injected_answer;
    Provenance provenance;

    json to_json() const;
    static NlFlPair from_json(const json& j);

    // Returns violated-invariant descriptions; empty means the record is
    // a valid corpus record (non-empty NL, sorry-terminated statement,
    // id consistent with nl_text).
    std::vector<std::string> validate() const;

    bool operator==(const NlFlPair&) const = default;
};

// True when the statement's proof ends in `:= by sorry` or `:= sorry`
// (modulo trailing whitespace).
bool has_sorry_termination(std::string_view lean_statement);

// ---------------------------------------------------------------------------
// Compile gate

struct Diagnostic {
    std::string severity; // "error", "warning", "info"
    std::string message;
    std::int64_t line = 0;

    bool operator==(const Diagnostic&) const = default;
};

struct CompileOutcome {
    bool ok = false;
    std::vector<Diagnostic> diagnostics;
    std::int64_t elapsed = 0; // milliseconds
    std::string toolchain_id;

    json to_json() const;
    static CompileOutcome from_json(const json& j);
    std::vector<std::string> validate() const;

    bool operator==(const CompileOutcome&) const = default;
};

// ---------------------------------------------------------------------------
// Judge verdict

struct JudgeVerdict {
    double score = 0.0; // in [0, 1]
    std::string reason;
    std::string raw_response;
    int attempts = 1;
    bool degraded = false; // true when the score was forced to 0 after
                           // exhausted retries

    json to_json() const;
    static JudgeVerdict from_json(const json& j);
    std::vector<std::string> validate() const;

    bool operator==(const JudgeVerdict&) const = default;
};

// ---------------------------------------------------------------------------
// Reward

// Output of the dual-stage reward. Constructed only through the two
// factories, so a non-compiling result can never carry a verdict or a
// nonzero reward.
class RewardResult {
public:
    static RewardResult compile_failed();
    static RewardResult compiled_with(JudgeVerdict verdict);

    bool compiled() const { return compiled_; }
    const std::optional<JudgeVerdict>& verdict() const { return verdict_; }
    double reward() const { return reward_; }

    json to_json() const;
    // Validates the gate invariants; throws std::invalid_argument on a
    // record that claims compiled=false with a verdict or reward.
    static RewardResult from_json(const json& j);

    bool operator==(const RewardResult&) const = default;

private:
    RewardResult() = default;

    bool compiled_ = false;
    std::optional<JudgeVerdict> verdict_;
    double reward_ = 0.0;
};

// ---------------------------------------------------------------------------
// Rollouts

// Default semantic-faithfulness threshold; configurable downstream.
inline constexpr double kDefaultTau = 0.7;

struct RolloutRecord {
    std::string problem_id;
    int rollout_index = 0;
    std::string completion;
    std::optional<std::string> extracted_code;
    std::optional<CompileOutcome> compile; // absent before verification
    std::optional<JudgeVerdict> verdict;
    bool semantic_success = false;
    bool gen_failed = false; // request never produced a completion

    // semantic_success must always equal this recomputation.
    bool recompute_semantic(double tau = kDefaultTau) const;

    json to_json() const;
    static RolloutRecord from_json(const json& j);
    std::vector<std::string> validate(double tau = kDefaultTau) const;

    bool operator==(const RolloutRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Evaluation summary

struct EvalSummary {
    std::string model_id;
    std::string benchmark_id;
    int n = 8;                          // rollouts per problem
    std::map<int, double> compile_pass; // k -> percent
    std::map<int, double> semantic_pass;
    double gap = 0.0; // compile_pass[1] - semantic_pass[1], in pp
    double bo8_mean = 0.0;
    std::optional<double> bo8_mean_nonzero;
    std::uint64_t problem_count = 0;

    json to_json() const;
    static EvalSummary from_json(const json& j);
    std::vector<std::string> validate() const;

    bool operator==(const EvalSummary&) const = default;
};

// ---------------------------------------------------------------------------
// Overlap spec

struct OverlapSpec {
    double rho = 0.0; // overlap fraction
    std::uint64_t grpo_size = 16000;
    std::uint64_t sft_size = 20000;
    std::uint64_t seed = 0;
    std::map<Source, double> source_mix = default_source_mix();

    static std::map<Source, double> default_source_mix();

    json to_json() const;
    static OverlapSpec from_json(const json& j);
    std::vector<std::string> validate() const;

    bool operator==(const OverlapSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Stage manifests

struct DatasetManifest {
    std::string stage;
    std::uint64_t input_count = 0;
    std::uint64_t output_count = 0;
    std::map<std::string, std::uint64_t> per_source;
    std::uint64_t dedup_dropped = 0;
    std::uint64_t rejected = 0; // non-dedup drops (malformed, filtered, unsampled)
    std::optional<double> vet_pass_rate;

    json to_json() const;
    static DatasetManifest from_json(const json& j);
    std::vector<std::string> validate() const;

    bool operator==(const DatasetManifest&) const = default;
};

} // namespace autoform
