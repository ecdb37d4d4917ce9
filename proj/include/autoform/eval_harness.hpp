#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "autoform/gateway.hpp"
#include "autoform/types.hpp"

namespace autoform::eval {

// ---------------------------------------------------------------------------
// Benchmarks

struct BenchmarkProblem {
    std::string problem_id;
    std::string nl_text;
    std::string ground_truth;
    std::string benchmark_id;

    json to_json() const;
    static BenchmarkProblem from_json(const json& j);

    bool operator==(const BenchmarkProblem&) const = default;
};

// Loads a benchmark JSONL file; duplicate problem ids are fatal.
std::vector<BenchmarkProblem> load_benchmark(
    const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Generation

struct GenConfig {
    std::string endpoint;
    std::string model;
    double temperature = 1.0; // external baselines typically run 0.6
    int n = 8;                // rollouts per problem
    int max_tokens = 2048;
    std::string system_prompt; // empty -> the shipped generation prompt
    int max_in_flight = 4;
    int retries = 2;
    std::int64_t backoff_ms = 250;
    std::optional<std::uint64_t> seed; // forwarded when the endpoint supports it
    std::string mode = "http";         // "http" | "mock"
    std::string fixture_path;          // completions file for mock mode
    std::string api_key_env = "AUTOFORM_GEN_API_KEY";

    static GenConfig from_json(const json& j);
    std::vector<std::string> validate() const;
    std::string effective_system_prompt() const;
};

class Generator {
public:
    virtual ~Generator() = default;
    // Returns the raw completion text; throws on persistent failure.
    virtual std::string complete(const BenchmarkProblem& problem,
                                 int rollout_index) = 0;
};

// Replays completions from a JSONL fixture keyed by
// (problem_id, rollout_index); a missing key is an explicit error naming
// both.
class FixtureGenerator : public Generator {
public:
    explicit FixtureGenerator(const std::filesystem::path& fixture);

    std::string complete(const BenchmarkProblem& problem,
                         int rollout_index) override;

private:
    std::map<std::pair<std::string, int>, std::string> completions_;
};

// OpenAI-style chat-completions client with retry/backoff.
class HttpGenerator : public Generator {
public:
    explicit HttpGenerator(GenConfig cfg);

    std::string complete(const BenchmarkProblem& problem,
                         int rollout_index) override;

    // Wire format, exposed for protocol tests.
    static json build_request_body(const GenConfig& cfg,
                                   const BenchmarkProblem& problem);

private:
    GenConfig cfg_;
};

std::unique_ptr<Generator> make_generator(const GenConfig& cfg);

struct GenerateStats {
    std::uint64_t requested = 0;
    std::uint64_t skipped = 0; // already present in the checkpoint
    std::uint64_t written = 0;
    std::uint64_t failed = 0; // recorded with gen_failed=true
};

// Issues cfg.n completions per problem and appends raw records to the
// checkpoint file. (problem_id, rollout_index) pairs already present are
// skipped, so an interrupted run resumes where it stopped.
GenerateStats generate_rollouts(const std::vector<BenchmarkProblem>& problems,
                                const GenConfig& cfg, Generator& generator,
                                const std::filesystem::path& checkpoint);

// ---------------------------------------------------------------------------
// Verification

class Verifier {
public:
    struct Item {
        std::string prompt;
        std::string completion;
        std::string ground_truth;
    };
    struct Detail {
        std::optional<std::string> extracted_code;
        CompileOutcome compile;
        std::optional<JudgeVerdict> verdict;
    };

    virtual ~Verifier() = default;
    virtual std::vector<Detail> verify(const std::vector<Item>& items) = 0;
};

// In-process gateway.
class EngineVerifier : public Verifier {
public:
    EngineVerifier(std::shared_ptr<gateway::RewardEngine> engine,
                   int max_in_flight = 8);
    std::vector<Detail> verify(const std::vector<Item>& items) override;

private:
    std::shared_ptr<gateway::RewardEngine> engine_;
    int max_in_flight_;
};

// Remote reward service; compile detail is reduced to what the wire
// carries.
class RemoteVerifier : public Verifier {
public:
    explicit RemoteVerifier(const std::string& base_url);
    std::vector<Detail> verify(const std::vector<Item>& items) override;

private:
    std::string base_url_;
    std::string toolchain_id_;
};

struct VerifyStats {
    std::uint64_t verified = 0;
    std::uint64_t reused = 0; // present in the verified file already
};

// Fills compile/verdict/semantic_success for every record in the raw
// checkpoint, writing `verified_path` in raw-file order. Pairs already
// verified are kept as-is.
VerifyStats verify_rollouts(const std::filesystem::path& raw_path,
                            const std::filesystem::path& verified_path,
                            const std::vector<BenchmarkProblem>& problems,
                            Verifier& verifier, double tau = kDefaultTau);

// ---------------------------------------------------------------------------
// Metrics

// C(n, k) in exact integer arithmetic; n is capped at 62 so the result
// fits u64.
std::uint64_t binomial(int n, int k);

struct PassRational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
};

// Unbiased estimator 1 - C(n-c, k)/C(n, k) as the exact rational
// (C(n,k) - C(n-c,k)) / C(n,k): the probability that a uniformly random
// k-subset of n rollouts contains at least one success.
PassRational pass_at_k_exact(int n, int c, int k);
double pass_at_k(int n, int c, int k);

// Per-problem successes -> benchmark summary. Percentages are means of
// pass_at_k over problems, times 100; gap is C@1 - S@1. Semantic success
// is recomputed from (compile.ok, verdict.score, tau). Problems with
// ragged rollout counts are fatal.
EvalSummary summarize(const std::vector<RolloutRecord>& records,
                      const std::string& model_id,
                      const std::string& benchmark_id,
                      const std::vector<int>& k_list = {1, 2, 4, 8},
                      double tau = kDefaultTau);

struct BestOfN {
    double mean = 0.0;
    std::optional<double> mean_nonzero; // absent when nothing compiles
};

// Per problem, the maximum semantic score over its rollouts
// (non-compiling rollouts score 0); mean over all problems and mean over
// problems with at least one compiling rollout.
BestOfN best_of_n(const std::vector<RolloutRecord>& records,
                  double tau = kDefaultTau);

// ---------------------------------------------------------------------------
// Reports

// Human tables: headline (C@1 C@8 S@1 S@8 gap per benchmark), the full
// compile pass@k table, and the best-of-n score table. Byte-stable for
// identical inputs.
std::string render_table(const std::vector<EvalSummary>& summaries);
std::string render_csv(const std::vector<EvalSummary>& summaries);
json render_json(const std::vector<EvalSummary>& summaries);
std::vector<EvalSummary> parse_summaries(const json& j);

} // namespace autoform::eval
