#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "autoform/types.hpp"

namespace autoform::gateway {

// ---------------------------------------------------------------------------
// Configuration

struct CompilerConfig {
    // {file} is replaced by the scratch-file path.
    std::string command = "lake env lean {file}";
    std::string workdir = ".";
    std::string preamble =
        "import Mathlib\nopen BigOperators Real Nat Topology Rat";
    std::int64_t timeout_ms = 120000;
    int max_parallel = 4;
    std::string toolchain_id = "mathlib-v4.27.0";

    static CompilerConfig from_json(const json& j);
    std::vector<std::string> validate() const;
};

struct JudgeConfig {
    std::string endpoint; // OpenAI-style chat-completions URL
    std::string model = "gemini-flash-3";
    double temperature = 0.0;
    int max_output_tokens = 1024;
    int retries = 3;
    std::int64_t backoff_ms = 250;
    double tau = kDefaultTau; // downstream success threshold
    int max_in_flight = 8;
    std::string api_key_env = "AUTOFORM_JUDGE_API_KEY";

    static JudgeConfig from_json(const json& j);
    std::vector<std::string> validate() const;
};

// ---------------------------------------------------------------------------
// Code-block extraction

// First fenced block labeled lean4/lean; failing that, the first
// unlabeled fenced block; absent otherwise.
std::optional<std::string> extract_lean_block(std::string_view completion);

// ---------------------------------------------------------------------------
// Bounded concurrency

class Semaphore {
public:
    explicit Semaphore(int permits) : permits_(permits) {}

    void acquire()
    {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return permits_ > 0; });
        --permits_;
    }

    void release()
    {
        {
            std::lock_guard lock(mu_);
            ++permits_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int permits_;
};

class SemaphoreGuard {
public:
    explicit SemaphoreGuard(Semaphore& s) : sem_(s) { sem_.acquire(); }
    ~SemaphoreGuard() { sem_.release(); }
    SemaphoreGuard(const SemaphoreGuard&) = delete;
    SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

private:
    Semaphore& sem_;
};

// ---------------------------------------------------------------------------
// Result cache

// Values are stored serialized so a hit returns bytes identical to what
// was originally stored.
class ResultCache {
public:
    struct Entry {
        std::string value;
        std::int64_t stored_at_ms = 0;
    };

    std::optional<std::string> get(const std::string& key);
    void put(const std::string& key, std::string value);

    std::size_t entries() const;
    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }

private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, Entry> map_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
};

// ---------------------------------------------------------------------------
// Backends

class Compiler {
public:
    virtual ~Compiler() = default;
    virtual CompileOutcome typecheck(const std::string& code) = 0;
    virtual std::string toolchain_id() const = 0;
    virtual const char* mode() const = 0;
    virtual bool healthy() const = 0;
};

// Fails iff the code contains the marker `--FAIL`.
class MockCompiler : public Compiler {
public:
    CompileOutcome typecheck(const std::string& code) override;
    std::string toolchain_id() const override { return "mock"; }
    const char* mode() const override { return "mock"; }
    bool healthy() const override { return true; }
};

// Writes preamble + code to a scratch file and runs the configured
// command. A missing executable is a configuration error (thrown), not
// a compile failure.
class CommandCompiler : public Compiler {
public:
    explicit CommandCompiler(CompilerConfig cfg);

    CompileOutcome typecheck(const std::string& code) override;
    std::string toolchain_id() const override { return cfg_.toolchain_id; }
    const char* mode() const override { return "command"; }
    bool healthy() const override;

    // Exposed for diagnostics-parser tests.
    static std::vector<Diagnostic> parse_diagnostics(const std::string& text);

private:
    CompilerConfig cfg_;
    std::atomic<std::uint64_t> scratch_counter_{0};
};

class Judge {
public:
    virtual ~Judge() = default;
    virtual JudgeVerdict judge(const std::string& nl_text,
                               const std::string& candidate,
                               const std::string& ground_truth) = 0;
    virtual std::string model() const = 0;
    virtual const char* mode() const = 0;
    virtual bool healthy() const = 0;
};

// Score comes from a `--JUDGE:<float>` marker in the candidate, else a
// hash of the candidate mapped into [0,1]. Pure function of its inputs.
class MockJudge : public Judge {
public:
    JudgeVerdict judge(const std::string& nl_text,
                       const std::string& candidate,
                       const std::string& ground_truth) override;
    std::string model() const override { return "mock"; }
    const char* mode() const override { return "mock"; }
    bool healthy() const override { return true; }

    static double hash_score(const std::string& candidate);
};

// Renders the rubric prompt, calls an OpenAI-style chat endpoint, and
// parses {"score", "reason"} tolerantly from anywhere in the response.
// Transport or parse failures retry with exponential backoff and end in
// a degraded zero verdict, never an exception.
class HttpJudge : public Judge {
public:
    explicit HttpJudge(JudgeConfig cfg);

    JudgeVerdict judge(const std::string& nl_text,
                       const std::string& candidate,
                       const std::string& ground_truth) override;
    std::string model() const override { return cfg_.model; }
    const char* mode() const override { return "http"; }
    bool healthy() const override;

    // Request body as sent on the wire; exposed for protocol tests.
    static json build_request_body(const JudgeConfig& cfg,
                                   const std::string& nl_text,
                                   const std::string& candidate,
                                   const std::string& ground_truth);

    // Tolerant score extraction: first JSON object in the text carrying
    // a numeric "score". Returns score (unclamped) and reason.
    static std::optional<std::pair<double, std::string>> parse_score(
        const std::string& text);

private:
    JudgeConfig cfg_;
};

// ---------------------------------------------------------------------------
// Reward engine

// Compile gate then judge, with per-backend caches and concurrency
// bounds. Non-compiling completions always earn reward 0.
class RewardEngine {
public:
    RewardEngine(CompilerConfig compiler_cfg, JudgeConfig judge_cfg,
                 std::shared_ptr<Compiler> compiler,
                 std::shared_ptr<Judge> judge);

    struct Detail {
        std::optional<std::string> extracted_code;
        CompileOutcome compile;
        std::optional<JudgeVerdict> verdict;
        RewardResult result = RewardResult::compile_failed();
    };

    Detail evaluate(const std::string& nl_text, const std::string& completion,
                    const std::string& ground_truth);

    RewardResult compute_reward(const std::string& nl_text,
                                const std::string& completion,
                                const std::string& ground_truth);

    CompileOutcome typecheck_cached(const std::string& code);
    JudgeVerdict judge_cached(const std::string& nl_text,
                              const std::string& candidate,
                              const std::string& ground_truth);

    const Compiler& compiler() const { return *compiler_; }
    const Judge& judge_backend() const { return *judge_; }
    const CompilerConfig& compiler_config() const { return compiler_cfg_; }
    const JudgeConfig& judge_config() const { return judge_cfg_; }

    std::uint64_t compiler_calls() const { return compiler_calls_.load(); }
    std::uint64_t judge_calls() const { return judge_calls_.load(); }
    const ResultCache& compile_cache() const { return compile_cache_; }
    const ResultCache& judge_cache() const { return judge_cache_; }

private:
    CompilerConfig compiler_cfg_;
    JudgeConfig judge_cfg_;
    std::shared_ptr<Compiler> compiler_;
    std::shared_ptr<Judge> judge_;
    ResultCache compile_cache_;
    ResultCache judge_cache_;
    Semaphore compile_sem_;
    Semaphore judge_sem_;
    std::atomic<std::uint64_t> compiler_calls_{0};
    std::atomic<std::uint64_t> judge_calls_{0};
};

// ---------------------------------------------------------------------------
// Reward service

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8080; // 0 picks an ephemeral port
    int batch_parallel = 8;
};

// POST /v1/reward — {"items": [{id, prompt, completion, ground_truth}]}
//   -> {"results": [{id, compiled, verdict?, reward, elapsed_ms}]},
//   ids aligned with the request.
// GET /healthz — backend reachability and cache statistics.
class RewardService {
public:
    RewardService(std::shared_ptr<RewardEngine> engine, ServiceOptions options);
    ~RewardService();

    // Health-checks backends, binds and serves on a background thread.
    void start();
    void stop();
    int bound_port() const;

    // Pure handlers, shared between the HTTP layer and in-process tests.
    // handle_reward throws BadRequest for malformed bodies.
    struct BadRequest {
        json body;
    };
    json handle_reward(const json& body) const;
    json handle_health() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace autoform::gateway
