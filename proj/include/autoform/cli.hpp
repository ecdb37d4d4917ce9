#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "autoform/eval_harness.hpp"
#include "autoform/gateway.hpp"
#include "autoform/types.hpp"

namespace autoform::cli {

// Dispatches {curate, vet, inject, partition, serve-reward, evaluate,
// report, selftest}. Returns 0 on success, 1 on a fatal error, 2 on
// usage errors.
int run(int argc, const char* const* argv);

// In-process gateway backed by the deterministic mocks: the compiler
// fails iff the code contains `--FAIL`, the judge reads `--JUDGE:<float>`
// or derives a hash score.
std::shared_ptr<gateway::RewardEngine> make_mock_engine(
    int compile_parallel = 4, int judge_parallel = 8);

// ---------------------------------------------------------------------------
// Embedded smoke pipeline (selftest and the acceptance suite share it).

std::vector<eval::BenchmarkProblem> smoke_problems(int count = 20);

// Deterministic synthetic completion for one (problem, rollout) slot:
// a fenced lean4 block carrying the mock markers.
std::string smoke_completion(int problem_index, int rollout_index);

void write_smoke_fixture(const std::filesystem::path& path, int problem_count,
                         int n);

struct SmokeResult {
    std::vector<EvalSummary> summaries;
    std::filesystem::path summary_json;
    std::filesystem::path report_txt;
};

// generate -> verify -> summarize -> report, mocks only, into out_dir.
SmokeResult run_smoke(const std::filesystem::path& out_dir,
                      int problem_count = 20, int n = 8);

} // namespace autoform::cli
