#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "autoform/cli.hpp"
#include "autoform/eval_harness.hpp"
#include "autoform/jsonl.hpp"
#include "autoform/rng.hpp"

using namespace autoform;
using namespace autoform::eval;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir()
{
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("autoform_eval_" + std::to_string(::getpid()) +
                          "_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

// Probability that a random k-subset of n rollouts hits one of the
// first c successes, by explicit enumeration of all C(n, k) subsets.
double brute_force_pass(int n, int c, int k)
{
    std::uint64_t total = 0;
    std::uint64_t hit = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) {
            continue;
        }
        ++total;
        if ((mask & ((1u << c) - 1u)) != 0) {
            ++hit;
        }
    }
    return double(hit) / double(total);
}

// Records realizing per-problem (compiling, semantic) counts: semantic
// rollouts score 0.9, compiling-but-unfaithful ones 0.3.
std::vector<RolloutRecord> make_records(
    const std::vector<std::pair<int, int>>& counts, int n)
{
    std::vector<RolloutRecord> records;
    for (std::size_t p = 0; p < counts.size(); ++p) {
        const auto [c_compile, c_sem] = counts[p];
        for (int j = 0; j < n; ++j) {
            RolloutRecord r;
            r.problem_id = "p" + std::to_string(100 + p);
            r.rollout_index = j;
            r.completion = "```lean4\ntheorem x : True := by sorry\n```";
            CompileOutcome compile;
            compile.toolchain_id = "mock";
            compile.ok = j < c_compile;
            r.compile = compile;
            if (compile.ok) {
                JudgeVerdict v;
                v.score = j < c_sem ? 0.9 : 0.3;
                r.verdict = v;
            }
            r.semantic_success = r.recompute_semantic(0.7);
            records.push_back(std::move(r));
        }
    }
    return records;
}

} // namespace

// ---------------------------------------------------------------------------
// pass@k

TEST_CASE("pass_at_k handles the boundary cases")
{
    CHECK(pass_at_k(8, 0, 4) == 0.0);
    CHECK(pass_at_k(8, 8, 1) == 1.0);
    CHECK(pass_at_k(1, 1, 1) == 1.0);
    CHECK(pass_at_k(1, 0, 1) == 0.0);
}

TEST_CASE("pass_at_k(8, 3, 2) equals 9/14")
{
    const auto r = pass_at_k_exact(8, 3, 2);
    CHECK(r.num == 18);
    CHECK(r.den == 28);
    CHECK(pass_at_k(8, 3, 2) == doctest::Approx(9.0 / 14.0));
    CHECK(pass_at_k(8, 3, 2) == brute_force_pass(8, 3, 2));
}

TEST_CASE("pass_at_k equals subset enumeration for every (n, c, k)")
{
    for (int n = 1; n <= 8; ++n) {
        for (int c = 0; c <= n; ++c) {
            for (int k = 1; k <= n; ++k) {
                CAPTURE(n);
                CAPTURE(c);
                CAPTURE(k);
                // Exactly equal: both sides divide the same integers.
                CHECK(pass_at_k(n, c, k) == brute_force_pass(n, c, k));
            }
        }
    }
}

TEST_CASE("pass_at_k rejects bad arguments")
{
    CHECK_THROWS_AS((void)pass_at_k(8, 9, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)pass_at_k(8, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)pass_at_k(8, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)pass_at_k(8, 4, 9), std::invalid_argument);
    CHECK_THROWS_AS((void)binomial(80, 3), std::invalid_argument);
}

TEST_CASE("pass_at_k is nondecreasing in k")
{
    for (int n = 1; n <= 8; ++n) {
        for (int c = 0; c <= n; ++c) {
            double prev = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double value = pass_at_k(n, c, k);
                CHECK(value >= prev);
                prev = value;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// summarize

TEST_CASE("summarize matches a hand computation on five problems")
{
    const std::vector<std::pair<int, int>> counts = {
        {8, 8}, {6, 3}, {0, 0}, {4, 1}, {2, 2}};
    const auto records = make_records(counts, 8);
    const auto s = summarize(records, "model-x", "bench-y");

    CHECK(s.model_id == "model-x");
    CHECK(s.benchmark_id == "bench-y");
    CHECK(s.n == 8);
    CHECK(s.problem_count == 5);

    // C@1 = mean(c/8)*100; hand numbers below.
    CHECK(s.compile_pass.at(1) == doctest::Approx(50.0));
    CHECK(s.semantic_pass.at(1) == doctest::Approx(35.0));
    CHECK(s.gap == doctest::Approx(15.0));
    CHECK(s.compile_pass.at(8) == doctest::Approx(80.0));
    CHECK(s.semantic_pass.at(8) == doctest::Approx(80.0));
    CHECK(s.validate().empty());

    // Best-of-n: maxima 0.9/0.9/0.0/0.9/0.9.
    CHECK(s.bo8_mean == doctest::Approx(0.72));
    REQUIRE(s.bo8_mean_nonzero.has_value());
    CHECK(*s.bo8_mean_nonzero == doctest::Approx(0.9));
}

TEST_CASE("summarize reproduces a known gap")
{
    // All problems identical: C@1 = 75%, S@1 = 50%, gap 25.
    const auto records = make_records(
        {{6, 4}, {6, 4}, {6, 4}, {6, 4}}, 8);
    const auto s = summarize(records, "m", "b");
    CHECK(s.compile_pass.at(1) == doctest::Approx(75.0));
    CHECK(s.semantic_pass.at(1) == doctest::Approx(50.0));
    CHECK(s.gap == doctest::Approx(25.0));
}

TEST_CASE("all-perfect records summarize to 100 everywhere")
{
    const auto records = make_records({{8, 8}, {8, 8}}, 8);
    const auto s = summarize(records, "m", "b");
    for (const int k : {1, 2, 4, 8}) {
        CHECK(s.compile_pass.at(k) == doctest::Approx(100.0));
        CHECK(s.semantic_pass.at(k) == doctest::Approx(100.0));
    }
    CHECK(s.gap == doctest::Approx(0.0));
}

TEST_CASE("ragged rollout counts are fatal with a per-problem report")
{
    auto records = make_records({{4, 2}, {4, 2}}, 8);
    records.pop_back();
    try {
        (void)summarize(records, "m", "b");
        FAIL("expected ragged-count failure");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("p101") != std::string::npos);
    }
}

TEST_CASE("semantic dominance and monotonicity hold on random record sets")
{
    DetRng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::pair<int, int>> counts;
        const int problems = 1 + int(rng.below(6));
        for (int p = 0; p < problems; ++p) {
            const int c = int(rng.below(9));
            const int s = c == 0 ? 0 : int(rng.below(std::uint64_t(c) + 1));
            counts.emplace_back(c, s);
        }
        const auto records = make_records(counts, 8);
        const auto s = summarize(records, "m", "b");
        double prev_c = 0.0, prev_s = 0.0;
        for (const int k : {1, 2, 4, 8}) {
            CHECK(s.semantic_pass.at(k) <= s.compile_pass.at(k) + 1e-9);
            CHECK(s.compile_pass.at(k) >= prev_c - 1e-9);
            CHECK(s.semantic_pass.at(k) >= prev_s - 1e-9);
            prev_c = s.compile_pass.at(k);
            prev_s = s.semantic_pass.at(k);
        }
        CHECK(s.validate().empty());
    }
}

TEST_CASE("raising tau never increases any semantic pass rate")
{
    DetRng rng(77);
    std::vector<RolloutRecord> records;
    for (int p = 0; p < 6; ++p) {
        for (int j = 0; j < 8; ++j) {
            RolloutRecord r;
            r.problem_id = "p" + std::to_string(p);
            r.rollout_index = j;
            CompileOutcome c;
            c.toolchain_id = "mock";
            c.ok = rng.below(4) != 0;
            r.compile = c;
            if (c.ok) {
                JudgeVerdict v;
                v.score = double(rng.below(101)) / 100.0;
                r.verdict = v;
            }
            r.semantic_success = r.recompute_semantic(0.7);
            records.push_back(std::move(r));
        }
    }
    for (const double low : {0.3, 0.5, 0.7}) {
        const auto loose = summarize(records, "m", "b", {1, 2, 4, 8}, low);
        const auto tight =
            summarize(records, "m", "b", {1, 2, 4, 8}, low + 0.2);
        for (const int k : {1, 2, 4, 8}) {
            CHECK(tight.semantic_pass.at(k) <=
                  loose.semantic_pass.at(k) + 1e-9);
        }
    }
}

// ---------------------------------------------------------------------------
// best_of_n

TEST_CASE("best_of_n matches the arithmetic oracle")
{
    // Maxima 0.8 / 0.0 / 0.4 with the middle problem never compiling.
    std::vector<RolloutRecord> records;
    const std::vector<std::vector<double>> scores = {
        {0.8, 0.1}, {-1.0, -1.0}, {0.4, 0.2}};
    for (std::size_t p = 0; p < scores.size(); ++p) {
        for (std::size_t j = 0; j < 2; ++j) {
            RolloutRecord r;
            r.problem_id = "p" + std::to_string(p);
            r.rollout_index = int(j);
            CompileOutcome c;
            c.toolchain_id = "mock";
            c.ok = scores[p][j] >= 0.0;
            r.compile = c;
            if (c.ok) {
                JudgeVerdict v;
                v.score = scores[p][j];
                r.verdict = v;
            }
            r.semantic_success = r.recompute_semantic(0.7);
            records.push_back(std::move(r));
        }
    }
    const auto b = best_of_n(records);
    CHECK(b.mean == doctest::Approx(0.4));
    REQUIRE(b.mean_nonzero.has_value());
    CHECK(*b.mean_nonzero == doctest::Approx(0.6));
}

TEST_CASE("best_of_n when nothing compiles reports mean zero, no nonzero")
{
    const auto records = make_records({{0, 0}, {0, 0}}, 4);
    const auto b = best_of_n(records);
    CHECK(b.mean == 0.0);
    CHECK_FALSE(b.mean_nonzero.has_value());
}

TEST_CASE("best_of_n single perfect problem")
{
    std::vector<RolloutRecord> records;
    RolloutRecord r;
    r.problem_id = "p";
    r.rollout_index = 0;
    r.compile = CompileOutcome{true, {}, 0, "mock"};
    JudgeVerdict v;
    v.score = 1.0;
    r.verdict = v;
    r.semantic_success = true;
    records.push_back(r);
    const auto b = best_of_n(records);
    CHECK(b.mean == doctest::Approx(1.0));
    REQUIRE(b.mean_nonzero.has_value());
    CHECK(*b.mean_nonzero == doctest::Approx(1.0));
}

// ---------------------------------------------------------------------------
// Generation

TEST_CASE("fixture generation produces n records per problem")
{
    const fs::path dir = temp_dir();
    cli::write_smoke_fixture(dir / "fixture.jsonl", 2, 3);
    const auto problems = cli::smoke_problems(2);

    GenConfig cfg;
    cfg.mode = "mock";
    cfg.fixture_path = (dir / "fixture.jsonl").string();
    cfg.n = 3;
    auto generator = make_generator(cfg);
    const auto stats =
        generate_rollouts(problems, cfg, *generator, dir / "rollouts.jsonl");
    CHECK(stats.requested == 6);
    CHECK(stats.written == 6);
    CHECK(stats.skipped == 0);
    CHECK(stats.failed == 0);

    std::set<std::pair<std::string, int>> seen;
    for_each_jsonl(dir / "rollouts.jsonl", [&seen](std::size_t, json&& j) {
        seen.emplace(j.at("problem_id").get<std::string>(),
                     j.at("rollout_index").get<int>());
    });
    CHECK(seen.size() == 6);
    for (const auto& p : problems) {
        for (int i = 0; i < 3; ++i) {
            CHECK(seen.contains({p.problem_id, i}));
        }
    }
}

namespace {

class CountingGenerator : public Generator {
public:
    std::string complete(const BenchmarkProblem& problem,
                         int rollout_index) override
    {
        ++calls_;
        return "```lean4\ntheorem fixed : True := by sorry --JUDGE:0.9\n```"
               "\n-- " +
               problem.problem_id + "/" + std::to_string(rollout_index);
    }
    int calls() const { return calls_; }

private:
    int calls_ = 0;
};

} // namespace

TEST_CASE("generation resumes from the checkpoint")
{
    const fs::path dir = temp_dir();
    const auto problems = cli::smoke_problems(2);
    GenConfig cfg;
    cfg.mode = "mock";
    cfg.n = 3;
    cfg.max_in_flight = 1;

    // Pre-seed 4 of the 6 slots.
    {
        JsonlWriter writer(dir / "rollouts.jsonl");
        for (const auto& [pid, idx] :
             std::vector<std::pair<std::string, int>>{
                 {problems[0].problem_id, 0},
                 {problems[0].problem_id, 1},
                 {problems[0].problem_id, 2},
                 {problems[1].problem_id, 0}}) {
            RolloutRecord r;
            r.problem_id = pid;
            r.rollout_index = idx;
            r.completion = "seeded";
            writer.write(r.to_json());
        }
    }

    CountingGenerator generator;
    const auto stats =
        generate_rollouts(problems, cfg, generator, dir / "rollouts.jsonl");
    CHECK(generator.calls() == 2); // exactly the missing pairs
    CHECK(stats.skipped == 4);
    CHECK(stats.written == 2);

    std::size_t lines = 0;
    for_each_jsonl(dir / "rollouts.jsonl",
                   [&lines](std::size_t, json&&) { ++lines; });
    CHECK(lines == 6);
}

TEST_CASE("a deterministic generator writes identical completions")
{
    const fs::path dir = temp_dir();
    const auto problems = cli::smoke_problems(1);
    GenConfig cfg;
    cfg.mode = "mock";
    cfg.n = 4;

    class EchoGenerator : public Generator {
    public:
        std::string complete(const BenchmarkProblem&, int) override
        {
            return "```lean4\ntheorem fixed : True := by sorry\n```";
        }
    } generator;

    (void)generate_rollouts(problems, cfg, generator, dir / "r.jsonl");
    std::set<std::string> completions;
    for_each_jsonl(dir / "r.jsonl", [&completions](std::size_t, json&& j) {
        completions.insert(j.at("completion").get<std::string>());
    });
    CHECK(completions.size() == 1);
}

TEST_CASE("fixture misses raise an error naming the pair")
{
    const fs::path dir = temp_dir();
    cli::write_smoke_fixture(dir / "fixture.jsonl", 1, 2);
    FixtureGenerator generator(dir / "fixture.jsonl");
    const auto problems = cli::smoke_problems(1);
    CHECK_THROWS_WITH_AS((void)generator.complete(problems[0], 7),
                         doctest::Contains("rollout_index=7"),
                         std::runtime_error);
}

TEST_CASE("generation failures are recorded, not fatal")
{
    const fs::path dir = temp_dir();
    const auto problems = cli::smoke_problems(1);
    GenConfig cfg;
    cfg.mode = "mock";
    cfg.n = 2;
    cfg.max_in_flight = 1;

    class FailingGenerator : public Generator {
    public:
        std::string complete(const BenchmarkProblem&,
                             int rollout_index) override
        {
            if (rollout_index == 1) {
                throw std::runtime_error("boom");
            }
            return "```lean4\ntheorem ok : True := by sorry\n```";
        }
    } generator;

    const auto stats =
        generate_rollouts(problems, cfg, generator, dir / "r.jsonl");
    CHECK(stats.failed == 1);
    CHECK(stats.written == 2);

    std::vector<RolloutRecord> records;
    for_each_jsonl(dir / "r.jsonl", [&records](std::size_t, json&& j) {
        records.push_back(RolloutRecord::from_json(j));
    });
    REQUIRE(records.size() == 2);
    CHECK_FALSE(records[0].gen_failed);
    CHECK(records[1].gen_failed);
    CHECK(records[1].completion.empty());
}

TEST_CASE("the generation request carries the shipped system prompt")
{
    GenConfig cfg;
    cfg.endpoint = "http://example.invalid/v1/chat/completions";
    cfg.model = "some-model";
    cfg.temperature = 1.0;
    BenchmarkProblem p;
    p.problem_id = "x";
    p.nl_text = "Find the value of 1 + 1.";
    const json body = HttpGenerator::build_request_body(cfg, p);
    CHECK(body["model"] == "some-model");
    CHECK(body["temperature"] == 1.0);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"].get<std::string>().find(
              "lean4 code block") != std::string::npos);
    CHECK(body["messages"][1]["content"] == p.nl_text);
}

// ---------------------------------------------------------------------------
// Verification

TEST_CASE("verify_rollouts applies the inclusive threshold")
{
    const fs::path dir = temp_dir();
    const auto problems = cli::smoke_problems(1);
    {
        JsonlWriter writer(dir / "raw.jsonl");
        const std::vector<std::string> markers = {"--JUDGE:0.70",
                                                  "--JUDGE:0.69", "--FAIL"};
        for (std::size_t j = 0; j < markers.size(); ++j) {
            RolloutRecord r;
            r.problem_id = problems[0].problem_id;
            r.rollout_index = int(j);
            r.completion = "```lean4\ntheorem v : True := by sorry " +
                           markers[j] + "\n```";
            writer.write(r.to_json());
        }
    }

    EngineVerifier verifier(cli::make_mock_engine());
    const auto stats = verify_rollouts(dir / "raw.jsonl",
                                       dir / "verified.jsonl", problems,
                                       verifier, 0.7);
    CHECK(stats.verified == 3);

    std::vector<RolloutRecord> records;
    for_each_jsonl(dir / "verified.jsonl", [&records](std::size_t, json&& j) {
        records.push_back(RolloutRecord::from_json(j));
    });
    REQUIRE(records.size() == 3);
    CHECK(records[0].semantic_success);          // 0.70 >= 0.7
    CHECK_FALSE(records[1].semantic_success);    // 0.69 < 0.7
    CHECK_FALSE(records[2].semantic_success);    // does not compile
    CHECK(records[0].compile->ok);
    CHECK_FALSE(records[2].compile->ok);
    CHECK_FALSE(records[2].verdict.has_value()); // judge never ran
    for (const auto& r : records) {
        CHECK(r.validate(0.7).empty());
    }

    // Re-running verifies nothing new.
    const auto again = verify_rollouts(dir / "raw.jsonl",
                                       dir / "verified.jsonl", problems,
                                       verifier, 0.7);
    CHECK(again.verified == 0);
    CHECK(again.reused == 3);
}

TEST_CASE("verification rejects records for unknown problems")
{
    const fs::path dir = temp_dir();
    {
        JsonlWriter writer(dir / "raw.jsonl");
        RolloutRecord r;
        r.problem_id = "ghost";
        writer.write(r.to_json());
    }
    EngineVerifier verifier(cli::make_mock_engine());
    CHECK_THROWS_WITH_AS((void)verify_rollouts(dir / "raw.jsonl",
                                               dir / "v.jsonl",
                                               cli::smoke_problems(1),
                                               verifier, 0.7),
                         doctest::Contains("ghost"), std::runtime_error);
}

// ---------------------------------------------------------------------------
// Reports

TEST_CASE("render_json round-trips summaries")
{
    const auto records = make_records({{6, 4}, {2, 1}}, 8);
    const auto s = summarize(records, "model-a", "bench-1");
    const auto parsed = parse_summaries(render_json({s}));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].model_id == s.model_id);
    CHECK(parsed[0].n == s.n);
    CHECK(parsed[0].problem_count == s.problem_count);
    for (const int k : {1, 2, 4, 8}) {
        CHECK(decimal4(parsed[0].compile_pass.at(k)) ==
              decimal4(s.compile_pass.at(k)));
        CHECK(decimal4(parsed[0].semantic_pass.at(k)) ==
              decimal4(s.semantic_pass.at(k)));
    }
    CHECK(decimal4(parsed[0].gap) == decimal4(s.gap));
}

TEST_CASE("render_table emits one row per model and is byte-stable")
{
    const auto records = make_records({{6, 4}, {2, 1}}, 8);
    const auto s = summarize(records, "model-a", "bench-1");
    const std::string table = render_table({s});
    CHECK(table.find("model-a") != std::string::npos);
    CHECK(table.find("bench-1") != std::string::npos);
    CHECK(table.find("C@1") != std::string::npos);
    CHECK(render_table({s}) == table);

    const std::string csv = render_csv({s});
    CHECK(csv.find("model-a,bench-1,8,2,") != std::string::npos);
}

TEST_CASE("render_table formats percentages half-up to one decimal")
{
    EvalSummary s;
    s.model_id = "m";
    s.benchmark_id = "b";
    s.compile_pass = {{1, 61.75}, {8, 92.25}};
    s.semantic_pass = {{1, 41.04}, {8, 70.96}};
    s.gap = s.compile_pass.at(1) - s.semantic_pass.at(1);
    const std::string table = render_table({s});
    CHECK(table.find("61.8") != std::string::npos);  // 61.75 rounds up
    CHECK(table.find("41.0") != std::string::npos);
    CHECK(table.find("71.0") != std::string::npos);  // 70.96 rounds up
}

TEST_CASE("load_benchmark rejects duplicate ids")
{
    const fs::path dir = temp_dir();
    {
        std::ofstream out(dir / "bench.jsonl");
        json j;
        j["problem_id"] = "dup";
        j["nl_text"] = "x";
        j["ground_truth"] = "theorem t : True := by sorry";
        j["benchmark_id"] = "b";
        out << j.dump() << "\n" << j.dump() << "\n";
    }
    CHECK_THROWS((void)load_benchmark(dir / "bench.jsonl"));
}

TEST_CASE("the report renderer matches its golden on recorded fixtures")
{
    // Twelve summaries transcribed from recorded evaluation logs for six
    // training conditions on the two public benchmarks.
    struct Fixture {
        const char* model;
        const char* bench;
        std::uint64_t problems;
        double c1, c2, c4, c8;
        double s1, s8;
        double bo_mean, bo_nonzero;
    };
    const std::vector<Fixture> fixtures = {
        {"base", "gaokao-formal", 495, 19.9, 26.4, 33.2, 40.2, 10.2, 19.4,
         0.215, 0.678},
        {"sft", "gaokao-formal", 495, 61.8, 75.8, 86.1, 92.3, 41.0, 70.9,
         0.719, 0.805},
        {"grpo-only", "gaokao-formal", 495, 50.9, 58.3, 64.2, 69.3, 28.1,
         40.2, 0.423, 0.712},
        {"sft-grpo-0", "gaokao-formal", 495, 77.6, 86.2, 91.0, 93.9, 51.4,
         72.7, 0.742, 0.809},
        {"sft-grpo-30", "gaokao-formal", 495, 76.4, 84.7, 89.8, 92.9, 48.6,
         70.7, 0.716, 0.791},
        {"sft-grpo-100", "gaokao-formal", 495, 62.9, 76.7, 86.4, 92.7, 40.6,
         69.9, 0.716, 0.804},
        {"base", "putnambench", 672, 11.3, 16.6, 22.7, 29.3, 3.3, 7.7,
         0.106, 0.563},
        {"sft", "putnambench", 672, 28.5, 40.2, 52.9, 65.6, 14.3, 34.2,
         0.375, 0.697},
        {"grpo-only", "putnambench", 672, 36.1, 44.3, 52.2, 60.1, 11.9,
         19.2, 0.244, 0.576},
        {"sft-grpo-0", "putnambench", 672, 47.9, 59.6, 69.7, 78.1, 23.6,
         43.0, 0.468, 0.694},
        {"sft-grpo-30", "putnambench", 672, 46.4, 56.7, 65.5, 71.9, 22.9,
         38.8, 0.427, 0.693},
        {"sft-grpo-100", "putnambench", 672, 29.1, 40.8, 53.2, 65.3, 14.7,
         34.8, 0.380, 0.697},
    };

    std::vector<EvalSummary> summaries;
    for (const auto& f : fixtures) {
        EvalSummary s;
        s.model_id = f.model;
        s.benchmark_id = f.bench;
        s.n = 8;
        s.problem_count = f.problems;
        s.compile_pass = {{1, f.c1}, {2, f.c2}, {4, f.c4}, {8, f.c8}};
        s.semantic_pass = {{1, f.s1}, {8, f.s8}};
        s.gap = f.c1 - f.s1;
        s.bo8_mean = f.bo_mean;
        s.bo8_mean_nonzero = f.bo_nonzero;
        CHECK(s.validate().empty());
        summaries.push_back(std::move(s));
    }

    const std::string table = render_table(summaries);
    // Spot-check a few cells before the byte comparison.
    CHECK(table.find("77.6") != std::string::npos);
    CHECK(table.find("39.6") == std::string::npos); // external rows excluded
    CHECK(table.find("0.742") != std::string::npos);

    const fs::path golden =
        fs::path(AUTOFORM_TEST_DATA_DIR) / "report_fixture.golden.txt";
    if (std::getenv("AUTOFORM_WRITE_GOLDEN") != nullptr) {
        std::ofstream out(golden);
        out << table;
    }
    REQUIRE(fs::exists(golden));
    std::ifstream in(golden);
    const std::string pinned((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
    CHECK(table == pinned);

    // And the machine form round-trips.
    const auto parsed = parse_summaries(render_json(summaries));
    REQUIRE(parsed.size() == summaries.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].model_id == summaries[i].model_id);
        CHECK(decimal4(parsed[i].gap) == decimal4(summaries[i].gap));
    }
}
