#include "autoform/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "autoform/answer_inject.hpp"
#include "autoform/curation.hpp"
#include "autoform/jsonl.hpp"
#include "autoform/overlap.hpp"
#include "autoform/prompts.hpp"
#include "autoform/rng.hpp"
#include "autoform/toml_lite.hpp"

namespace autoform::cli {

namespace fs = std::filesystem;

namespace {

void log(const std::string& msg)
{
    std::cerr << "[autoform] " << msg << "\n";
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out.is_open()) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

void write_json_file(const fs::path& path, const json& j)
{
    write_text(path, j.dump(2) + "\n");
}

fs::path resolve_relative(const fs::path& base_file, const std::string& p)
{
    const fs::path candidate(p);
    if (candidate.is_absolute() || fs::exists(candidate)) {
        return candidate;
    }
    return base_file.parent_path() / candidate;
}

std::pair<std::string, int> split_bind_address(const std::string& addr)
{
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) {
        throw std::runtime_error("bind address must be host:port, got " +
                                 addr);
    }
    return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
}

// ---------------------------------------------------------------------------
// curate

struct CurateConfig {
    std::vector<curation::SourceAdapter> adapters;
    curation::QualityRules rules;
    std::map<std::string, std::uint64_t> stratify_targets;
    std::map<Source, std::uint64_t> mix;
    bool has_mix = false;
    std::size_t vet_sample_n = 500;
    bool vet_mock = true;
    int vet_max_parallel = 1;
    std::string vet_compiler_cfg;
    std::string system_prompt;
    std::uint64_t seed = 0;
};

CurateConfig load_curate_config(const fs::path& path)
{
    const json cfg = load_toml(path);
    CurateConfig out;

    if (!cfg.contains("source") || !cfg["source"].is_array() ||
        cfg["source"].empty()) {
        throw std::runtime_error("sources config needs at least one "
                                 "[[source]] table");
    }
    for (const auto& s : cfg["source"]) {
        curation::SourceAdapter a;
        a.source = source_from_string(s.at("name").get<std::string>());
        a.path = resolve_relative(path, s.at("path").get<std::string>())
                     .string();
        a.nl_field = s.at("nl_field").get<std::string>();
        a.fl_field = s.at("fl_field").get<std::string>();
        a.topic_field = s.value("topic_field", "");
        out.adapters.push_back(std::move(a));
    }

    if (cfg.contains("quality")) {
        const auto& q = cfg["quality"];
        auto& r = out.rules;
        r.nl_min_chars = q.value("nl_min_chars", r.nl_min_chars);
        r.nl_max_chars = q.value("nl_max_chars", r.nl_max_chars);
        r.lean_min_chars = q.value("lean_min_chars", r.lean_min_chars);
        r.lean_max_chars = q.value("lean_max_chars", r.lean_max_chars);
        if (q.contains("required_substrings")) {
            r.required_substrings =
                q["required_substrings"].get<std::vector<std::string>>();
        }
        if (q.contains("forbidden_substrings")) {
            r.forbidden_substrings =
                q["forbidden_substrings"].get<std::vector<std::string>>();
        }
        if (q.contains("max_non_ascii_fraction")) {
            r.max_non_ascii_fraction =
                parse_real(q["max_non_ascii_fraction"]);
        }
    }

    if (cfg.contains("stratify")) {
        for (const auto& [topic, count] : cfg["stratify"].items()) {
            out.stratify_targets[topic] = count.get<std::uint64_t>();
        }
    }

    if (cfg.contains("mix")) {
        out.has_mix = true;
        for (const auto& [name, count] : cfg["mix"].items()) {
            out.mix[source_from_string(name)] = count.get<std::uint64_t>();
        }
    }

    if (cfg.contains("vet")) {
        const auto& v = cfg["vet"];
        out.vet_sample_n = v.value("sample_n", out.vet_sample_n);
        out.vet_mock = v.value("mock", out.vet_mock);
        out.vet_max_parallel = v.value("max_parallel", out.vet_max_parallel);
        out.vet_compiler_cfg = v.value("compiler_cfg", out.vet_compiler_cfg);
    }

    out.system_prompt = cfg.value(
        "system_prompt", std::string(prompts::kGenerationSystemPrompt));
    out.seed = cfg.value("seed", std::uint64_t{0});
    return out;
}

curation::CompileGate make_vet_gate(const CurateConfig& cfg,
                                    const fs::path& cfg_path)
{
    if (cfg.vet_mock) {
        auto compiler = std::make_shared<gateway::MockCompiler>();
        return [compiler](const std::string& code) {
            return compiler->typecheck(code);
        };
    }
    if (cfg.vet_compiler_cfg.empty()) {
        throw std::runtime_error(
            "vet.mock = false requires vet.compiler_cfg");
    }
    const auto ccfg = gateway::CompilerConfig::from_json(
        load_toml(resolve_relative(cfg_path, cfg.vet_compiler_cfg)));
    auto compiler = std::make_shared<gateway::CommandCompiler>(ccfg);
    return [compiler](const std::string& code) {
        return compiler->typecheck(code);
    };
}

int cmd_curate(const std::string& sources, const std::string& out_dir_s,
               std::uint64_t seed, bool seed_given, bool skip_vet)
{
    const fs::path cfg_path(sources);
    const fs::path out_dir(out_dir_s);
    fs::create_directories(out_dir);

    CurateConfig cfg = load_curate_config(cfg_path);
    if (seed_given) {
        cfg.seed = seed;
    }

    auto ingested = curation::ingest(cfg.adapters);
    write_json_file(out_dir / "ingest.manifest.json",
                    ingested.manifest.to_json());
    log("ingest: " + std::to_string(ingested.records.size()) + " records");

    if (!skip_vet) {
        const auto gate = make_vet_gate(cfg, cfg_path);
        json vet_report = json::object();
        double weighted = 0.0;
        std::uint64_t total = 0;
        for (Source s : all_sources()) {
            std::vector<NlFlPair> pool;
            for (const auto& r : ingested.records) {
                if (r.source == s) {
                    pool.push_back(r);
                }
            }
            if (pool.empty()) {
                continue;
            }
            const double rate =
                curation::vet_sample(pool, cfg.vet_sample_n, gate, cfg.seed,
                                     cfg.vet_max_parallel);
            vet_report[to_string(s)] = decimal4(rate);
            weighted += rate * double(pool.size());
            total += pool.size();
        }
        DatasetManifest vet_manifest;
        vet_manifest.stage = "vet";
        vet_manifest.input_count = ingested.records.size();
        vet_manifest.output_count = ingested.records.size();
        vet_manifest.vet_pass_rate =
            total == 0 ? 0.0 : weighted / double(total);
        write_json_file(out_dir / "vet.manifest.json",
                        vet_manifest.to_json());
        write_json_file(out_dir / "vet.report.json", vet_report);
        log("vet: advisory pass rates written");
    }

    auto deduped = curation::dedup(std::move(ingested.records));
    write_json_file(out_dir / "dedup.manifest.json",
                    deduped.manifest.to_json());
    log("dedup: dropped " + std::to_string(deduped.dropped));

    auto filtered = curation::quality_filter(std::move(deduped.unique),
                                             cfg.rules);
    write_json_file(out_dir / "quality_filter.manifest.json",
                    filtered.manifest.to_json());
    log("quality_filter: kept " + std::to_string(filtered.kept.size()) +
        ", rejected " + std::to_string(filtered.rejected.size()));

    std::vector<NlFlPair> working = std::move(filtered.kept);
    if (!cfg.stratify_targets.empty()) {
        auto stratified =
            curation::stratify(working, cfg.stratify_targets, cfg.seed);
        write_json_file(out_dir / "stratify.manifest.json",
                        stratified.manifest.to_json());
        for (const auto& [topic, missing] : stratified.shortfall_per_topic) {
            log("stratify: topic '" + topic + "' short by " +
                std::to_string(missing));
        }
        working = std::move(stratified.selected);
    }

    if (cfg.has_mix) {
        std::map<Source, std::vector<NlFlPair>> pools;
        for (auto& r : working) {
            pools[r.source].push_back(std::move(r));
        }
        auto composed = curation::compose_sft(pools, cfg.mix, cfg.seed);
        write_json_file(out_dir / "compose_sft.manifest.json",
                        composed.manifest.to_json());
        working = std::move(composed.sft);
        log("compose_sft: " + std::to_string(working.size()) + " records");
    }

    const auto stats = inject::inject_corpus(working);
    json inject_stats;
    inject_stats["injected"] = stats.injected;
    inject_stats["extraction_misses"] = stats.extraction_misses;
    inject_stats["non_find_type"] = stats.non_find_type;
    inject_stats["per_pattern"] = json::object();
    for (const auto& [id, count] : stats.per_pattern) {
        inject_stats["per_pattern"][id] = count;
    }
    write_json_file(out_dir / "inject.stats.json", inject_stats);
    log("inject: " + std::to_string(stats.injected) + " prompts annotated");

    {
        JsonlWriter writer(out_dir / "sft.jsonl");
        for (const auto& r : working) {
            writer.write(r.to_json());
        }
    }
    {
        std::ofstream out(out_dir / "sft_alpaca.jsonl");
        for (const auto& line :
             curation::format_alpaca(working, cfg.system_prompt)) {
            out << line << '\n';
        }
    }
    log("curate: wrote " + (out_dir / "sft.jsonl").string() + " (" +
        std::to_string(working.size()) + " records)");
    return 0;
}

// ---------------------------------------------------------------------------
// vet

int cmd_vet(const std::string& sources, std::size_t sample_n,
            std::uint64_t seed, bool mock_compiler,
            const std::string& compiler_cfg)
{
    const fs::path cfg_path(sources);
    CurateConfig cfg = load_curate_config(cfg_path);
    cfg.vet_sample_n = sample_n;
    if (mock_compiler) {
        cfg.vet_mock = true;
    } else if (!compiler_cfg.empty()) {
        cfg.vet_mock = false;
        cfg.vet_compiler_cfg = compiler_cfg;
    }

    const auto gate = make_vet_gate(cfg, cfg_path);
    const auto ingested = curation::ingest(cfg.adapters);
    json report = json::object();
    for (Source s : all_sources()) {
        std::vector<NlFlPair> pool;
        for (const auto& r : ingested.records) {
            if (r.source == s) {
                pool.push_back(r);
            }
        }
        if (pool.empty()) {
            continue;
        }
        const double rate =
            curation::vet_sample(pool, cfg.vet_sample_n, gate, seed,
                                 cfg.vet_max_parallel);
        report[to_string(s)] = decimal4(rate);
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// inject

int cmd_inject(const std::string& in, const std::string& out,
               const std::string& patterns)
{
    inject::PatternRegistry registry = inject::PatternRegistry::standard();
    if (!patterns.empty()) {
        const json p = load_toml(patterns);
        if (p.contains("patterns")) {
            registry = registry.subset(
                p["patterns"].get<std::vector<std::string>>());
        }
    }

    std::vector<NlFlPair> records;
    for_each_jsonl(in, [&records](std::size_t, json&& j) {
        records.push_back(NlFlPair::from_json(j));
    });
    const auto stats = inject::inject_corpus(records, registry);

    JsonlWriter writer(out);
    for (const auto& r : records) {
        writer.write(r.to_json());
    }

    json report;
    report["injected"] = stats.injected;
    report["extraction_misses"] = stats.extraction_misses;
    report["non_find_type"] = stats.non_find_type;
    report["per_pattern"] = json::object();
    for (const auto& [id, count] : stats.per_pattern) {
        report["per_pattern"][id] = count;
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// partition

int cmd_partition(const std::string& sft, const std::string& reserve,
                  double rho, std::uint64_t size, std::uint64_t seed,
                  const std::string& out, const std::string& mix_cfg)
{
    std::vector<NlFlPair> sft_set;
    for_each_jsonl(sft, [&sft_set](std::size_t, json&& j) {
        sft_set.push_back(NlFlPair::from_json(j));
    });
    std::vector<NlFlPair> reserve_pool;
    for_each_jsonl(reserve, [&reserve_pool](std::size_t, json&& j) {
        reserve_pool.push_back(NlFlPair::from_json(j));
    });

    OverlapSpec spec;
    spec.rho = rho;
    spec.grpo_size = size;
    spec.sft_size = sft_set.size();
    spec.seed = seed;
    if (!mix_cfg.empty()) {
        const json m = load_toml(mix_cfg);
        spec.source_mix.clear();
        for (const auto& [name, fraction] : m.at("mix").items()) {
            spec.source_mix[source_from_string(name)] = parse_real(fraction);
        }
    }

    const auto result = overlap::build_grpo_pool(sft_set, reserve_pool, spec);
    {
        JsonlWriter writer(out);
        for (const auto& p : result.pool) {
            writer.write(p.to_json());
        }
    }
    write_json_file(fs::path(out).string() + ".manifest.json",
                    result.manifest.to_json());

    const auto measured = overlap::measure_overlap(sft_set, result.pool);
    log("partition: overlap " + std::to_string(measured.shared) + "/" +
        std::to_string(measured.total) + " = " + decimal4(measured.value));
    return 0;
}

// ---------------------------------------------------------------------------
// serve-reward

std::shared_ptr<gateway::RewardEngine> build_engine(
    const std::string& compiler_cfg, const std::string& judge_cfg,
    bool mock_compiler, bool mock_judge)
{
    gateway::CompilerConfig ccfg;
    if (!compiler_cfg.empty()) {
        ccfg = gateway::CompilerConfig::from_json(load_toml(compiler_cfg));
    } else if (!mock_compiler) {
        throw std::runtime_error(
            "either --compiler-cfg or --mock-compiler is required");
    }
    gateway::JudgeConfig jcfg;
    if (!judge_cfg.empty()) {
        jcfg = gateway::JudgeConfig::from_json(load_toml(judge_cfg));
    } else if (!mock_judge) {
        throw std::runtime_error(
            "either --judge-cfg or --mock-judge is required");
    }

    std::shared_ptr<gateway::Compiler> compiler;
    if (mock_compiler) {
        compiler = std::make_shared<gateway::MockCompiler>();
    } else {
        compiler = std::make_shared<gateway::CommandCompiler>(ccfg);
    }
    std::shared_ptr<gateway::Judge> judge;
    if (mock_judge) {
        judge = std::make_shared<gateway::MockJudge>();
    } else {
        judge = std::make_shared<gateway::HttpJudge>(jcfg);
    }
    return std::make_shared<gateway::RewardEngine>(ccfg, jcfg, compiler,
                                                   judge);
}

int cmd_serve_reward(const std::string& bind, const std::string& compiler_cfg,
                     const std::string& judge_cfg, bool mock_compiler,
                     bool mock_judge)
{
    const auto [host, port] = split_bind_address(bind);
    auto engine =
        build_engine(compiler_cfg, judge_cfg, mock_compiler, mock_judge);

    gateway::ServiceOptions options;
    options.host = host;
    options.port = port;
    gateway::RewardService service(engine, options);
    service.start();
    log("serve-reward: listening on " + host + ":" +
        std::to_string(service.bound_port()));
    for (;;) {
        std::this_thread::sleep_for(std::chrono::seconds(3600));
    }
}

// ---------------------------------------------------------------------------
// evaluate

int cmd_evaluate(const std::string& bench, const std::string& model_cfg,
                 const std::string& gateway_addr, const std::string& out_dir_s,
                 double tau)
{
    const fs::path out_dir(out_dir_s);
    fs::create_directories(out_dir);

    const auto problems = eval::load_benchmark(bench);
    if (problems.empty()) {
        throw std::runtime_error("benchmark is empty: " + bench);
    }

    eval::GenConfig gen_cfg;
    if (!model_cfg.empty()) {
        gen_cfg = eval::GenConfig::from_json(load_toml(model_cfg));
    }
    auto generator = eval::make_generator(gen_cfg);

    const auto gen_stats = eval::generate_rollouts(
        problems, gen_cfg, *generator, out_dir / "rollouts.jsonl");
    log("generate: " + std::to_string(gen_stats.written) + " new, " +
        std::to_string(gen_stats.skipped) + " resumed, " +
        std::to_string(gen_stats.failed) + " failed");

    std::unique_ptr<eval::Verifier> verifier;
    if (gateway_addr == "mock") {
        verifier = std::make_unique<eval::EngineVerifier>(make_mock_engine());
    } else {
        verifier = std::make_unique<eval::RemoteVerifier>(gateway_addr);
    }
    const auto verify_stats = eval::verify_rollouts(
        out_dir / "rollouts.jsonl", out_dir / "verified.jsonl", problems,
        *verifier, tau);
    log("verify: " + std::to_string(verify_stats.verified) + " new, " +
        std::to_string(verify_stats.reused) + " reused");

    std::vector<RolloutRecord> records;
    for_each_jsonl(out_dir / "verified.jsonl",
                   [&records](std::size_t, json&& j) {
                       records.push_back(RolloutRecord::from_json(j));
                   });

    std::map<std::string, std::string> bench_of_problem;
    std::vector<std::string> bench_order;
    for (const auto& p : problems) {
        bench_of_problem[p.problem_id] = p.benchmark_id;
        if (std::find(bench_order.begin(), bench_order.end(),
                      p.benchmark_id) == bench_order.end()) {
            bench_order.push_back(p.benchmark_id);
        }
    }
    const std::string model_id =
        gen_cfg.model.empty() ? "model" : gen_cfg.model;

    std::vector<EvalSummary> summaries;
    for (const auto& bench_id : bench_order) {
        std::vector<RolloutRecord> slice;
        for (const auto& r : records) {
            if (bench_of_problem.at(r.problem_id) == bench_id) {
                slice.push_back(r);
            }
        }
        summaries.push_back(
            eval::summarize(slice, model_id, bench_id, {1, 2, 4, 8}, tau));
    }

    write_json_file(out_dir / "summary.json", eval::render_json(summaries));
    write_text(out_dir / "report.txt", eval::render_table(summaries));
    for (const auto& s : summaries) {
        log("evaluate: " + s.benchmark_id + " C@1 " +
            decimal4(s.compile_pass.at(1)) + ", S@1 " +
            decimal4(s.semantic_pass.at(1)) + ", gap " + decimal4(s.gap));
    }
    log("evaluate: summary and report written to " + out_dir.string());
    return 0;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& in, const std::string& format)
{
    std::vector<fs::path> files;
    const fs::path input(in);
    if (fs::is_directory(input)) {
        for (const auto& entry : fs::directory_iterator(input)) {
            const std::string name = entry.path().filename().string();
            if (name == "summary.json" || name.ends_with(".summary.json")) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(input);
    }
    if (files.empty()) {
        throw std::runtime_error("no summary files under " + in);
    }

    std::vector<EvalSummary> summaries;
    for (const auto& f : files) {
        std::ifstream fin(f);
        if (!fin.is_open()) {
            throw std::runtime_error("cannot open " + f.string());
        }
        std::ostringstream buf;
        buf << fin.rdbuf();
        for (auto& s : eval::parse_summaries(json::parse(buf.str()))) {
            summaries.push_back(std::move(s));
        }
    }

    if (format == "json") {
        std::cout << eval::render_json(summaries).dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << eval::render_csv(summaries);
    } else {
        std::cout << eval::render_table(summaries);
    }
    return 0;
}

} // namespace

// ---------------------------------------------------------------------------
// Mock engine & smoke pipeline

std::shared_ptr<gateway::RewardEngine> make_mock_engine(int compile_parallel,
                                                        int judge_parallel)
{
    gateway::CompilerConfig ccfg;
    ccfg.max_parallel = compile_parallel;
    ccfg.toolchain_id = "mock";
    gateway::JudgeConfig jcfg;
    jcfg.model = "mock";
    jcfg.max_in_flight = judge_parallel;
    return std::make_shared<gateway::RewardEngine>(
        ccfg, jcfg, std::make_shared<gateway::MockCompiler>(),
        std::make_shared<gateway::MockJudge>());
}

std::vector<eval::BenchmarkProblem> smoke_problems(int count)
{
    std::vector<eval::BenchmarkProblem> problems;
    problems.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        char pid[32];
        std::snprintf(pid, sizeof(pid), "smoke_p%02d", i);
        eval::BenchmarkProblem p;
        p.problem_id = pid;
        p.nl_text = "Determine the value of the expression in case " +
                    std::to_string(i) + ". Show that the answer is " +
                    std::to_string(i) + ".";
        p.ground_truth = "theorem " + std::string(pid) + " : (" +
                         std::to_string(i) + " : ℕ) = " +
                         std::to_string(i) + " := by sorry";
        p.benchmark_id = "smoke";
        problems.push_back(std::move(p));
    }
    return problems;
}

std::string smoke_completion(int problem_index, int rollout_index)
{
    const std::uint64_t slot =
        std::uint64_t(problem_index) * 8 + std::uint64_t(rollout_index);
    // Problem 13 never compiles, so the nonzero-conditioned mean differs
    // from the plain mean.
    const bool fail =
        problem_index == 13 || DetRng(1000 + slot).next() % 4 == 0;
    const std::uint64_t centi = DetRng(2000 + slot).next() % 101;

    char pid[32];
    std::snprintf(pid, sizeof(pid), "smoke_p%02d", problem_index);
    std::string code = "theorem " + std::string(pid) + "_r" +
                       std::to_string(rollout_index) + " : (" +
                       std::to_string(problem_index) + " : ℕ) = " +
                       std::to_string(problem_index) + " := by sorry";
    if (fail) {
        code += "\n-- --FAIL";
    } else {
        char marker[32];
        std::snprintf(marker, sizeof(marker), "\n-- --JUDGE:%.2f",
                      double(centi) / 100.0);
        code += marker;
    }
    return "Here is the formalization.\n```lean4\n" + code + "\n```\n";
}

void write_smoke_fixture(const fs::path& path, int problem_count, int n)
{
    JsonlWriter writer(path);
    for (int p = 0; p < problem_count; ++p) {
        char pid[32];
        std::snprintf(pid, sizeof(pid), "smoke_p%02d", p);
        for (int r = 0; r < n; ++r) {
            json j;
            j["problem_id"] = pid;
            j["rollout_index"] = r;
            j["completion"] = smoke_completion(p, r);
            writer.write(j);
        }
    }
}

SmokeResult run_smoke(const fs::path& out_dir, int problem_count, int n)
{
    fs::create_directories(out_dir);
    const auto problems = smoke_problems(problem_count);

    {
        JsonlWriter writer(out_dir / "bench.jsonl");
        for (const auto& p : problems) {
            writer.write(p.to_json());
        }
    }
    write_smoke_fixture(out_dir / "fixture.jsonl", problem_count, n);

    eval::GenConfig cfg;
    cfg.mode = "mock";
    cfg.fixture_path = (out_dir / "fixture.jsonl").string();
    cfg.model = "smoke-model";
    cfg.n = n;
    auto generator = eval::make_generator(cfg);
    eval::generate_rollouts(problems, cfg, *generator,
                            out_dir / "rollouts.jsonl");

    eval::EngineVerifier verifier(make_mock_engine());
    eval::verify_rollouts(out_dir / "rollouts.jsonl",
                          out_dir / "verified.jsonl", problems, verifier);

    std::vector<RolloutRecord> records;
    for_each_jsonl(out_dir / "verified.jsonl",
                   [&records](std::size_t, json&& j) {
                       records.push_back(RolloutRecord::from_json(j));
                   });

    SmokeResult result;
    result.summaries = {eval::summarize(records, "smoke-model", "smoke")};
    result.summary_json = out_dir / "summary.json";
    result.report_txt = out_dir / "report.txt";
    write_json_file(result.summary_json,
                    eval::render_json(result.summaries));
    write_text(result.report_txt, eval::render_table(result.summaries));
    return result;
}

namespace {

int cmd_selftest(const std::string& out_dir_s)
{
    fs::path out_dir;
    if (out_dir_s.empty()) {
        out_dir = fs::temp_directory_path() /
                  ("autoform_selftest_" +
                   std::to_string(
                       std::chrono::steady_clock::now().time_since_epoch()
                           .count()));
    } else {
        out_dir = out_dir_s;
    }

    const auto started = std::chrono::steady_clock::now();
    const auto result = run_smoke(out_dir, 20, 8);
    const auto elapsed_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started)
            .count();

    const auto& s = result.summaries.at(0);
    if (const auto errs = s.validate(); !errs.empty()) {
        log("selftest: summary invariants violated: " + errs.front());
        return 1;
    }
    if (s.problem_count != 20 || s.n != 8 || s.compile_pass.size() != 4 ||
        s.semantic_pass.size() != 4) {
        log("selftest: summary incomplete");
        return 1;
    }
    log("selftest: ok in " + std::to_string(elapsed_ms) + " ms (C@1 " +
        decimal4(s.compile_pass.at(1)) + ", S@1 " +
        decimal4(s.semantic_pass.at(1)) + ", outputs in " + out_dir.string() +
        ")");
    return 0;
}

} // namespace

// ---------------------------------------------------------------------------
// Dispatch

int run(int argc, const char* const* argv)
{
    CLI::App app{"Post-training data and evaluation toolchain for Lean 4 "
                 "autoformalization"};
    app.require_subcommand(0, 1);

    // curate
    auto* curate = app.add_subcommand(
        "curate", "Run the corpus pipeline and emit the SFT set");
    std::string curate_sources, curate_out;
    std::uint64_t curate_seed = 0;
    bool curate_skip_vet = false;
    curate->add_option("--sources", curate_sources,
                       "Source adapter config (TOML)")
        ->required();
    curate->add_option("--out", curate_out, "Output directory")->required();
    auto* curate_seed_opt =
        curate->add_option("--seed", curate_seed, "Pipeline seed");
    curate->add_flag("--skip-vet", curate_skip_vet,
                     "Skip the advisory compile vetting stage");

    // vet
    auto* vet = app.add_subcommand(
        "vet", "Compile-vet a seeded sample from each source");
    std::string vet_sources, vet_compiler_cfg;
    std::size_t vet_sample_n = 500;
    std::uint64_t vet_seed = 0;
    bool vet_mock = false;
    vet->add_option("--sources", vet_sources, "Source adapter config (TOML)")
        ->required();
    vet->add_option("--sample-n", vet_sample_n, "Sample size per source");
    vet->add_option("--seed", vet_seed, "Sampling seed");
    vet->add_flag("--mock-compiler", vet_mock, "Use the mock compile gate");
    vet->add_option("--compiler-cfg", vet_compiler_cfg,
                    "Compiler config (TOML)");

    // inject
    auto* inject_cmd = app.add_subcommand(
        "inject", "Append extracted answers to find-type prompts");
    std::string inject_in, inject_out, inject_patterns;
    inject_cmd->add_option("--in", inject_in, "Input records (JSONL)")
        ->required();
    inject_cmd->add_option("--out", inject_out, "Output records (JSONL)")
        ->required();
    inject_cmd->add_option("--patterns", inject_patterns,
                           "Pattern subset config (TOML)");

    // partition
    auto* partition = app.add_subcommand(
        "partition", "Build an overlap-controlled GRPO prompt pool");
    std::string part_sft, part_reserve, part_out, part_mix;
    double part_rho = 0.0;
    std::uint64_t part_size = 16000, part_seed = 0;
    partition->add_option("--sft", part_sft, "SFT records (JSONL)")
        ->required();
    partition->add_option("--reserve", part_reserve, "Reserve pool (JSONL)")
        ->required();
    partition->add_option("--rho", part_rho, "Overlap fraction in [0,1]")
        ->required();
    partition->add_option("--size", part_size, "Pool size");
    partition->add_option("--seed", part_seed, "Sampling seed");
    partition->add_option("--out", part_out, "Output pool (JSONL)")
        ->required();
    partition->add_option(
        "--mix", part_mix,
        "TOML overriding the default 40/35/15/10 source mix");

    // serve-reward
    auto* serve = app.add_subcommand(
        "serve-reward", "Serve the dual-stage reward over HTTP");
    std::string serve_bind = "127.0.0.1:8080";
    std::string serve_compiler_cfg, serve_judge_cfg;
    bool serve_mock_compiler = false, serve_mock_judge = false;
    serve->add_option("--bind", serve_bind, "host:port to bind");
    serve->add_option("--compiler-cfg", serve_compiler_cfg,
                      "Compiler config (TOML)");
    serve->add_option("--judge-cfg", serve_judge_cfg, "Judge config (TOML)");
    serve->add_flag("--mock-compiler", serve_mock_compiler,
                    "Use the mock compiler");
    serve->add_flag("--mock-judge", serve_mock_judge, "Use the mock judge");

    // evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "Generate, verify and summarize benchmark rollouts");
    std::string eval_bench, eval_model_cfg, eval_gateway = "mock", eval_out;
    double eval_tau = kDefaultTau;
    evaluate->add_option("--bench", eval_bench, "Benchmark problems (JSONL)")
        ->required();
    evaluate->add_option("--model-cfg", eval_model_cfg,
                         "Generation config (TOML)");
    evaluate->add_option("--gateway", eval_gateway,
                         "Reward service address or 'mock'");
    evaluate->add_option("--out", eval_out, "Output directory")->required();
    evaluate->add_option("--tau", eval_tau,
                         "Semantic success threshold (default 0.7)");

    // report
    auto* report = app.add_subcommand(
        "report", "Render summaries as table, json or csv");
    std::string report_in, report_format = "table";
    report->add_option("--in", report_in, "Summary file or directory")
        ->required();
    report->add_option("--format", report_format, "table|json|csv")
        ->check(CLI::IsMember({"table", "json", "csv"}));

    // selftest
    auto* selftest = app.add_subcommand(
        "selftest", "Run the embedded mock smoke pipeline");
    std::string selftest_out;
    selftest->add_option("--out", selftest_out,
                         "Output directory (default: temp)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 2;
    }

    try {
        if (curate->parsed()) {
            return cmd_curate(curate_sources, curate_out, curate_seed,
                              curate_seed_opt->count() > 0, curate_skip_vet);
        }
        if (vet->parsed()) {
            return cmd_vet(vet_sources, vet_sample_n, vet_seed, vet_mock,
                           vet_compiler_cfg);
        }
        if (inject_cmd->parsed()) {
            return cmd_inject(inject_in, inject_out, inject_patterns);
        }
        if (partition->parsed()) {
            return cmd_partition(part_sft, part_reserve, part_rho, part_size,
                                 part_seed, part_out, part_mix);
        }
        if (serve->parsed()) {
            return cmd_serve_reward(serve_bind, serve_compiler_cfg,
                                    serve_judge_cfg, serve_mock_compiler,
                                    serve_mock_judge);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(eval_bench, eval_model_cfg, eval_gateway,
                                eval_out, eval_tau);
        }
        if (report->parsed()) {
            return cmd_report(report_in, report_format);
        }
        if (selftest->parsed()) {
            return cmd_selftest(selftest_out);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    std::cerr << app.help();
    return 2;
}

} // namespace autoform::cli
