#include "autoform/eval_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "autoform/jsonl.hpp"
#include "autoform/prompts.hpp"

namespace autoform::eval {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Benchmarks

json BenchmarkProblem::to_json() const
{
    json j;
    j["problem_id"] = problem_id;
    j["nl_text"] = nl_text;
    j["ground_truth"] = ground_truth;
    j["benchmark_id"] = benchmark_id;
    return j;
}

BenchmarkProblem BenchmarkProblem::from_json(const json& j)
{
    BenchmarkProblem p;
    p.problem_id = j.at("problem_id").get<std::string>();
    p.nl_text = j.at("nl_text").get<std::string>();
    p.ground_truth = j.at("ground_truth").get<std::string>();
    p.benchmark_id = j.value("benchmark_id", "");
    return p;
}

std::vector<BenchmarkProblem> load_benchmark(const fs::path& path)
{
    std::vector<BenchmarkProblem> problems;
    std::set<std::string> ids;
    for_each_jsonl(path, [&](std::size_t line_no, json&& j) {
        auto p = BenchmarkProblem::from_json(j);
        if (!ids.insert(p.problem_id).second) {
            throw std::runtime_error("duplicate problem_id '" + p.problem_id +
                                     "' at " + path.string() + ":" +
                                     std::to_string(line_no));
        }
        problems.push_back(std::move(p));
    });
    return problems;
}

// ---------------------------------------------------------------------------
// Generation

GenConfig GenConfig::from_json(const json& j)
{
    GenConfig c;
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    if (j.contains("temperature")) {
        c.temperature = parse_real(j.at("temperature"));
    }
    c.n = j.value("n", c.n);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    c.system_prompt = j.value("system_prompt", c.system_prompt);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.retries = j.value("retries", c.retries);
    c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
    if (j.contains("seed") && j.at("seed").is_number()) {
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    c.mode = j.value("mode", c.mode);
    c.fixture_path = j.value("fixture", c.fixture_path);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    return c;
}

std::vector<std::string> GenConfig::validate() const
{
    std::vector<std::string> errs;
    if (n < 1) {
        errs.push_back("n must be >= 1");
    }
    if (temperature < 0.0) {
        errs.push_back("temperature must be >= 0");
    }
    if (mode != "http" && mode != "mock") {
        errs.push_back("mode must be 'http' or 'mock'");
    }
    if (mode == "http" && endpoint.empty()) {
        errs.push_back("http mode requires an endpoint");
    }
    if (mode == "mock" && fixture_path.empty()) {
        errs.push_back("mock mode requires a fixture file");
    }
    return errs;
}

std::string GenConfig::effective_system_prompt() const
{
    return system_prompt.empty() ? std::string(prompts::kGenerationSystemPrompt)
                                 : system_prompt;
}

FixtureGenerator::FixtureGenerator(const fs::path& fixture)
{
    for_each_jsonl(fixture, [this](std::size_t, json&& j) {
        completions_[{j.at("problem_id").get<std::string>(),
                      j.at("rollout_index").get<int>()}] =
            j.at("completion").get<std::string>();
    });
}

std::string FixtureGenerator::complete(const BenchmarkProblem& problem,
                                       int rollout_index)
{
    const auto it = completions_.find({problem.problem_id, rollout_index});
    if (it == completions_.end()) {
        throw std::runtime_error(
            "fixture has no completion for (problem_id=" + problem.problem_id +
            ", rollout_index=" + std::to_string(rollout_index) + ")");
    }
    return it->second;
}

HttpGenerator::HttpGenerator(GenConfig cfg) : cfg_(std::move(cfg)) {}

json HttpGenerator::build_request_body(const GenConfig& cfg,
                                       const BenchmarkProblem& problem)
{
    json body;
    body["model"] = cfg.model;
    body["temperature"] = cfg.temperature;
    body["max_tokens"] = cfg.max_tokens;
    if (cfg.seed) {
        body["seed"] = *cfg.seed;
    }
    body["messages"] = json::array(
        {json{{"role", "system"}, {"content", cfg.effective_system_prompt()}},
         json{{"role", "user"}, {"content", problem.nl_text}}});
    return body;
}

namespace {

std::pair<std::string, std::string> split_url(const std::string& url)
{
    const auto scheme = url.find("://");
    const std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    const auto slash = url.find('/', host_start);
    if (slash == std::string::npos) {
        return {url, "/v1/chat/completions"};
    }
    return {url.substr(0, slash), url.substr(slash)};
}

} // namespace

std::string HttpGenerator::complete(const BenchmarkProblem& problem,
                                    int /*rollout_index*/)
{
    const auto [base, path] = split_url(cfg_.endpoint);
    const std::string payload = build_request_body(cfg_, problem).dump();

    std::string last_error = "no attempt made";
    for (int attempt = 1; attempt <= std::max(1, cfg_.retries + 1); ++attempt) {
        if (attempt > 1 && cfg_.backoff_ms > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(cfg_.backoff_ms << (attempt - 2)));
        }
        httplib::Client client(base);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(600, 0);
        httplib::Headers headers;
        if (const char* key = std::getenv(cfg_.api_key_env.c_str());
            key != nullptr && *key != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        const auto res =
            client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure";
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        const json envelope = json::parse(res->body, nullptr, false);
        if (envelope.is_discarded() || !envelope.contains("choices") ||
            !envelope["choices"].is_array() || envelope["choices"].empty()) {
            last_error = "malformed completion envelope";
            continue;
        }
        const auto& choice = envelope["choices"][0];
        if (choice.contains("message") &&
            choice["message"].contains("content") &&
            choice["message"]["content"].is_string()) {
            return choice["message"]["content"].get<std::string>();
        }
        if (choice.contains("text") && choice["text"].is_string()) {
            return choice["text"].get<std::string>();
        }
        last_error = "completion carries no content";
    }
    throw std::runtime_error("generation failed: " + last_error);
}

std::unique_ptr<Generator> make_generator(const GenConfig& cfg)
{
    if (const auto errs = cfg.validate(); !errs.empty()) {
        throw std::invalid_argument("bad generation config: " + errs.front());
    }
    if (cfg.mode == "mock") {
        return std::make_unique<FixtureGenerator>(cfg.fixture_path);
    }
    return std::make_unique<HttpGenerator>(cfg);
}

GenerateStats generate_rollouts(const std::vector<BenchmarkProblem>& problems,
                                const GenConfig& cfg, Generator& generator,
                                const fs::path& checkpoint)
{
    GenerateStats stats;

    std::set<std::pair<std::string, int>> done;
    if (fs::exists(checkpoint)) {
        for_each_jsonl(checkpoint, [&done](std::size_t, json&& j) {
            done.emplace(j.at("problem_id").get<std::string>(),
                         j.at("rollout_index").get<int>());
        });
    }

    JsonlWriter writer(checkpoint, /*append=*/true);
    for (const auto& problem : problems) {
        std::vector<int> pending;
        for (int i = 0; i < cfg.n; ++i) {
            ++stats.requested;
            if (done.contains({problem.problem_id, i})) {
                ++stats.skipped;
            } else {
                pending.push_back(i);
            }
        }
        if (pending.empty()) {
            continue;
        }

        std::vector<RolloutRecord> records(pending.size());
        std::atomic<std::size_t> next{0};
        const std::size_t workers = std::min<std::size_t>(
            pending.size(), std::size_t(std::max(1, cfg.max_in_flight)));
        auto work = [&] {
            for (;;) {
                const std::size_t slot = next.fetch_add(1);
                if (slot >= pending.size()) {
                    return;
                }
                RolloutRecord r;
                r.problem_id = problem.problem_id;
                r.rollout_index = pending[slot];
                try {
                    r.completion = generator.complete(problem, pending[slot]);
                } catch (const std::exception&) {
                    r.completion.clear();
                    r.gen_failed = true;
                }
                records[slot] = std::move(r);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }

        // One problem's records land together, in rollout order.
        for (const auto& r : records) {
            writer.write(r.to_json());
            ++stats.written;
            if (r.gen_failed) {
                ++stats.failed;
            }
        }
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Verification

EngineVerifier::EngineVerifier(std::shared_ptr<gateway::RewardEngine> engine,
                               int max_in_flight)
    : engine_(std::move(engine)), max_in_flight_(std::max(1, max_in_flight))
{
}

std::vector<Verifier::Detail> EngineVerifier::verify(
    const std::vector<Item>& items)
{
    std::vector<Detail> details(items.size());
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::min<std::size_t>(items.size(), std::size_t(max_in_flight_));
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= items.size()) {
                return;
            }
            const auto d = engine_->evaluate(
                items[i].prompt, items[i].completion, items[i].ground_truth);
            details[i] = {d.extracted_code, d.compile, d.verdict};
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
    for (auto& t : pool) {
        t.join();
    }
    return details;
}

RemoteVerifier::RemoteVerifier(const std::string& base_url)
    : base_url_(base_url)
{
    httplib::Client client(base_url_);
    client.set_connection_timeout(5, 0);
    const auto res = client.Get("/healthz");
    if (!res || res->status != 200) {
        throw std::runtime_error("reward service unreachable at " + base_url_);
    }
    const json health = json::parse(res->body, nullptr, false);
    toolchain_id_ = "remote";
    if (!health.is_discarded() && health.contains("compiler") &&
        health["compiler"].contains("toolchain_id")) {
        toolchain_id_ = health["compiler"]["toolchain_id"].get<std::string>();
    }
}

std::vector<Verifier::Detail> RemoteVerifier::verify(
    const std::vector<Item>& items)
{
    constexpr std::size_t kChunk = 64;
    std::vector<Detail> details;
    details.reserve(items.size());

    for (std::size_t offset = 0; offset < items.size(); offset += kChunk) {
        const std::size_t end = std::min(items.size(), offset + kChunk);
        json body;
        body["items"] = json::array();
        for (std::size_t i = offset; i < end; ++i) {
            body["items"].push_back(json{{"id", std::to_string(i)},
                                         {"prompt", items[i].prompt},
                                         {"completion", items[i].completion},
                                         {"ground_truth",
                                          items[i].ground_truth}});
        }
        httplib::Client client(base_url_);
        client.set_read_timeout(600, 0);
        const auto res =
            client.Post("/v1/reward", body.dump(), "application/json");
        if (!res || res->status != 200) {
            throw std::runtime_error("reward service request failed");
        }
        const json reply = json::parse(res->body);
        for (std::size_t i = offset; i < end; ++i) {
            const auto& r = reply.at("results").at(i - offset);
            Detail d;
            d.extracted_code = gateway::extract_lean_block(
                items[i].completion);
            d.compile.ok = r.value("compiled", false);
            d.compile.elapsed = r.value("elapsed_ms", std::int64_t{0});
            d.compile.toolchain_id = toolchain_id_;
            if (r.contains("verdict") && r["verdict"].is_object()) {
                d.verdict = JudgeVerdict::from_json(r["verdict"]);
            }
            details.push_back(std::move(d));
        }
    }
    return details;
}

VerifyStats verify_rollouts(const fs::path& raw_path,
                            const fs::path& verified_path,
                            const std::vector<BenchmarkProblem>& problems,
                            Verifier& verifier, double tau)
{
    std::map<std::string, const BenchmarkProblem*> by_id;
    for (const auto& p : problems) {
        by_id[p.problem_id] = &p;
    }

    std::vector<RolloutRecord> raw;
    for_each_jsonl(raw_path, [&raw](std::size_t, json&& j) {
        raw.push_back(RolloutRecord::from_json(j));
    });

    std::map<std::pair<std::string, int>, RolloutRecord> existing;
    if (fs::exists(verified_path)) {
        for_each_jsonl(verified_path, [&existing](std::size_t, json&& j) {
            auto r = RolloutRecord::from_json(j);
            existing[{r.problem_id, r.rollout_index}] = std::move(r);
        });
    }

    VerifyStats stats;
    std::vector<std::size_t> pending;
    std::vector<Verifier::Item> items;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto key = std::make_pair(raw[i].problem_id,
                                        raw[i].rollout_index);
        if (existing.contains(key)) {
            ++stats.reused;
            continue;
        }
        const auto pit = by_id.find(raw[i].problem_id);
        if (pit == by_id.end()) {
            throw std::runtime_error("rollout references unknown problem '" +
                                     raw[i].problem_id + "'");
        }
        pending.push_back(i);
        items.push_back({pit->second->nl_text, raw[i].completion,
                         pit->second->ground_truth});
    }

    const auto details = verifier.verify(items);
    for (std::size_t k = 0; k < pending.size(); ++k) {
        RolloutRecord r = raw[pending[k]];
        const auto& d = details[k];
        r.extracted_code = d.extracted_code;
        r.compile = d.compile;
        r.verdict = d.verdict;
        r.semantic_success = r.recompute_semantic(tau);
        existing[{r.problem_id, r.rollout_index}] = std::move(r);
        ++stats.verified;
    }

    // Rewrite in raw-file order so the output is stable.
    JsonlWriter writer(verified_path);
    for (const auto& r : raw) {
        writer.write(existing.at({r.problem_id, r.rollout_index}).to_json());
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Metrics

std::uint64_t binomial(int n, int k)
{
    if (n < 0 || k < 0 || k > n) {
        return 0;
    }
    if (n > 62) {
        throw std::invalid_argument("binomial: n > 62 would overflow");
    }
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (int i = 0; i < k; ++i) {
        c = c * std::uint64_t(n - i) / std::uint64_t(i + 1);
    }
    return c;
}

PassRational pass_at_k_exact(int n, int c, int k)
{
    if (c < 0 || c > n) {
        throw std::invalid_argument("pass_at_k: c must satisfy 0 <= c <= n");
    }
    if (k < 1 || k > n) {
        throw std::invalid_argument("pass_at_k: k must satisfy 1 <= k <= n");
    }
    PassRational r;
    r.den = binomial(n, k);
    r.num = r.den - binomial(n - c, k);
    return r;
}

double pass_at_k(int n, int c, int k)
{
    const auto r = pass_at_k_exact(n, c, k);
    return double(r.num) / double(r.den);
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

struct ProblemCounts {
    int n = 0;
    int compiling = 0;
    int semantic = 0;
    double best_score = 0.0;
};

std::map<std::string, ProblemCounts> count_per_problem(
    const std::vector<RolloutRecord>& records, double tau)
{
    std::map<std::string, ProblemCounts> counts;
    for (const auto& r : records) {
        auto& c = counts[r.problem_id];
        ++c.n;
        const bool compiled = r.compile && r.compile->ok;
        if (compiled) {
            ++c.compiling;
            const double score = r.verdict ? r.verdict->score : 0.0;
            c.best_score = std::max(c.best_score, score);
            if (r.verdict && r.verdict->score >= tau) {
                ++c.semantic;
            }
        }
    }
    return counts;
}

int uniform_rollout_count(const std::map<std::string, ProblemCounts>& counts)
{
    int n = -1;
    std::ostringstream ragged;
    for (const auto& [pid, c] : counts) {
        if (n == -1) {
            n = c.n;
        }
        if (c.n != n) {
            ragged << ' ' << pid << ":" << c.n << ';';
        }
    }
    if (!ragged.str().empty()) {
        throw std::runtime_error("ragged rollout counts (expected " +
                                 std::to_string(n) + "):" + ragged.str());
    }
    return n;
}

} // namespace

EvalSummary summarize(const std::vector<RolloutRecord>& records,
                      const std::string& model_id,
                      const std::string& benchmark_id,
                      const std::vector<int>& k_list, double tau)
{
    if (records.empty()) {
        throw std::invalid_argument("summarize: no records");
    }
    const auto counts = count_per_problem(records, tau);
    const int n = uniform_rollout_count(counts);

    EvalSummary s;
    s.model_id = model_id;
    s.benchmark_id = benchmark_id;
    s.n = n;
    s.problem_count = counts.size();

    for (const int k : k_list) {
        if (k < 1 || k > n) {
            continue;
        }
        double c_sum = 0.0;
        double s_sum = 0.0;
        for (const auto& [pid, c] : counts) {
            c_sum += pass_at_k(n, c.compiling, k);
            s_sum += pass_at_k(n, c.semantic, k);
        }
        s.compile_pass[k] = 100.0 * c_sum / double(counts.size());
        s.semantic_pass[k] = 100.0 * s_sum / double(counts.size());
    }
    if (!s.compile_pass.contains(1)) {
        throw std::invalid_argument("summarize: k_list must include 1");
    }
    s.gap = s.compile_pass.at(1) - s.semantic_pass.at(1);

    const auto bo = best_of_n(records, tau);
    s.bo8_mean = bo.mean;
    s.bo8_mean_nonzero = bo.mean_nonzero;
    return s;
}

BestOfN best_of_n(const std::vector<RolloutRecord>& records, double tau)
{
    if (records.empty()) {
        throw std::invalid_argument("best_of_n: no records");
    }
    const auto counts = count_per_problem(records, tau);
    uniform_rollout_count(counts);

    BestOfN out;
    double sum = 0.0;
    double nonzero_sum = 0.0;
    std::uint64_t nonzero_count = 0;
    for (const auto& [pid, c] : counts) {
        sum += c.best_score;
        if (c.compiling > 0) {
            nonzero_sum += c.best_score;
            ++nonzero_count;
        }
    }
    out.mean = sum / double(counts.size());
    if (nonzero_count > 0) {
        out.mean_nonzero = nonzero_sum / double(nonzero_count);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string fmt_pct(const std::map<int, double>& m, int k)
{
    const auto it = m.find(k);
    if (it == m.end()) {
        return "-";
    }
    // Half-up to one decimal, applied only at render time.
    const double tenths = double(std::llround(it->second * 10.0)) / 10.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", tenths);
    return buf;
}

std::string fmt_pct_value(double v)
{
    const double tenths = double(std::llround(v * 10.0)) / 10.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", tenths);
    return buf;
}

std::string fmt_score(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

void pad(std::string& line, const std::string& cell, std::size_t width)
{
    line += cell;
    if (cell.size() < width) {
        line.append(width - cell.size(), ' ');
    } else {
        line.push_back(' ');
    }
}

std::vector<std::string> ordered_unique(
    const std::vector<EvalSummary>& summaries,
    const std::function<std::string(const EvalSummary&)>& key)
{
    std::vector<std::string> order;
    for (const auto& s : summaries) {
        const std::string k = key(s);
        if (std::find(order.begin(), order.end(), k) == order.end()) {
            order.push_back(k);
        }
    }
    return order;
}

const EvalSummary* find_summary(const std::vector<EvalSummary>& summaries,
                                const std::string& model,
                                const std::string& bench)
{
    for (const auto& s : summaries) {
        if (s.model_id == model && s.benchmark_id == bench) {
            return &s;
        }
    }
    return nullptr;
}

constexpr std::size_t kModelCol = 22;
constexpr std::size_t kNumCol = 7;

} // namespace

std::string render_table(const std::vector<EvalSummary>& summaries)
{
    if (summaries.empty()) {
        throw std::invalid_argument("render_table: no summaries");
    }
    const auto models = ordered_unique(
        summaries, [](const EvalSummary& s) { return s.model_id; });
    const auto benches = ordered_unique(
        summaries, [](const EvalSummary& s) { return s.benchmark_id; });

    std::string out;

    // Headline table.
    out += "Compile/semantic pass@k (percent; gap = C@1 - S@1)\n";
    {
        std::string header1(kModelCol + 1, ' ');
        std::string header2;
        pad(header2, "Model", kModelCol);
        for (const auto& b : benches) {
            std::string block = b;
            header1 += "| " + block;
            const std::size_t block_width = 5 * (kNumCol + 1);
            if (block.size() + 2 < block_width) {
                header1.append(block_width - block.size() - 2, ' ');
            }
            header2 += "| ";
            for (const char* col : {"C@1", "C@8", "S@1", "S@8", "gap"}) {
                pad(header2, col, kNumCol);
            }
        }
        out += header1 + "\n" + header2 + "\n";
        out += std::string(header2.size(), '-') + "\n";
        for (const auto& m : models) {
            std::string line;
            pad(line, m, kModelCol);
            for (const auto& b : benches) {
                line += "| ";
                const auto* s = find_summary(summaries, m, b);
                if (s == nullptr) {
                    for (int i = 0; i < 5; ++i) {
                        pad(line, "-", kNumCol);
                    }
                    continue;
                }
                pad(line, fmt_pct(s->compile_pass, 1), kNumCol);
                pad(line, fmt_pct(s->compile_pass, 8), kNumCol);
                pad(line, fmt_pct(s->semantic_pass, 1), kNumCol);
                pad(line, fmt_pct(s->semantic_pass, 8), kNumCol);
                pad(line, fmt_pct_value(s->gap), kNumCol);
            }
            out += line + "\n";
        }
    }

    // Full compile pass@k table.
    out += "\nCompile pass@k, all k\n";
    {
        std::string header;
        pad(header, "Model", kModelCol);
        for (const auto& b : benches) {
            header += "| ";
            for (const char* col : {"@1", "@2", "@4", "@8"}) {
                pad(header, b + " " + col, kNumCol + 11);
            }
        }
        out += header + "\n" + std::string(header.size(), '-') + "\n";
        for (const auto& m : models) {
            std::string line;
            pad(line, m, kModelCol);
            for (const auto& b : benches) {
                line += "| ";
                const auto* s = find_summary(summaries, m, b);
                for (const int k : {1, 2, 4, 8}) {
                    pad(line, s ? fmt_pct(s->compile_pass, k) : "-",
                        kNumCol + 11);
                }
            }
            out += line + "\n";
        }
    }

    // Best-of-n semantic scores.
    out += "\nBest-of-n semantic score (mean over problems; mean_nonzero "
           "conditions on >=1 compiling rollout)\n";
    {
        std::string header;
        pad(header, "Model", kModelCol);
        for (const auto& b : benches) {
            header += "| ";
            pad(header, b + " mean", kNumCol + 11);
            pad(header, b + " mean_nonzero", kNumCol + 11);
        }
        out += header + "\n" + std::string(header.size(), '-') + "\n";
        for (const auto& m : models) {
            std::string line;
            pad(line, m, kModelCol);
            for (const auto& b : benches) {
                line += "| ";
                const auto* s = find_summary(summaries, m, b);
                pad(line, s ? fmt_score(s->bo8_mean) : "-", kNumCol + 11);
                pad(line,
                    s && s->bo8_mean_nonzero ? fmt_score(*s->bo8_mean_nonzero)
                                             : "-",
                    kNumCol + 11);
            }
            out += line + "\n";
        }
    }
    return out;
}

std::string render_csv(const std::vector<EvalSummary>& summaries)
{
    std::string out =
        "model_id,benchmark_id,n,problem_count,c_at_1,c_at_2,c_at_4,c_at_8,"
        "s_at_1,s_at_2,s_at_4,s_at_8,gap,bo8_mean,bo8_mean_nonzero\n";
    const auto cell = [](const std::map<int, double>& m, int k) {
        const auto it = m.find(k);
        return it == m.end() ? std::string{} : decimal4(it->second);
    };
    for (const auto& s : summaries) {
        out += s.model_id + "," + s.benchmark_id + "," + std::to_string(s.n) +
               "," + std::to_string(s.problem_count);
        for (const int k : {1, 2, 4, 8}) {
            out += "," + cell(s.compile_pass, k);
        }
        for (const int k : {1, 2, 4, 8}) {
            out += "," + cell(s.semantic_pass, k);
        }
        out += "," + decimal4(s.gap);
        out += "," + decimal4(s.bo8_mean);
        out += ",";
        if (s.bo8_mean_nonzero) {
            out += decimal4(*s.bo8_mean_nonzero);
        }
        out += "\n";
    }
    return out;
}

json render_json(const std::vector<EvalSummary>& summaries)
{
    json j;
    j["summaries"] = json::array();
    for (const auto& s : summaries) {
        j["summaries"].push_back(s.to_json());
    }
    return j;
}

std::vector<EvalSummary> parse_summaries(const json& j)
{
    std::vector<EvalSummary> out;
    for (const auto& item : j.at("summaries")) {
        out.push_back(EvalSummary::from_json(item));
    }
    return out;
}

} // namespace autoform::eval
