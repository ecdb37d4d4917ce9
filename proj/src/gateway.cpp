#include "autoform/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "autoform/prompts.hpp"
#include "autoform/sha256.hpp"
#include "autoform/subprocess.hpp"

namespace autoform::gateway {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

CompilerConfig CompilerConfig::from_json(const json& j)
{
    CompilerConfig c;
    c.command = j.value("command", c.command);
    c.workdir = j.value("workdir", c.workdir);
    c.preamble = j.value("preamble", c.preamble);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.max_parallel = j.value("max_parallel", c.max_parallel);
    c.toolchain_id = j.value("toolchain_id", c.toolchain_id);
    return c;
}

std::vector<std::string> CompilerConfig::validate() const
{
    std::vector<std::string> errs;
    if (max_parallel < 1) {
        errs.push_back("max_parallel must be >= 1");
    }
    if (timeout_ms <= 0) {
        errs.push_back("timeout_ms must be positive");
    }
    if (toolchain_id.empty()) {
        errs.push_back("toolchain_id must be non-empty");
    }
    return errs;
}

JudgeConfig JudgeConfig::from_json(const json& j)
{
    JudgeConfig c;
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    if (j.contains("temperature")) {
        c.temperature = parse_real(j.at("temperature"));
    }
    c.max_output_tokens = j.value("max_output_tokens", c.max_output_tokens);
    c.retries = j.value("retries", c.retries);
    c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
    if (j.contains("tau")) {
        c.tau = parse_real(j.at("tau"));
    }
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    return c;
}

std::vector<std::string> JudgeConfig::validate() const
{
    std::vector<std::string> errs;
    if (temperature < 0.0) {
        errs.push_back("temperature must be >= 0");
    }
    if (retries < 0) {
        errs.push_back("retries must be >= 0");
    }
    if (tau < 0.0 || tau > 1.0) {
        errs.push_back("tau outside [0, 1]");
    }
    if (max_in_flight < 1) {
        errs.push_back("max_in_flight must be >= 1");
    }
    return errs;
}

// ---------------------------------------------------------------------------
// Code-block extraction

namespace {

struct FencedBlock {
    std::string label;
    std::string body;
};

std::vector<FencedBlock> fenced_blocks(std::string_view text)
{
    std::vector<FencedBlock> blocks;
    std::istringstream in{std::string(text)};
    std::string line;
    bool inside = false;
    FencedBlock current;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::string_view v = line;
        while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) {
            v.remove_prefix(1);
        }
        if (v.starts_with("```")) {
            if (!inside) {
                inside = true;
                current.label = std::string(v.substr(3));
                while (!current.label.empty() &&
                       std::isspace(static_cast<unsigned char>(
                           current.label.back()))) {
                    current.label.pop_back();
                }
                current.body.clear();
            } else {
                if (!current.body.empty() && current.body.back() == '\n') {
                    current.body.pop_back();
                }
                blocks.push_back(std::move(current));
                current = {};
                inside = false;
            }
            continue;
        }
        if (inside) {
            current.body += line;
            current.body += '\n';
        }
    }
    return blocks;
}

} // namespace

std::optional<std::string> extract_lean_block(std::string_view completion)
{
    const auto blocks = fenced_blocks(completion);
    for (const auto& b : blocks) {
        if (b.label == "lean4" || b.label == "lean") {
            return b.body;
        }
    }
    for (const auto& b : blocks) {
        if (b.label.empty()) {
            return b.body;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Cache

std::optional<std::string> ResultCache::get(const std::string& key)
{
    std::lock_guard lock(mu_);
    const auto it = map_.find(key);
    if (it == map_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return it->second.value;
}

void ResultCache::put(const std::string& key, std::string value)
{
    const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    std::lock_guard lock(mu_);
    map_.emplace(key, Entry{std::move(value), now});
}

std::size_t ResultCache::entries() const
{
    std::lock_guard lock(mu_);
    return map_.size();
}

// ---------------------------------------------------------------------------
// Mock compiler

CompileOutcome MockCompiler::typecheck(const std::string& code)
{
    CompileOutcome o;
    o.toolchain_id = "mock";
    o.elapsed = 0;
    o.ok = code.find("--FAIL") == std::string::npos;
    if (!o.ok) {
        o.diagnostics.push_back(
            {"error", "mock compile failure (--FAIL marker)", 0});
    }
    return o;
}

// ---------------------------------------------------------------------------
// Command compiler

CommandCompiler::CommandCompiler(CompilerConfig cfg) : cfg_(std::move(cfg))
{
    if (const auto errs = cfg_.validate(); !errs.empty()) {
        throw std::invalid_argument("bad compiler config: " + errs.front());
    }
}

bool CommandCompiler::healthy() const
{
    const auto argv = split_command(cfg_.command);
    return !argv.empty() && executable_exists(argv[0]);
}

std::vector<Diagnostic> CommandCompiler::parse_diagnostics(
    const std::string& text)
{
    std::vector<Diagnostic> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        for (const char* sev : {"error", "warning", "info"}) {
            const std::string needle = std::string(sev) + ": ";
            const auto pos = line.find(needle);
            if (pos == std::string::npos) {
                continue;
            }
            // Lean style: <path>:<line>:<col>: <severity>: <message>
            std::int64_t line_no = 0;
            const std::string_view prefix =
                std::string_view(line).substr(0, pos);
            // Second-to-last ':'-separated field of the prefix is the line.
            std::vector<std::string_view> fields;
            std::size_t start = 0;
            for (std::size_t i = 0; i < prefix.size(); ++i) {
                if (prefix[i] == ':') {
                    fields.push_back(prefix.substr(start, i - start));
                    start = i + 1;
                }
            }
            if (fields.size() >= 2) {
                const auto f = fields[fields.size() - 2];
                line_no = std::strtol(std::string(f).c_str(), nullptr, 10);
            }
            out.push_back(
                {sev, line.substr(pos + needle.size()), line_no});
            break;
        }
    }
    return out;
}

CompileOutcome CommandCompiler::typecheck(const std::string& code)
{
    const auto start = std::chrono::steady_clock::now();

    const std::string stem =
        "af_" + Sha256::hex(code).substr(0, 16) + "_" +
        std::to_string(scratch_counter_.fetch_add(1)) + ".lean";
    const fs::path scratch = fs::path(cfg_.workdir) / stem;
    {
        std::ofstream out(scratch);
        if (!out.is_open()) {
            throw std::runtime_error("cannot write scratch file " +
                                     scratch.string());
        }
        out << cfg_.preamble << "\n\n" << code << "\n";
    }

    auto argv = split_command(cfg_.command);
    bool substituted = false;
    for (auto& a : argv) {
        const auto pos = a.find("{file}");
        if (pos != std::string::npos) {
            a = a.substr(0, pos) + scratch.string() + a.substr(pos + 6);
            substituted = true;
        }
    }
    if (!substituted) {
        argv.push_back(scratch.string());
    }

    const CommandResult run = run_command(argv, cfg_.workdir, cfg_.timeout_ms);
    std::error_code ec;
    fs::remove(scratch, ec);

    if (run.spawn_failed) {
        throw std::runtime_error("compiler command not found: " + argv[0]);
    }

    CompileOutcome o;
    o.toolchain_id = cfg_.toolchain_id;
    o.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    if (run.timed_out) {
        o.ok = false;
        o.diagnostics.push_back(
            {"error",
             "timeout after " + std::to_string(cfg_.timeout_ms) + " ms", 0});
        return o;
    }
    o.diagnostics = parse_diagnostics(run.output);
    bool has_error = false;
    for (const auto& d : o.diagnostics) {
        has_error = has_error || d.severity == "error";
    }
    o.ok = run.exit_code == 0 && !has_error;
    return o;
}

// ---------------------------------------------------------------------------
// Mock judge

double MockJudge::hash_score(const std::string& candidate)
{
    const std::string hex = Sha256::hex(candidate);
    const std::uint64_t h = std::strtoull(hex.substr(0, 15).c_str(), nullptr, 16);
    return double(h % 1001) / 1000.0;
}

JudgeVerdict MockJudge::judge(const std::string& /*nl_text*/,
                              const std::string& candidate,
                              const std::string& /*ground_truth*/)
{
    JudgeVerdict v;
    v.attempts = 1;
    const auto pos = candidate.find("--JUDGE:");
    if (pos != std::string::npos) {
        const double parsed =
            std::strtod(candidate.c_str() + pos + 8, nullptr);
        v.score = std::min(1.0, std::max(0.0, parsed));
        v.reason = "mock score marker";
        v.raw_response = "--JUDGE:" + decimal4(parsed);
        return v;
    }
    v.score = hash_score(candidate);
    v.reason = "mock hash score";
    v.raw_response = "hash";
    return v;
}

// ---------------------------------------------------------------------------
// HTTP judge

namespace {

// Splits "http://host:port/some/path" into base and path.
std::pair<std::string, std::string> split_endpoint(const std::string& url)
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

HttpJudge::HttpJudge(JudgeConfig cfg) : cfg_(std::move(cfg))
{
    if (const auto errs = cfg_.validate(); !errs.empty()) {
        throw std::invalid_argument("bad judge config: " + errs.front());
    }
    if (cfg_.endpoint.empty()) {
        throw std::invalid_argument("judge endpoint is empty");
    }
}

bool HttpJudge::healthy() const
{
    const std::string base = split_endpoint(cfg_.endpoint).first;
    httplib::Client client(base);
    client.set_connection_timeout(5, 0);
    // Any HTTP response counts as reachable; only transport failure does
    // not.
    return bool(client.Get("/"));
}

json HttpJudge::build_request_body(const JudgeConfig& cfg,
                                   const std::string& nl_text,
                                   const std::string& candidate,
                                   const std::string& ground_truth)
{
    json body;
    body["model"] = cfg.model;
    body["temperature"] = cfg.temperature;
    body["max_tokens"] = cfg.max_output_tokens;
    body["messages"] = json::array({json{
        {"role", "user"},
        {"content",
         prompts::render_judge_prompt(nl_text, candidate, ground_truth)}}});
    return body;
}

std::optional<std::pair<double, std::string>> HttpJudge::parse_score(
    const std::string& text)
{
    // The content may be the object itself, or prose wrapping it. Try
    // every balanced {...} span, first hit wins.
    for (std::size_t start = text.find('{'); start != std::string::npos;
         start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (c == '\\') {
                    ++i;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
                if (depth == 0) {
                    const json obj = json::parse(
                        text.substr(start, i - start + 1), nullptr, false);
                    if (!obj.is_discarded() && obj.is_object() &&
                        obj.contains("score")) {
                        try {
                            const double score = parse_real(obj.at("score"));
                            return std::make_pair(
                                score, obj.value("reason", std::string{}));
                        } catch (const std::exception&) {
                            // fall through to the next candidate span
                        }
                    }
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

JudgeVerdict HttpJudge::judge(const std::string& nl_text,
                              const std::string& candidate,
                              const std::string& ground_truth)
{
    const auto [base, path] = split_endpoint(cfg_.endpoint);
    const std::string payload =
        build_request_body(cfg_, nl_text, candidate, ground_truth).dump();

    JudgeVerdict v;
    for (int attempt = 1; attempt <= std::max(1, cfg_.retries + 1); ++attempt) {
        v.attempts = attempt;
        if (attempt > 1 && cfg_.backoff_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(
                cfg_.backoff_ms << (attempt - 2)));
        }

        httplib::Client client(base);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (const char* key = std::getenv(cfg_.api_key_env.c_str());
            key != nullptr && *key != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        const auto res =
            client.Post(path, headers, payload, "application/json");
        if (!res || res->status < 200 || res->status >= 300) {
            continue;
        }
        v.raw_response = res->body;

        // Prefer the chat-completion content field when present.
        std::string content = res->body;
        const json envelope = json::parse(res->body, nullptr, false);
        if (!envelope.is_discarded() && envelope.contains("choices") &&
            envelope["choices"].is_array() && !envelope["choices"].empty()) {
            const auto& choice = envelope["choices"][0];
            if (choice.contains("message") &&
                choice["message"].contains("content") &&
                choice["message"]["content"].is_string()) {
                content = choice["message"]["content"].get<std::string>();
            }
        }

        const auto parsed = parse_score(content);
        if (!parsed) {
            continue;
        }
        const auto [raw_score, reason] = *parsed;
        v.score = std::min(1.0, std::max(0.0, raw_score));
        v.reason = reason;
        if (raw_score < 0.0 || raw_score > 1.0) {
            v.reason += " (score clamped from " + decimal4(raw_score) + ")";
        }
        v.degraded = false;
        return v;
    }

    v.score = 0.0;
    v.degraded = true;
    v.reason = "judge unavailable or unparseable after " +
               std::to_string(v.attempts) + " attempt(s)";
    return v;
}

// ---------------------------------------------------------------------------
// Reward engine

RewardEngine::RewardEngine(CompilerConfig compiler_cfg, JudgeConfig judge_cfg,
                           std::shared_ptr<Compiler> compiler,
                           std::shared_ptr<Judge> judge)
    : compiler_cfg_(std::move(compiler_cfg)),
      judge_cfg_(std::move(judge_cfg)),
      compiler_(std::move(compiler)),
      judge_(std::move(judge)),
      compile_sem_(std::max(1, compiler_cfg_.max_parallel)),
      judge_sem_(std::max(1, judge_cfg_.max_in_flight))
{
}

CompileOutcome RewardEngine::typecheck_cached(const std::string& code)
{
    Sha256 h;
    h.update("compile\0", 8);
    h.update(compiler_cfg_.preamble);
    h.update("\0", 1);
    h.update(compiler_->toolchain_id());
    h.update("\0", 1);
    h.update(code);
    const std::string key = to_hex(h.digest());

    if (const auto hit = compile_cache_.get(key)) {
        return CompileOutcome::from_json(json::parse(*hit));
    }
    CompileOutcome outcome;
    {
        SemaphoreGuard guard(compile_sem_);
        ++compiler_calls_;
        outcome = compiler_->typecheck(code);
    }
    compile_cache_.put(key, dump_line(outcome.to_json()));
    return outcome;
}

JudgeVerdict RewardEngine::judge_cached(const std::string& nl_text,
                                        const std::string& candidate,
                                        const std::string& ground_truth)
{
    Sha256 h;
    h.update("judge\0", 6);
    h.update(judge_->model());
    h.update("\0", 1);
    h.update(nl_text);
    h.update("\0", 1);
    h.update(candidate);
    h.update("\0", 1);
    h.update(ground_truth);
    const std::string key = to_hex(h.digest());

    if (const auto hit = judge_cache_.get(key)) {
        return JudgeVerdict::from_json(json::parse(*hit));
    }
    JudgeVerdict verdict;
    {
        SemaphoreGuard guard(judge_sem_);
        ++judge_calls_;
        verdict = judge_->judge(nl_text, candidate, ground_truth);
    }
    // Degraded verdicts are transient failures; caching them would pin
    // a zero score past backend recovery.
    if (!verdict.degraded) {
        judge_cache_.put(key, dump_line(verdict.to_json()));
    }
    return verdict;
}

RewardEngine::Detail RewardEngine::evaluate(const std::string& nl_text,
                                            const std::string& completion,
                                            const std::string& ground_truth)
{
    Detail d;
    d.extracted_code = extract_lean_block(completion);
    if (!d.extracted_code) {
        d.compile.ok = false;
        d.compile.toolchain_id = compiler_->toolchain_id();
        d.compile.diagnostics.push_back({"error", "no_code_block", 0});
        d.result = RewardResult::compile_failed();
        return d;
    }

    d.compile = typecheck_cached(*d.extracted_code);
    if (!d.compile.ok) {
        d.result = RewardResult::compile_failed();
        return d;
    }

    d.verdict = judge_cached(nl_text, *d.extracted_code, ground_truth);
    d.result = RewardResult::compiled_with(*d.verdict);
    return d;
}

RewardResult RewardEngine::compute_reward(const std::string& nl_text,
                                          const std::string& completion,
                                          const std::string& ground_truth)
{
    return evaluate(nl_text, completion, ground_truth).result;
}

// ---------------------------------------------------------------------------
// Reward service

struct RewardService::Impl {
    std::shared_ptr<RewardEngine> engine;
    ServiceOptions options;
    httplib::Server server;
    std::thread serve_thread;
    int bound_port = 0;
};

RewardService::RewardService(std::shared_ptr<RewardEngine> engine,
                             ServiceOptions options)
    : impl_(std::make_unique<Impl>())
{
    impl_->engine = std::move(engine);
    impl_->options = std::move(options);
}

RewardService::~RewardService()
{
    stop();
}

json RewardService::handle_reward(const json& body) const
{
    if (!body.is_object() || !body.contains("items") ||
        !body["items"].is_array()) {
        throw BadRequest{json{{"error", "body must carry an 'items' array"}}};
    }
    const auto& items = body["items"];

    json item_errors = json::array();
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        std::string missing;
        for (const char* field : {"id", "prompt", "completion",
                                  "ground_truth"}) {
            if (!item.is_object() || !item.contains(field) ||
                !item[field].is_string()) {
                missing = field;
                break;
            }
        }
        if (!missing.empty()) {
            item_errors.push_back(json{
                {"index", i},
                {"error", "missing string field '" + missing + "'"}});
        }
    }
    if (!item_errors.empty()) {
        throw BadRequest{
            json{{"error", "malformed items"}, {"items", item_errors}}};
    }

    std::vector<json> results(items.size());
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::min<std::size_t>(
        items.size(), std::size_t(std::max(1, impl_->options.batch_parallel)));

    auto process = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= items.size()) {
                return;
            }
            const auto& item = items[i];
            const auto started = std::chrono::steady_clock::now();
            json r;
            r["id"] = item["id"];
            try {
                const auto detail = impl_->engine->evaluate(
                    item["prompt"].get<std::string>(),
                    item["completion"].get<std::string>(),
                    item["ground_truth"].get<std::string>());
                const json reward_fields = detail.result.to_json();
                for (const auto& [k, v] : reward_fields.items()) {
                    r[k] = v;
                }
            } catch (const std::exception& ex) {
                r["compiled"] = false;
                r["reward"] = decimal4(0.0);
                r["error"] = ex.what();
            }
            r["elapsed_ms"] =
                std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started)
                    .count();
            results[i] = std::move(r);
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(process);
    }
    for (auto& t : pool) {
        t.join();
    }

    json out;
    out["results"] = json::array();
    for (auto& r : results) {
        out["results"].push_back(std::move(r));
    }
    return out;
}

json RewardService::handle_health() const
{
    const auto& engine = *impl_->engine;
    const bool compiler_ok = engine.compiler().healthy();
    const bool judge_ok = engine.judge_backend().healthy();
    json j;
    j["status"] = compiler_ok && judge_ok ? "ok" : "degraded";
    j["compiler"] = json{{"mode", engine.compiler().mode()},
                         {"toolchain_id", engine.compiler().toolchain_id()},
                         {"reachable", compiler_ok}};
    j["judge"] = json{{"mode", engine.judge_backend().mode()},
                      {"model", engine.judge_backend().model()},
                      {"reachable", judge_ok}};
    j["cache"] = json{
        {"compile_entries", engine.compile_cache().entries()},
        {"judge_entries", engine.judge_cache().entries()},
        {"hits",
         engine.compile_cache().hits() + engine.judge_cache().hits()},
        {"misses",
         engine.compile_cache().misses() + engine.judge_cache().misses()}};
    return j;
}

void RewardService::start()
{
    if (!impl_->engine->compiler().healthy()) {
        throw std::runtime_error(
            "compiler backend unavailable; refusing to serve");
    }
    if (!impl_->engine->judge_backend().healthy()) {
        throw std::runtime_error(
            "judge backend unreachable; refusing to serve");
    }

    auto& server = impl_->server;
    server.Post("/v1/reward", [this](const httplib::Request& req,
                                     httplib::Response& res) {
        const json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded()) {
            res.status = 400;
            res.set_content(dump_line(json{{"error", "invalid JSON body"}}),
                            "application/json");
            return;
        }
        try {
            res.set_content(dump_line(handle_reward(body)),
                            "application/json");
        } catch (const BadRequest& bad) {
            res.status = 400;
            res.set_content(dump_line(bad.body), "application/json");
        } catch (const std::exception& ex) {
            res.status = 500;
            res.set_content(dump_line(json{{"error", ex.what()}}),
                            "application/json");
        }
    });
    server.Get("/healthz", [this](const httplib::Request&,
                                  httplib::Response& res) {
        res.set_content(dump_line(handle_health()), "application/json");
    });

    if (impl_->options.port == 0) {
        impl_->bound_port = server.bind_to_any_port(impl_->options.host);
        if (impl_->bound_port <= 0) {
            throw std::runtime_error("cannot bind to an ephemeral port on " +
                                     impl_->options.host);
        }
    } else {
        if (!server.bind_to_port(impl_->options.host, impl_->options.port)) {
            throw std::runtime_error(
                "cannot bind " + impl_->options.host + ":" +
                std::to_string(impl_->options.port));
        }
        impl_->bound_port = impl_->options.port;
    }

    impl_->serve_thread = std::thread([this] {
        impl_->server.listen_after_bind();
    });
    while (!impl_->server.is_running()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
}

void RewardService::stop()
{
    if (impl_ && impl_->serve_thread.joinable()) {
        impl_->server.stop();
        impl_->serve_thread.join();
    }
}

int RewardService::bound_port() const
{
    return impl_->bound_port;
}

} // namespace autoform::gateway
