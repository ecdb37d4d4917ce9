#include "autoform/types.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "autoform/sha256.hpp"
#include "autoform/text_norm.hpp"

namespace autoform {

// ---------------------------------------------------------------------------
// Helpers

std::string decimal4(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

double parse_real(const json& v)
{
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (end == s.c_str()) {
            throw std::invalid_argument("not a decimal string: " + s);
        }
        return d;
    }
    throw std::invalid_argument("expected number or decimal string");
}

std::string dump_line(const json& j)
{
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

namespace {

std::string get_string(const json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw std::invalid_argument(std::string("missing string field '") +
                                    key + "'");
    }
    return it->get<std::string>();
}

std::string get_string_or(const json& j, const char* key,
                          const std::string& fallback)
{
    const auto it = j.find(key);
    return (it != j.end() && it->is_string()) ? it->get<std::string>()
                                              : fallback;
}

std::int64_t get_int_or(const json& j, const char* key, std::int64_t fallback)
{
    const auto it = j.find(key);
    return (it != j.end() && it->is_number()) ? it->get<std::int64_t>()
                                              : fallback;
}

bool get_bool_or(const json& j, const char* key, bool fallback)
{
    const auto it = j.find(key);
    return (it != j.end() && it->is_boolean()) ? it->get<bool>() : fallback;
}

json pass_map_to_json(const std::map<int, double>& m)
{
    json out = json::object();
    for (const auto& [k, v] : m) {
        out[std::to_string(k)] = decimal4(v);
    }
    return out;
}

std::map<int, double> pass_map_from_json(const json& j, const char* key)
{
    std::map<int, double> out;
    const auto it = j.find(key);
    if (it == j.end() || !it->is_object()) {
        return out;
    }
    for (const auto& [k, v] : it->items()) {
        out[std::stoi(k)] = parse_real(v);
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Sources

const char* to_string(Source s)
{
    switch (s) {
        case Source::NuminaMath: return "NuminaMath";
        case Source::Leanabell: return "Leanabell";
        case Source::Herald: return "Herald";
        case Source::LeanWorkbook: return "LeanWorkbook";
        case Source::Other: return "Other";
    }
    return "Other";
}

Source source_from_string(std::string_view name)
{
    for (Source s : all_sources()) {
        if (name == to_string(s)) {
            return s;
        }
    }
    throw std::invalid_argument("unknown source: " + std::string(name));
}

const std::vector<Source>& all_sources()
{
    static const std::vector<Source> kAll = {
        Source::NuminaMath, Source::Leanabell, Source::Herald,
        Source::LeanWorkbook, Source::Other};
    return kAll;
}

// ---------------------------------------------------------------------------
// Identity

std::string canonical_id(std::string_view nl_text)
{
    const std::string normalized = normalize_text(nl_text);
    if (normalized.empty()) {
        throw std::invalid_argument(
            "canonical_id: text is empty after normalization");
    }
    return Sha256::hex(normalized);
}

// ---------------------------------------------------------------------------
// NlFlPair

bool has_sorry_termination(std::string_view lean_statement)
{
    std::string_view s = lean_statement;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    if (!s.ends_with("sorry")) {
        return false;
    }
    s.remove_suffix(5);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    if (s.ends_with("by")) {
        s.remove_suffix(2);
        while (!s.empty() &&
               std::isspace(static_cast<unsigned char>(s.back()))) {
            s.remove_suffix(1);
        }
    }
    return s.ends_with(":=");
}

json NlFlPair::to_json() const
{
    json j;
    j["id"] = id;
    j["source"] = to_string(source);
    j["nl_text"] = nl_text;
    j["lean_statement"] = lean_statement;
    j["topic"] = topic;
    if (injected_answer) {
        j["injected_answer"] = *injected_answer;
    }
    j["provenance"] = json{{"file", provenance.file}, {"line", provenance.line}};
    return j;
}

NlFlPair NlFlPair::from_json(const json& j)
{
    NlFlPair p;
    p.id = get_string_or(j, "id", "");
    p.source = source_from_string(get_string_or(j, "source", "Other"));
    p.nl_text = get_string(j, "nl_text");
    p.lean_statement = get_string(j, "lean_statement");
    p.topic = get_string_or(j, "topic", "");
    if (const auto it = j.find("injected_answer");
        it != j.end() && it->is_string()) {
        p.injected_answer = it->get<std::string>();
    }
    if (const auto it = j.find("provenance"); it != j.end() && it->is_object()) {
        p.provenance.file = get_string_or(*it, "file", "");
        p.provenance.line = std::uint64_t(get_int_or(*it, "line", 0));
    }
    if (p.id.empty() && !normalize_text(p.nl_text).empty()) {
        p.id = canonical_id(p.nl_text);
    }
    return p;
}

std::vector<std::string> NlFlPair::validate() const
{
    std::vector<std::string> errs;
    if (normalize_text(nl_text).empty()) {
        errs.push_back("nl_text is empty after trimming");
    }
    if (lean_statement.find("sorry") == std::string::npos) {
        errs.push_back("lean_statement lacks the 'sorry' token");
    } else if (!has_sorry_termination(lean_statement)) {
        errs.push_back(
            "lean_statement does not terminate with ':= by sorry' or "
            "':= sorry'");
    }
    if (errs.empty() && id != canonical_id(nl_text)) {
        errs.push_back("id is not the canonical id of nl_text");
    }
    return errs;
}

// ---------------------------------------------------------------------------
// CompileOutcome

json CompileOutcome::to_json() const
{
    json diags = json::array();
    for (const auto& d : diagnostics) {
        diags.push_back(json{{"severity", d.severity},
                             {"message", d.message},
                             {"line", d.line}});
    }
    json j;
    j["ok"] = ok;
    j["diagnostics"] = std::move(diags);
    j["elapsed"] = elapsed;
    j["toolchain_id"] = toolchain_id;
    return j;
}

CompileOutcome CompileOutcome::from_json(const json& j)
{
    CompileOutcome o;
    o.ok = get_bool_or(j, "ok", false);
    if (const auto it = j.find("diagnostics"); it != j.end() && it->is_array()) {
        for (const auto& d : *it) {
            o.diagnostics.push_back(Diagnostic{get_string_or(d, "severity", ""),
                                               get_string_or(d, "message", ""),
                                               get_int_or(d, "line", 0)});
        }
    }
    o.elapsed = get_int_or(j, "elapsed", 0);
    o.toolchain_id = get_string_or(j, "toolchain_id", "");
    return o;
}

std::vector<std::string> CompileOutcome::validate() const
{
    std::vector<std::string> errs;
    if (ok) {
        for (const auto& d : diagnostics) {
            if (d.severity == "error") {
                errs.push_back("ok=true but an error diagnostic is present");
                break;
            }
        }
    }
    if (toolchain_id.empty()) {
        errs.push_back("toolchain_id is empty");
    }
    return errs;
}

// ---------------------------------------------------------------------------
// JudgeVerdict

json JudgeVerdict::to_json() const
{
    json j;
    j["score"] = decimal4(score);
    j["reason"] = reason;
    j["raw_response"] = raw_response;
    j["attempts"] = attempts;
    j["degraded"] = degraded;
    return j;
}

JudgeVerdict JudgeVerdict::from_json(const json& j)
{
    JudgeVerdict v;
    if (const auto it = j.find("score"); it != j.end()) {
        v.score = parse_real(*it);
    }
    v.reason = get_string_or(j, "reason", "");
    v.raw_response = get_string_or(j, "raw_response", "");
    v.attempts = int(get_int_or(j, "attempts", 1));
    v.degraded = get_bool_or(j, "degraded", false);
    return v;
}

std::vector<std::string> JudgeVerdict::validate() const
{
    std::vector<std::string> errs;
    if (score < 0.0 || score > 1.0) {
        errs.push_back("score outside [0, 1]");
    }
    if (degraded && score != 0.0) {
        errs.push_back("degraded verdict must carry score 0.0");
    }
    if (attempts < 1) {
        errs.push_back("attempts must be positive");
    }
    return errs;
}

// ---------------------------------------------------------------------------
// RewardResult

RewardResult RewardResult::compile_failed()
{
    return RewardResult{};
}

RewardResult RewardResult::compiled_with(JudgeVerdict verdict)
{
    RewardResult r;
    r.compiled_ = true;
    r.reward_ = verdict.score;
    r.verdict_ = std::move(verdict);
    return r;
}

json RewardResult::to_json() const
{
    json j;
    j["compiled"] = compiled_;
    if (verdict_) {
        j["verdict"] = verdict_->to_json();
    }
    j["reward"] = decimal4(reward_);
    return j;
}

RewardResult RewardResult::from_json(const json& j)
{
    const bool compiled = get_bool_or(j, "compiled", false);
    const auto vit = j.find("verdict");
    const bool has_verdict =
        vit != j.end() && !vit->is_null() && vit->is_object();

    if (!compiled) {
        if (has_verdict) {
            throw std::invalid_argument(
                "reward record claims compiled=false with a verdict");
        }
        if (const auto rit = j.find("reward");
            rit != j.end() && parse_real(*rit) != 0.0) {
            throw std::invalid_argument(
                "reward record claims compiled=false with nonzero reward");
        }
        return compile_failed();
    }
    if (!has_verdict) {
        throw std::invalid_argument(
            "reward record claims compiled=true without a verdict");
    }
    auto r = compiled_with(JudgeVerdict::from_json(*vit));
    if (const auto rit = j.find("reward"); rit != j.end()) {
        const double stored = parse_real(*rit);
        if (decimal4(stored) != decimal4(r.reward_)) {
            throw std::invalid_argument(
                "reward does not match the verdict score");
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// RolloutRecord

bool RolloutRecord::recompute_semantic(double tau) const
{
    return compile && compile->ok && verdict && verdict->score >= tau;
}

json RolloutRecord::to_json() const
{
    json j;
    j["problem_id"] = problem_id;
    j["rollout_index"] = rollout_index;
    j["completion"] = completion;
    if (extracted_code) {
        j["extracted_code"] = *extracted_code;
    }
    if (compile) {
        j["compile"] = compile->to_json();
    }
    if (verdict) {
        j["verdict"] = verdict->to_json();
    }
    j["semantic_success"] = semantic_success;
    j["gen_failed"] = gen_failed;
    return j;
}

RolloutRecord RolloutRecord::from_json(const json& j)
{
    RolloutRecord r;
    r.problem_id = get_string(j, "problem_id");
    r.rollout_index = int(get_int_or(j, "rollout_index", 0));
    r.completion = get_string_or(j, "completion", "");
    if (const auto it = j.find("extracted_code");
        it != j.end() && it->is_string()) {
        r.extracted_code = it->get<std::string>();
    }
    if (const auto it = j.find("compile"); it != j.end() && it->is_object()) {
        r.compile = CompileOutcome::from_json(*it);
    }
    if (const auto it = j.find("verdict"); it != j.end() && it->is_object()) {
        r.verdict = JudgeVerdict::from_json(*it);
    }
    r.semantic_success = get_bool_or(j, "semantic_success", false);
    r.gen_failed = get_bool_or(j, "gen_failed", false);
    return r;
}

std::vector<std::string> RolloutRecord::validate(double tau) const
{
    std::vector<std::string> errs;
    if (rollout_index < 0) {
        errs.push_back("rollout_index is negative");
    }
    if (semantic_success != recompute_semantic(tau)) {
        errs.push_back("semantic_success does not match its recomputation");
    }
    if (semantic_success && !(compile && compile->ok)) {
        errs.push_back("semantic_success=true on a non-compiling rollout");
    }
    return errs;
}

// ---------------------------------------------------------------------------
// EvalSummary

json EvalSummary::to_json() const
{
    json j;
    j["model_id"] = model_id;
    j["benchmark_id"] = benchmark_id;
    j["n"] = n;
    j["compile_pass"] = pass_map_to_json(compile_pass);
    j["semantic_pass"] = pass_map_to_json(semantic_pass);
    j["gap"] = decimal4(gap);
    j["bo8_mean"] = decimal4(bo8_mean);
    j["bo8_mean_nonzero"] =
        bo8_mean_nonzero ? json(decimal4(*bo8_mean_nonzero)) : json(nullptr);
    j["problem_count"] = problem_count;
    return j;
}

EvalSummary EvalSummary::from_json(const json& j)
{
    EvalSummary s;
    s.model_id = get_string(j, "model_id");
    s.benchmark_id = get_string(j, "benchmark_id");
    s.n = int(get_int_or(j, "n", 8));
    s.compile_pass = pass_map_from_json(j, "compile_pass");
    s.semantic_pass = pass_map_from_json(j, "semantic_pass");
    if (const auto it = j.find("gap"); it != j.end()) {
        s.gap = parse_real(*it);
    }
    if (const auto it = j.find("bo8_mean"); it != j.end()) {
        s.bo8_mean = parse_real(*it);
    }
    if (const auto it = j.find("bo8_mean_nonzero");
        it != j.end() && !it->is_null()) {
        s.bo8_mean_nonzero = parse_real(*it);
    }
    s.problem_count = std::uint64_t(get_int_or(j, "problem_count", 0));
    return s;
}

std::vector<std::string> EvalSummary::validate() const
{
    std::vector<std::string> errs;
    for (const auto& [k, sp] : semantic_pass) {
        const auto it = compile_pass.find(k);
        if (it != compile_pass.end() && sp > it->second + 1e-9) {
            errs.push_back("semantic_pass exceeds compile_pass at k=" +
                           std::to_string(k));
        }
    }
    const auto check_monotone = [&errs](const std::map<int, double>& m,
                                        const char* name) {
        double prev = -1.0;
        for (const auto& [k, v] : m) {
            if (v < prev - 1e-9) {
                errs.push_back(std::string(name) +
                               " decreases at k=" + std::to_string(k));
            }
            prev = std::max(prev, v);
        }
    };
    check_monotone(compile_pass, "compile_pass");
    check_monotone(semantic_pass, "semantic_pass");

    const auto c1 = compile_pass.find(1);
    const auto s1 = semantic_pass.find(1);
    if (c1 != compile_pass.end() && s1 != semantic_pass.end() &&
        std::fabs(gap - (c1->second - s1->second)) > 1e-6) {
        errs.push_back("gap is not compile_pass[1] - semantic_pass[1]");
    }
    return errs;
}

// ---------------------------------------------------------------------------
// OverlapSpec

std::map<Source, double> OverlapSpec::default_source_mix()
{
    return {{Source::NuminaMath, 0.40},
            {Source::Leanabell, 0.35},
            {Source::Herald, 0.15},
            {Source::LeanWorkbook, 0.10}};
}

json OverlapSpec::to_json() const
{
    json mix = json::object();
    for (const auto& [s, f] : source_mix) {
        mix[to_string(s)] = decimal4(f);
    }
    json j;
    j["rho"] = decimal4(rho);
    j["grpo_size"] = grpo_size;
    j["sft_size"] = sft_size;
    j["seed"] = seed;
    j["source_mix"] = std::move(mix);
    return j;
}

OverlapSpec OverlapSpec::from_json(const json& j)
{
    OverlapSpec s;
    if (const auto it = j.find("rho"); it != j.end()) {
        s.rho = parse_real(*it);
    }
    s.grpo_size = std::uint64_t(get_int_or(j, "grpo_size", 16000));
    s.sft_size = std::uint64_t(get_int_or(j, "sft_size", 20000));
    s.seed = std::uint64_t(get_int_or(j, "seed", 0));
    if (const auto it = j.find("source_mix"); it != j.end() && it->is_object()) {
        s.source_mix.clear();
        for (const auto& [k, v] : it->items()) {
            s.source_mix[source_from_string(k)] = parse_real(v);
        }
    }
    return s;
}

std::vector<std::string> OverlapSpec::validate() const
{
    std::vector<std::string> errs;
    if (rho < 0.0 || rho > 1.0) {
        errs.push_back("rho outside [0, 1]");
    }
    if (grpo_size == 0 || sft_size == 0) {
        errs.push_back("pool sizes must be positive");
    }
    double sum = 0.0;
    for (const auto& [s, f] : source_mix) {
        if (f < 0.0) {
            errs.push_back(std::string("negative mix fraction for ") +
                           to_string(s));
        }
        sum += f;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        errs.push_back("source_mix does not sum to 1");
    }
    return errs;
}

// ---------------------------------------------------------------------------
// DatasetManifest

json DatasetManifest::to_json() const
{
    json per = json::object();
    for (const auto& [k, v] : per_source) {
        per[k] = v;
    }
    json j;
    j["stage"] = stage;
    j["input_count"] = input_count;
    j["output_count"] = output_count;
    j["per_source"] = std::move(per);
    j["dedup_dropped"] = dedup_dropped;
    j["rejected"] = rejected;
    if (vet_pass_rate) {
        j["vet_pass_rate"] = decimal4(*vet_pass_rate);
    }
    return j;
}

DatasetManifest DatasetManifest::from_json(const json& j)
{
    DatasetManifest m;
    m.stage = get_string_or(j, "stage", "");
    m.input_count = std::uint64_t(get_int_or(j, "input_count", 0));
    m.output_count = std::uint64_t(get_int_or(j, "output_count", 0));
    if (const auto it = j.find("per_source"); it != j.end() && it->is_object()) {
        for (const auto& [k, v] : it->items()) {
            m.per_source[k] = v.get<std::uint64_t>();
        }
    }
    m.dedup_dropped = std::uint64_t(get_int_or(j, "dedup_dropped", 0));
    m.rejected = std::uint64_t(get_int_or(j, "rejected", 0));
    if (const auto it = j.find("vet_pass_rate");
        it != j.end() && !it->is_null()) {
        m.vet_pass_rate = parse_real(*it);
    }
    return m;
}

std::vector<std::string> DatasetManifest::validate() const
{
    std::vector<std::string> errs;
    std::uint64_t sum = 0;
    for (const auto& [k, v] : per_source) {
        sum += v;
    }
    if (!per_source.empty() && sum != output_count) {
        errs.push_back("per-source counts do not sum to output_count");
    }
    if (output_count + dedup_dropped + rejected != input_count) {
        errs.push_back("conservation violated: output + dropped != input");
    }
    return errs;
}

} // namespace autoform
