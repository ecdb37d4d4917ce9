#include "autoform/curation.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "autoform/jsonl.hpp"
#include "autoform/rng.hpp"
#include "autoform/text_norm.hpp"

namespace autoform::curation {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Ingestion

std::vector<std::string> SourceAdapter::validate() const
{
    std::vector<std::string> errs;
    if (path.empty()) {
        errs.push_back("adapter path is empty");
    }
    if (nl_field.empty() || fl_field.empty()) {
        errs.push_back("field_map must cover nl_text and lean_statement");
    }
    return errs;
}

namespace {

bool glob_match(const std::string& pattern, const std::string& name)
{
    // '*' in the filename component only.
    std::size_t p = 0, n = 0, star = std::string::npos, mark = 0;
    while (n < name.size()) {
        if (p < pattern.size() &&
            (pattern[p] == name[n] || pattern[p] == '?')) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = n;
        } else if (star != std::string::npos) {
            p = star + 1;
            n = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') {
        ++p;
    }
    return p == pattern.size();
}

std::vector<fs::path> expand_paths(const std::string& pattern)
{
    const fs::path p(pattern);
    const std::string filename = p.filename().string();
    if (filename.find('*') == std::string::npos &&
        filename.find('?') == std::string::npos) {
        return {p};
    }
    const fs::path dir = p.parent_path().empty() ? "." : p.parent_path();
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("no such directory: " + dir.string());
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() &&
            glob_match(filename, entry.path().filename().string())) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) {
        throw std::runtime_error("pattern matched no files: " + pattern);
    }
    return out;
}

std::string trim_copy(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

} // namespace

IngestResult ingest(const std::vector<SourceAdapter>& adapters)
{
    IngestResult result;
    result.manifest.stage = "ingest";

    for (const auto& adapter : adapters) {
        if (const auto errs = adapter.validate(); !errs.empty()) {
            throw std::runtime_error("bad adapter for " +
                                     std::string(to_string(adapter.source)) +
                                     ": " + errs.front());
        }
        for (const auto& file : expand_paths(adapter.path)) {
            const auto stats = for_each_jsonl(file, [&](std::size_t line_no,
                                                        json&& raw) {
                const auto nl_it = raw.find(adapter.nl_field);
                const auto fl_it = raw.find(adapter.fl_field);
                if (nl_it == raw.end() || !nl_it->is_string() ||
                    fl_it == raw.end() || !fl_it->is_string()) {
                    ++result.manifest.rejected;
                    return;
                }
                NlFlPair p;
                p.source = adapter.source;
                p.nl_text = trim_copy(nl_it->get<std::string>());
                p.lean_statement = trim_copy(fl_it->get<std::string>());
                if (normalize_text(p.nl_text).empty() ||
                    p.lean_statement.empty()) {
                    ++result.manifest.rejected;
                    return;
                }
                if (!adapter.topic_field.empty()) {
                    const auto t = raw.find(adapter.topic_field);
                    if (t != raw.end() && t->is_string()) {
                        p.topic = t->get<std::string>();
                    }
                }
                p.id = canonical_id(p.nl_text);
                p.provenance = {file.string(), line_no};
                ++result.manifest.per_source[to_string(adapter.source)];
                result.records.push_back(std::move(p));
            });
            result.manifest.rejected += stats.malformed;
            result.manifest.input_count += stats.lines;
        }
    }
    result.manifest.output_count = result.records.size();
    return result;
}

// ---------------------------------------------------------------------------
// Vetting

double vet_sample(const std::vector<NlFlPair>& pool, std::size_t sample_n,
                  const CompileGate& gate, std::uint64_t seed,
                  int max_parallel)
{
    if (pool.empty()) {
        throw std::invalid_argument("vet_sample: empty pool");
    }
    if (sample_n == 0) {
        throw std::invalid_argument("vet_sample: sample_n must be >= 1");
    }
    const std::size_t take = std::min(sample_n, pool.size());
    DetRng rng = DetRng(seed).fork("vet");
    const auto picks = rng.sample_indices(pool.size(), take);

    std::atomic<std::size_t> ok{0};
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::min<std::size_t>(take, std::size_t(std::max(1, max_parallel)));
    auto work = [&] {
        for (;;) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= picks.size()) {
                return;
            }
            if (gate(pool[picks[slot]].lean_statement).ok) {
                ok.fetch_add(1);
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool_threads;
        pool_threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool_threads.emplace_back(work);
        }
        for (auto& t : pool_threads) {
            t.join();
        }
    }
    return double(ok.load()) / double(take);
}

// ---------------------------------------------------------------------------
// Dedup

DedupResult dedup(std::vector<NlFlPair> records)
{
    DedupResult result;
    result.manifest.stage = "dedup";
    result.manifest.input_count = records.size();

    std::unordered_set<std::string> seen;
    seen.reserve(records.size());
    for (auto& r : records) {
        const std::string key =
            r.id.empty() ? canonical_id(r.nl_text) : r.id;
        if (!seen.insert(key).second) {
            ++result.dropped;
            continue;
        }
        ++result.manifest.per_source[to_string(r.source)];
        result.unique.push_back(std::move(r));
    }
    result.manifest.output_count = result.unique.size();
    result.manifest.dedup_dropped = result.dropped;
    return result;
}

// ---------------------------------------------------------------------------
// Quality filter

std::vector<std::string> QualityRules::validate() const
{
    std::vector<std::string> errs;
    if (nl_min_chars >= nl_max_chars) {
        errs.push_back("nl length bounds: min must be < max");
    }
    if (lean_min_chars >= lean_max_chars) {
        errs.push_back("lean length bounds: min must be < max");
    }
    if (max_non_ascii_fraction < 0.0 || max_non_ascii_fraction > 1.0) {
        errs.push_back("max_non_ascii_fraction outside [0, 1]");
    }
    return errs;
}

namespace {

// First failing rule, checked in a fixed order so rejection reasons are
// stable.
std::string first_violation(const NlFlPair& r, const QualityRules& rules)
{
    if (r.nl_text.size() < rules.nl_min_chars) {
        return "nl_too_short";
    }
    if (r.nl_text.size() > rules.nl_max_chars) {
        return "nl_too_long";
    }
    if (r.lean_statement.size() < rules.lean_min_chars) {
        return "lean_too_short";
    }
    if (r.lean_statement.size() > rules.lean_max_chars) {
        return "lean_too_long";
    }
    for (const auto& s : rules.required_substrings) {
        if (r.lean_statement.find(s) == std::string::npos) {
            return "required_substring:" + s;
        }
    }
    for (const auto& s : rules.forbidden_substrings) {
        if (r.lean_statement.find(s) != std::string::npos) {
            return "forbidden_substring:" + s;
        }
    }
    if (non_ascii_fraction(r.lean_statement) > rules.max_non_ascii_fraction) {
        return "non_ascii_fraction";
    }
    return {};
}

} // namespace

FilterResult quality_filter(std::vector<NlFlPair> records,
                            const QualityRules& rules)
{
    if (const auto errs = rules.validate(); !errs.empty()) {
        throw std::invalid_argument("bad quality rules: " + errs.front());
    }

    FilterResult result;
    result.manifest.stage = "quality_filter";
    result.manifest.input_count = records.size();
    for (auto& r : records) {
        std::string reason = first_violation(r, rules);
        if (reason.empty()) {
            ++result.manifest.per_source[to_string(r.source)];
            result.kept.push_back(std::move(r));
        } else {
            result.rejected.push_back({std::move(r), std::move(reason)});
        }
    }
    result.manifest.output_count = result.kept.size();
    result.manifest.rejected = result.rejected.size();
    return result;
}

// ---------------------------------------------------------------------------
// Stratification

namespace {

struct TopicKeywords {
    const char* topic;
    std::vector<const char*> keywords;
};

// The documented taxonomy. Matching is case-insensitive substring search
// over the NL text; the first topic with a hit wins.
const std::vector<TopicKeywords>& topic_table()
{
    static const std::vector<TopicKeywords> kTable = {
        {"algebra",
         {"polynomial", "quadratic", "equation", "matrix", "determinant",
          "algebra", "roots of", "factor", "inequality"}},
        {"analysis",
         {"limit", "converge", "derivative", "integral", "continuous",
          "series", "sequence", "supremum", "infimum", "differentiable"}},
        {"number_theory",
         {"prime", "divisible", "divisor", "modulo", "gcd", "lcm",
          "perfect square", "digits", "remainder", "integer solution"}},
        {"geometry",
         {"triangle", "circle", "angle", "polygon", "radius", "perimeter",
          "area of", "sphere", "tangent", "quadrilateral"}},
        {"combinatorics",
         {"how many ways", "permutation", "combination", "choose",
          "arrangement", "subsets", "committee", "graph", "coloring"}},
        {"probability",
         {"probability", "random", "dice", "coin", "expected value",
          "uniformly"}},
    };
    return kTable;
}

std::string to_lower(const std::string& s)
{
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return char(std::tolower(c));
    });
    return out;
}

} // namespace

const std::vector<std::string>& topic_order()
{
    static const std::vector<std::string> kOrder = [] {
        std::vector<std::string> order;
        for (const auto& t : topic_table()) {
            order.emplace_back(t.topic);
        }
        order.emplace_back("other");
        return order;
    }();
    return kOrder;
}

std::string classify_topic(const std::string& nl_text)
{
    const std::string lowered = to_lower(nl_text);
    for (const auto& entry : topic_table()) {
        for (const char* kw : entry.keywords) {
            if (lowered.find(kw) != std::string::npos) {
                return entry.topic;
            }
        }
    }
    return "other";
}

StratifyResult stratify(const std::vector<NlFlPair>& records,
                        const std::map<std::string, std::uint64_t>& targets,
                        std::uint64_t seed)
{
    StratifyResult result;
    result.manifest.stage = "stratify";
    result.manifest.input_count = records.size();

    std::map<std::string, std::vector<std::size_t>> by_topic;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string topic = records[i].topic.empty()
                                      ? classify_topic(records[i].nl_text)
                                      : records[i].topic;
        by_topic[topic].push_back(i);
    }

    std::vector<std::size_t> chosen;
    for (const auto& [topic, want] : targets) {
        if (want == 0) {
            continue;
        }
        const auto it = by_topic.find(topic);
        const std::size_t have = it == by_topic.end() ? 0 : it->second.size();
        const std::size_t take = std::min<std::size_t>(want, have);
        if (take < want) {
            result.shortfall_per_topic[topic] = want - take;
        }
        if (take == 0) {
            continue;
        }
        DetRng rng = DetRng(seed).fork("stratify/" + topic);
        for (const std::size_t k : rng.sample_indices(have, take)) {
            chosen.push_back(it->second[k]);
        }
        result.selected_per_topic[topic] = take;
    }

    std::sort(chosen.begin(), chosen.end());
    for (const std::size_t i : chosen) {
        auto r = records[i];
        if (r.topic.empty()) {
            r.topic = classify_topic(r.nl_text);
        }
        ++result.manifest.per_source[to_string(r.source)];
        result.selected.push_back(std::move(r));
    }
    result.manifest.output_count = result.selected.size();
    result.manifest.rejected = records.size() - result.selected.size();
    return result;
}

// ---------------------------------------------------------------------------
// Composition

std::map<Source, std::uint64_t> default_sft_mix()
{
    return {{Source::NuminaMath, 8000},
            {Source::Leanabell, 7000},
            {Source::Herald, 3000},
            {Source::LeanWorkbook, 2000}};
}

ComposeResult compose_sft(const std::map<Source, std::vector<NlFlPair>>& pools,
                          const std::map<Source, std::uint64_t>& mix,
                          std::uint64_t seed)
{
    // Report every deficit at once, not just the first.
    std::ostringstream deficits;
    std::uint64_t input_total = 0;
    for (const auto& [source, want] : mix) {
        const auto it = pools.find(source);
        const std::size_t have = it == pools.end() ? 0 : it->second.size();
        input_total += have;
        if (have < want) {
            deficits << ' ' << to_string(source) << ": have " << have
                     << ", need " << want << ';';
        }
    }
    if (!deficits.str().empty()) {
        throw std::runtime_error("compose_sft: pool shortfall:" +
                                 deficits.str());
    }

    ComposeResult result;
    result.manifest.stage = "compose_sft";
    result.manifest.input_count = input_total;

    for (Source source : all_sources()) {
        const auto mit = mix.find(source);
        if (mit == mix.end() || mit->second == 0) {
            continue;
        }
        const auto& pool = pools.at(source);
        DetRng rng =
            DetRng(seed).fork(std::string("compose/") + to_string(source));
        for (const std::size_t i :
             rng.sample_indices(pool.size(), mit->second)) {
            result.sft.push_back(pool[i]);
        }
        result.manifest.per_source[to_string(source)] = mit->second;
    }

    DetRng shuffler = DetRng(seed).fork("compose/shuffle");
    shuffler.shuffle(result.sft);
    result.manifest.output_count = result.sft.size();
    result.manifest.rejected =
        result.manifest.input_count - result.manifest.output_count;
    return result;
}

// ---------------------------------------------------------------------------
// Alpaca formatting

std::vector<std::string> format_alpaca(const std::vector<NlFlPair>& records,
                                       const std::string& system_prompt)
{
    std::vector<std::string> lines;
    lines.reserve(records.size());
    for (const auto& r : records) {
        json j;
        j["instruction"] = system_prompt;
        j["input"] = r.nl_text;
        j["output"] = "```lean4\n" + r.lean_statement + "\n```";
        lines.push_back(dump_line(j));
    }
    return lines;
}

} // namespace autoform::curation
