#include "autoform/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "autoform/rng.hpp"

namespace autoform::overlap {

json GrpoPrompt::to_json() const
{
    json j;
    j["id"] = id;
    j["nl_text"] = nl_text;
    j["ground_truth"] = ground_truth;
    j["source"] = to_string(source);
    j["shared_with_sft"] = shared_with_sft;
    return j;
}

GrpoPrompt GrpoPrompt::from_json(const json& j)
{
    GrpoPrompt p;
    p.id = j.at("id").get<std::string>();
    p.nl_text = j.at("nl_text").get<std::string>();
    p.ground_truth = j.at("ground_truth").get<std::string>();
    p.source = source_from_string(j.value("source", "Other"));
    p.shared_with_sft = j.value("shared_with_sft", false);
    return p;
}

std::map<Source, std::uint64_t> largest_remainder_quotas(
    const std::map<Source, double>& mix, std::uint64_t total)
{
    std::map<Source, std::uint64_t> quotas;
    std::vector<std::pair<double, Source>> remainders;
    std::uint64_t assigned = 0;

    // Floor pass in declaration order, remainders collected for the
    // distribution pass.
    for (Source s : all_sources()) {
        const auto it = mix.find(s);
        if (it == mix.end()) {
            continue;
        }
        const double exact = it->second * double(total);
        const auto base = std::uint64_t(std::floor(exact + 1e-9));
        quotas[s] = base;
        assigned += base;
        remainders.emplace_back(exact - double(base), s);
    }
    if (assigned > total) {
        throw std::logic_error("largest_remainder_quotas: over-assignment");
    }

    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) {
                         return a.first > b.first;
                     });
    std::uint64_t leftover = total - assigned;
    for (const auto& [rem, s] : remainders) {
        if (leftover == 0) {
            break;
        }
        ++quotas[s];
        --leftover;
    }
    if (leftover != 0) {
        throw std::invalid_argument(
            "largest_remainder_quotas: mix does not cover the total");
    }
    return quotas;
}

namespace {

std::unordered_set<std::string> id_set(const std::vector<NlFlPair>& records)
{
    std::unordered_set<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) {
        ids.insert(r.id.empty() ? canonical_id(r.nl_text) : r.id);
    }
    return ids;
}

GrpoPrompt to_prompt(const NlFlPair& r, bool shared)
{
    GrpoPrompt p;
    p.id = r.id.empty() ? canonical_id(r.nl_text) : r.id;
    p.nl_text = r.nl_text;
    p.ground_truth = r.lean_statement;
    p.source = r.source;
    p.shared_with_sft = shared;
    return p;
}

// Picks quota[source] records per source; throws with a full deficit
// report if any source runs short.
void draw_part(const std::vector<NlFlPair>& pool,
               const std::map<Source, std::uint64_t>& quotas,
               const char* part_name, bool shared, DetRng& base_rng,
               std::vector<GrpoPrompt>& out)
{
    std::map<Source, std::vector<std::size_t>> by_source;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        by_source[pool[i].source].push_back(i);
    }

    std::ostringstream deficits;
    for (Source s : all_sources()) {
        const auto qit = quotas.find(s);
        if (qit == quotas.end() || qit->second == 0) {
            continue;
        }
        const auto pit = by_source.find(s);
        const std::size_t have = pit == by_source.end() ? 0 : pit->second.size();
        if (have < qit->second) {
            deficits << ' ' << to_string(s) << ": have " << have << ", need "
                     << qit->second << ';';
        }
    }
    if (!deficits.str().empty()) {
        throw std::runtime_error(std::string("build_grpo_pool: ") + part_name +
                                 " part shortfall:" + deficits.str());
    }

    for (Source s : all_sources()) {
        const auto qit = quotas.find(s);
        if (qit == quotas.end() || qit->second == 0) {
            continue;
        }
        const auto& indices = by_source[s];
        DetRng rng = base_rng.fork(std::string(part_name) + "/" + to_string(s));
        for (const std::size_t k :
             rng.sample_indices(indices.size(), qit->second)) {
            out.push_back(to_prompt(pool[indices[k]], shared));
        }
    }
}

} // namespace

PoolResult build_grpo_pool(const std::vector<NlFlPair>& sft_set,
                           const std::vector<NlFlPair>& reserve_pool,
                           const OverlapSpec& spec)
{
    if (const auto errs = spec.validate(); !errs.empty()) {
        throw std::invalid_argument("bad overlap spec: " + errs.front());
    }

    const auto sft_ids = id_set(sft_set);

    // Cross-dedup: the fresh side may not intersect the SFT ids, and may
    // not repeat an id internally.
    std::vector<NlFlPair> fresh_pool;
    fresh_pool.reserve(reserve_pool.size());
    std::unordered_set<std::string> seen;
    for (const auto& r : reserve_pool) {
        const std::string id = r.id.empty() ? canonical_id(r.nl_text) : r.id;
        if (sft_ids.contains(id) || !seen.insert(id).second) {
            continue;
        }
        fresh_pool.push_back(r);
    }

    // Shared count: round-half-up of rho * N.
    const auto shared_count =
        std::uint64_t(std::floor(spec.rho * double(spec.grpo_size) + 0.5));
    const std::uint64_t fresh_count = spec.grpo_size - shared_count;

    DetRng rng(spec.seed);
    PoolResult result;
    result.shared_count = shared_count;
    result.fresh_count = fresh_count;
    result.pool.reserve(spec.grpo_size);

    if (shared_count > 0) {
        const auto quotas =
            largest_remainder_quotas(spec.source_mix, shared_count);
        draw_part(sft_set, quotas, "shared", true, rng, result.pool);
    }
    if (fresh_count > 0) {
        const auto quotas =
            largest_remainder_quotas(spec.source_mix, fresh_count);
        draw_part(fresh_pool, quotas, "fresh", false, rng, result.pool);
    }

    DetRng shuffler = rng.fork("shuffle");
    shuffler.shuffle(result.pool);

    // Hard post-condition: the fresh part must be id-disjoint from SFT.
    for (const auto& p : result.pool) {
        const bool in_sft = sft_ids.contains(p.id);
        if (p.shared_with_sft != in_sft) {
            throw std::logic_error(
                "build_grpo_pool: shared_with_sft flag inconsistent for id " +
                p.id);
        }
    }

    result.manifest.stage = "build_grpo_pool";
    result.manifest.input_count = sft_set.size() + reserve_pool.size();
    result.manifest.output_count = result.pool.size();
    result.manifest.rejected =
        result.manifest.input_count - result.manifest.output_count;
    for (const auto& p : result.pool) {
        ++result.manifest.per_source[to_string(p.source)];
    }
    return result;
}

OverlapMeasure measure_overlap(const std::vector<NlFlPair>& sft_set,
                               const std::vector<GrpoPrompt>& pool)
{
    if (pool.empty()) {
        throw std::invalid_argument("measure_overlap: empty pool");
    }
    const auto sft_ids = id_set(sft_set);
    OverlapMeasure m;
    m.total = pool.size();
    for (const auto& p : pool) {
        if (sft_ids.contains(p.id)) {
            ++m.shared;
        }
    }
    m.value = double(m.shared) / double(m.total);
    return m;
}

} // namespace autoform::overlap
