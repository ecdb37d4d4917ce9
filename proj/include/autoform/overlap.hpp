#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "autoform/types.hpp"

namespace autoform::overlap {

// One RL-pool prompt. The ground truth is consumed only by the reward
// function; generation never sees it.
struct GrpoPrompt {
    std::string id; // canonical id of nl_text
    std::string nl_text;
    std::string ground_truth;
    Source source = Source::Other;
    bool shared_with_sft = false;

    json to_json() const;
    static GrpoPrompt from_json(const json& j);

    bool operator==(const GrpoPrompt&) const = default;
};

// Hamilton/largest-remainder apportionment of `total` over the mix.
// Ties break in Source declaration order. The result sums to `total`
// and each quota is within 1 of mix[source] * total.
std::map<Source, std::uint64_t> largest_remainder_quotas(
    const std::map<Source, double>& mix, std::uint64_t total);

struct PoolResult {
    std::vector<GrpoPrompt> pool;
    DatasetManifest manifest;
    std::uint64_t shared_count = 0;
    std::uint64_t fresh_count = 0;
};

// Builds a pool of spec.grpo_size prompts: round(rho * size) drawn from
// the SFT set (half-up), the rest from the reserve after cross-dedup
// against SFT ids. Per-source counts follow spec.source_mix with
// largest-remainder rounding within each part; the combined pool is
// shuffled. Quota shortfall is fatal and reports every deficit.
PoolResult build_grpo_pool(const std::vector<NlFlPair>& sft_set,
                           const std::vector<NlFlPair>& reserve_pool,
                           const OverlapSpec& spec);

struct OverlapMeasure {
    std::uint64_t shared = 0; // numerator
    std::uint64_t total = 0;  // denominator
    double value = 0.0;
};

// Fraction of pool ids that appear in the SFT set; exact rational
// alongside the float. Empty pool is an error.
OverlapMeasure measure_overlap(const std::vector<NlFlPair>& sft_set,
                               const std::vector<GrpoPrompt>& pool);

} // namespace autoform::overlap
