#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "autoform/types.hpp"

namespace autoform::curation {

// ---------------------------------------------------------------------------
// Ingestion

// Maps one raw corpus file onto the canonical record shape.
struct SourceAdapter {
    Source source = Source::Other;
    std::string path;     // file path; '*' wildcard allowed in the filename
    std::string nl_field; // raw JSON key holding the NL statement
    std::string fl_field; // raw JSON key holding the Lean statement
    std::string topic_field; // optional passthrough

    std::vector<std::string> validate() const;
};

struct IngestResult {
    std::vector<NlFlPair> records;
    DatasetManifest manifest;
};

// Every parseable line becomes a record tagged with source and
// provenance; malformed lines are counted, never fatal. Unreadable
// files throw.
IngestResult ingest(const std::vector<SourceAdapter>& adapters);

// ---------------------------------------------------------------------------
// Compile vetting

using CompileGate = std::function<CompileOutcome(const std::string&)>;

// Compiles a seeded sample of min(sample_n, |pool|) statements drawn
// without replacement and returns the fraction that typecheck. The
// result is advisory: it gates nothing. Compilations fan out over up to
// max_parallel workers; the fraction is order-independent, so the
// result stays deterministic for a fixed seed and gate.
double vet_sample(const std::vector<NlFlPair>& pool, std::size_t sample_n,
                  const CompileGate& gate, std::uint64_t seed,
                  int max_parallel = 1);

// ---------------------------------------------------------------------------
// Deduplication

struct DedupResult {
    std::vector<NlFlPair> unique;
    std::uint64_t dropped = 0;
    DatasetManifest manifest;
};

// Keeps the first occurrence of each canonical id, in input order.
DedupResult dedup(std::vector<NlFlPair> records);

// ---------------------------------------------------------------------------
// Quality filtering

struct QualityRules {
    std::size_t nl_min_chars = 10;
    std::size_t nl_max_chars = 4000;
    std::size_t lean_min_chars = 20;
    std::size_t lean_max_chars = 4000;
    std::vector<std::string> required_substrings = {"theorem", "sorry"};
    std::vector<std::string> forbidden_substrings = {"admit", "native_decide"};
    double max_non_ascii_fraction = 0.5; // over the Lean text

    std::vector<std::string> validate() const;
};

struct Rejection {
    NlFlPair record;
    std::string reason; // name of the first failing rule
};

struct FilterResult {
    std::vector<NlFlPair> kept;
    std::vector<Rejection> rejected;
    DatasetManifest manifest;
};

FilterResult quality_filter(std::vector<NlFlPair> records,
                            const QualityRules& rules);

// ---------------------------------------------------------------------------
// Topic stratification

// Fixed keyword taxonomy; first topic (in kTopicOrder) with a keyword
// hit wins, everything else is "other".
extern const std::vector<std::string>& topic_order();
std::string classify_topic(const std::string& nl_text);

struct StratifyResult {
    std::vector<NlFlPair> selected;
    std::map<std::string, std::uint64_t> selected_per_topic;
    std::map<std::string, std::uint64_t> shortfall_per_topic;
    DatasetManifest manifest;
};

// Samples up to targets[topic] records per topic, seeded, without
// replacement. Unmet targets are reported, not fatal.
StratifyResult stratify(const std::vector<NlFlPair>& records,
                        const std::map<std::string, std::uint64_t>& targets,
                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// SFT composition

struct ComposeResult {
    std::vector<NlFlPair> sft;
    DatasetManifest manifest;
};

// The shipped default mix: 8000/7000/3000/2000.
std::map<Source, std::uint64_t> default_sft_mix();

// Samples mix[source] records from each pool (seeded), concatenates and
// shuffles. A pool smaller than its quota is fatal; the exception
// message reports every deficit.
ComposeResult compose_sft(const std::map<Source, std::vector<NlFlPair>>& pools,
                          const std::map<Source, std::uint64_t>& mix,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// SFT formatting

// One {"instruction", "input", "output"} line per record, the Lean side
// wrapped in a ```lean4 fenced block. Byte-stable.
std::vector<std::string> format_alpaca(const std::vector<NlFlPair>& records,
                                       const std::string& system_prompt);

} // namespace autoform::curation
