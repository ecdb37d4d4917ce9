#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "autoform/jsonl.hpp"
#include "autoform/rng.hpp"
#include "autoform/sha256.hpp"
#include "autoform/text_norm.hpp"
#include "autoform/toml_lite.hpp"
#include "autoform/types.hpp"

using namespace autoform;

namespace {

// Independent SHA-256 oracle: whole-message buffer, padding applied up
// front, compression written against the FIPS spec separately from the
// streaming implementation under test.
std::string oracle_sha256_hex(const std::string& message)
{
    auto rotr = [](std::uint32_t x, int n) {
        return (x >> n) | (x << (32 - n));
    };
    static const std::uint32_t k[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b,
        0x59f111f1, 0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01,
        0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7,
        0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc,
        0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152,
        0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
        0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
        0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
        0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819,
        0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116, 0x1e376c08,
        0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f,
        0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
        0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

    std::vector<std::uint8_t> data(message.begin(), message.end());
    const std::uint64_t bit_len = std::uint64_t(data.size()) * 8;
    data.push_back(0x80);
    while (data.size() % 64 != 56) {
        data.push_back(0x00);
    }
    for (int i = 7; i >= 0; --i) {
        data.push_back(std::uint8_t(bit_len >> (8 * i)));
    }

    std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                          0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    for (std::size_t block = 0; block < data.size(); block += 64) {
        std::uint32_t w[64];
        for (int t = 0; t < 16; ++t) {
            w[t] = std::uint32_t(data[block + 4 * t]) << 24 |
                   std::uint32_t(data[block + 4 * t + 1]) << 16 |
                   std::uint32_t(data[block + 4 * t + 2]) << 8 |
                   std::uint32_t(data[block + 4 * t + 3]);
        }
        for (int t = 16; t < 64; ++t) {
            const std::uint32_t s0 = rotr(w[t - 15], 7) ^
                                     rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
            const std::uint32_t s1 = rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^
                                     (w[t - 2] >> 10);
            w[t] = w[t - 16] + s0 + w[t - 7] + s1;
        }
        std::uint32_t v[8];
        for (int i = 0; i < 8; ++i) {
            v[i] = h[i];
        }
        for (int t = 0; t < 64; ++t) {
            const std::uint32_t t1 =
                v[7] + (rotr(v[4], 6) ^ rotr(v[4], 11) ^ rotr(v[4], 25)) +
                ((v[4] & v[5]) ^ (~v[4] & v[6])) + k[t] + w[t];
            const std::uint32_t t2 =
                (rotr(v[0], 2) ^ rotr(v[0], 13) ^ rotr(v[0], 22)) +
                ((v[0] & v[1]) ^ (v[0] & v[2]) ^ (v[1] & v[2]));
            v[7] = v[6];
            v[6] = v[5];
            v[5] = v[4];
            v[4] = v[3] + t1;
            v[3] = v[2];
            v[2] = v[1];
            v[1] = v[0];
            v[0] = t1 + t2;
        }
        for (int i = 0; i < 8; ++i) {
            h[i] += v[i];
        }
    }

    static const char* hex = "0123456789abcdef";
    std::string out;
    for (int i = 0; i < 8; ++i) {
        for (int shift = 28; shift >= 0; shift -= 4) {
            out.push_back(hex[(h[i] >> shift) & 0xf]);
        }
    }
    return out;
}

NlFlPair sample_pair()
{
    NlFlPair p;
    p.nl_text = "Determine the value of 2 + 2.";
    p.lean_statement = "theorem t : 2 + 2 = 4 := by sorry";
    p.source = Source::NuminaMath;
    p.topic = "algebra";
    p.provenance = {"fixtures/sample.jsonl", 3};
    p.id = canonical_id(p.nl_text);
    return p;
}

} // namespace

TEST_CASE("sha256 matches NIST vectors")
{
    CHECK(Sha256::hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(Sha256::hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(Sha256::hex(
              "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("sha256 agrees with an independent implementation")
{
    // Includes lengths around the block boundary and multi-block input.
    std::vector<std::string> messages = {"abc", "", "x"};
    messages.push_back(std::string(55, 'a'));
    messages.push_back(std::string(56, 'a'));
    messages.push_back(std::string(64, 'a'));
    messages.push_back(std::string(65, 'a'));
    messages.push_back(std::string(1000, 'q'));
    DetRng rng(7);
    for (int i = 0; i < 50; ++i) {
        std::string m;
        const std::size_t len = rng.below(300);
        for (std::size_t b = 0; b < len; ++b) {
            m.push_back(char(rng.below(256)));
        }
        messages.push_back(std::move(m));
    }
    for (const auto& m : messages) {
        CHECK(Sha256::hex(m) == oracle_sha256_hex(m));
    }
}

TEST_CASE("sha256 streaming equals one-shot")
{
    const std::string m(300, 'z');
    Sha256 h;
    h.update(m.substr(0, 10));
    h.update(m.substr(10, 100));
    h.update(m.substr(110));
    CHECK(to_hex(h.digest()) == Sha256::hex(m));
}

TEST_CASE("canonical_id is whitespace-insensitive and content-sensitive")
{
    CHECK(canonical_id("abc") == canonical_id("abc "));
    CHECK(canonical_id("abc") == canonical_id("  abc"));
    CHECK(canonical_id("a  b\tc") == canonical_id("a b c"));
    CHECK(canonical_id("abc") != canonical_id("abd"));
}

TEST_CASE("canonical_id of normalized text equals a direct digest")
{
    // After normalization "abc" stays three bytes, so the id must equal
    // the oracle digest of exactly those bytes.
    CHECK(canonical_id("abc") == oracle_sha256_hex("abc"));
    CHECK(canonical_id(" abc ") == oracle_sha256_hex("abc"));
}

TEST_CASE("canonical_id rejects empty-after-normalization input")
{
    CHECK_THROWS_AS((void)canonical_id(""), std::invalid_argument);
    CHECK_THROWS_AS((void)canonical_id("  \t\n "), std::invalid_argument);
}

TEST_CASE("normalize_text composes combining sequences")
{
    // e + COMBINING ACUTE -> precomposed e-acute.
    CHECK(normalize_text("caf\x65\xcc\x81") == "caf\xc3\xa9");
    // Greek alpha + acute -> alpha with tonos.
    CHECK(normalize_text("\xce\xb1\xcc\x81") == "\xce\xac");
    // Unknown combining sequences pass through.
    const std::string odd = "q\xcc\x81";
    CHECK(normalize_text(odd) == odd);
}

TEST_CASE("normalize_text collapses unicode whitespace")
{
    // NBSP and EM SPACE both collapse into a single plain space.
    CHECK(normalize_text("a\xc2\xa0\xc2\xa0ux b") == "a ux b");
    CHECK(normalize_text("a\xe2\x80\x83x") == "a x");
    CHECK(normalize_text("one\n two\t\tthree ") == "one two three");
}

TEST_CASE("normalize_text is idempotent")
{
    const std::vector<std::string> pool = {
        " Find  the value ", "caf\x65\xcc\x81  x", "\xe2\x88\x91 k^2",
        "a\xc2\xa0 b c ", "Prove\tthat  x = 1."};
    for (const auto& s : pool) {
        const std::string once = normalize_text(s);
        CHECK(normalize_text(once) == once);
    }
}

TEST_CASE("decimal strings carry four fractional digits")
{
    CHECK(decimal4(0.5) == "0.5000");
    CHECK(decimal4(1.0) == "1.0000");
    CHECK(decimal4(61.8) == "61.8000");
    CHECK(parse_real(json("0.7000")) == doctest::Approx(0.7));
    CHECK(parse_real(json(0.7)) == doctest::Approx(0.7));
    CHECK_THROWS((void)parse_real(json("not a number")));
}

TEST_CASE("NlFlPair round-trips through its line schema")
{
    NlFlPair p = sample_pair();
    p.injected_answer = "4";
    const NlFlPair back =
        NlFlPair::from_json(json::parse(dump_line(p.to_json())));
    CHECK(back == p);
}

TEST_CASE("record parsing ignores unknown fields")
{
    NlFlPair p = sample_pair();
    json j = p.to_json();
    j["extra_field"] = "ignored";
    j["another"] = 42;
    CHECK(NlFlPair::from_json(j) == p);
}

TEST_CASE("NlFlPair validation names each violated invariant")
{
    NlFlPair p = sample_pair();
    CHECK(p.validate().empty());

    NlFlPair no_sorry = p;
    no_sorry.lean_statement = "theorem t : 2 + 2 = 4 := by norm_num";
    CHECK_FALSE(no_sorry.validate().empty());

    NlFlPair bad_tail = p;
    bad_tail.lean_statement = "theorem t : P sorry x := by exact foo";
    CHECK_FALSE(bad_tail.validate().empty());

    NlFlPair stale_id = p;
    stale_id.id = std::string(64, '0');
    CHECK_FALSE(stale_id.validate().empty());
}

TEST_CASE("sorry termination accepts both proof spellings")
{
    CHECK(has_sorry_termination("theorem t : P := by sorry"));
    CHECK(has_sorry_termination("theorem t : P := sorry"));
    CHECK(has_sorry_termination("theorem t : P := by\n  sorry\n"));
    CHECK_FALSE(has_sorry_termination("theorem t : P := by exact h"));
    CHECK_FALSE(has_sorry_termination("sorry is mentioned but not terminal"));
}

TEST_CASE("reward results cannot carry reward without compiling")
{
    const RewardResult failed = RewardResult::compile_failed();
    CHECK_FALSE(failed.compiled());
    CHECK(failed.reward() == 0.0);
    CHECK_FALSE(failed.verdict().has_value());

    JudgeVerdict v;
    v.score = 0.55;
    v.reason = "close enough";
    const RewardResult ok = RewardResult::compiled_with(v);
    CHECK(ok.compiled());
    CHECK(ok.reward() == doctest::Approx(0.55));

    // A serialized record violating the gate is rejected on parse.
    json bad;
    bad["compiled"] = false;
    bad["reward"] = "0.9000";
    CHECK_THROWS_AS((void)RewardResult::from_json(bad), std::invalid_argument);

    json bad2;
    bad2["compiled"] = false;
    bad2["verdict"] = v.to_json();
    CHECK_THROWS_AS((void)RewardResult::from_json(bad2),
                    std::invalid_argument);

    const RewardResult round =
        RewardResult::from_json(json::parse(dump_line(ok.to_json())));
    CHECK(round == ok);
}

TEST_CASE("rollout semantic flag is recomputable")
{
    RolloutRecord r;
    r.problem_id = "p0";
    r.completion = "```lean4\ntheorem t : True := by sorry\n```";
    r.compile = CompileOutcome{true, {}, 12, "mock"};
    JudgeVerdict v;
    v.score = 0.7;
    r.verdict = v;
    r.semantic_success = true;
    CHECK(r.recompute_semantic(0.7));
    CHECK(r.validate(0.7).empty());

    // Threshold is inclusive: 0.7 passes, 0.69 does not.
    r.verdict->score = 0.69;
    CHECK_FALSE(r.recompute_semantic(0.7));
    CHECK_FALSE(r.validate(0.7).empty());

    r.verdict->score = 0.9;
    r.compile->ok = false;
    r.semantic_success = false;
    CHECK_FALSE(r.recompute_semantic(0.7));
    CHECK(r.validate(0.7).empty());

    const RolloutRecord back =
        RolloutRecord::from_json(json::parse(dump_line(r.to_json())));
    CHECK(back == r);
}

TEST_CASE("summary invariants catch dominance and gap violations")
{
    EvalSummary s;
    s.model_id = "m";
    s.benchmark_id = "b";
    s.compile_pass = {{1, 61.8}, {8, 92.3}};
    s.semantic_pass = {{1, 41.0}, {8, 70.9}};
    s.gap = 20.8;
    s.problem_count = 495;
    CHECK(s.validate().empty());

    EvalSummary dominated = s;
    dominated.semantic_pass[1] = 70.0;
    CHECK_FALSE(dominated.validate().empty());

    EvalSummary nonmono = s;
    nonmono.compile_pass[8] = 10.0;
    CHECK_FALSE(nonmono.validate().empty());

    EvalSummary bad_gap = s;
    bad_gap.gap = 5.0;
    CHECK_FALSE(bad_gap.validate().empty());

    const EvalSummary back =
        EvalSummary::from_json(json::parse(dump_line(s.to_json())));
    CHECK(back == s);
}

TEST_CASE("overlap spec round-trip and validation")
{
    OverlapSpec spec;
    spec.rho = 0.3;
    spec.seed = 99;
    CHECK(spec.validate().empty());
    const OverlapSpec back =
        OverlapSpec::from_json(json::parse(dump_line(spec.to_json())));
    CHECK(back == spec);

    OverlapSpec bad = spec;
    bad.source_mix[Source::NuminaMath] = 0.9;
    CHECK_FALSE(bad.validate().empty());
    bad.rho = 1.5;
    CHECK_FALSE(bad.validate().empty());
}

TEST_CASE("manifest conservation check")
{
    DatasetManifest m;
    m.stage = "dedup";
    m.input_count = 100;
    m.output_count = 83;
    m.dedup_dropped = 17;
    m.per_source = {{"NuminaMath", 50}, {"Herald", 33}};
    CHECK(m.validate().empty());

    m.dedup_dropped = 10;
    CHECK_FALSE(m.validate().empty());

    m.dedup_dropped = 17;
    m.per_source["Herald"] = 30;
    CHECK_FALSE(m.validate().empty());
}

TEST_CASE("all serialized types survive a line round-trip")
{
    // Property-style sweep over randomized records.
    DetRng rng(5);
    for (int i = 0; i < 200; ++i) {
        JudgeVerdict v;
        v.score = double(rng.below(10001)) / 10000.0;
        v.reason = "r" + std::to_string(rng.next() % 100);
        v.attempts = int(rng.below(4)) + 1;
        const auto back =
            JudgeVerdict::from_json(json::parse(dump_line(v.to_json())));
        CHECK(decimal4(back.score) == decimal4(v.score));
        CHECK(back.reason == v.reason);

        CompileOutcome c;
        c.ok = rng.below(2) == 0;
        c.toolchain_id = "mock";
        if (!c.ok) {
            c.diagnostics.push_back({"error", "m" + std::to_string(i),
                                     std::int64_t(rng.below(40))});
        }
        c.elapsed = std::int64_t(rng.below(1000));
        CHECK(CompileOutcome::from_json(json::parse(dump_line(c.to_json()))) ==
              c);
    }
}

TEST_CASE("deterministic rng streams are stable and seeded")
{
    DetRng a(42);
    DetRng b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next() == b.next());
    }
    CHECK(DetRng(1).next() != DetRng(2).next());

    DetRng c(7);
    const auto picks = c.sample_indices(10, 4);
    CHECK(picks.size() == 4);
    std::set<std::size_t> unique(picks.begin(), picks.end());
    CHECK(unique.size() == 4);
    CHECK_THROWS_AS((void)DetRng(1).sample_indices(3, 5),
                    std::invalid_argument);

    // Forked streams differ from the parent and from each other.
    DetRng parent(9);
    CHECK(parent.fork("a").next() != parent.fork("b").next());
}

TEST_CASE("toml subset parses the toolchain config shapes")
{
    const auto cfg = parse_toml(R"(
# comment
seed = 42
name = "pipeline"
temperature = 0.0
flag = true
list = ["a", "b"]

[quality]
nl_min_chars = 10

[[source]]
name = "NuminaMath"
path = "data/a.jsonl"

[[source]]
name = "Herald"
path = "data/b.jsonl"
)");
    CHECK(cfg["seed"] == 42);
    CHECK(cfg["name"] == "pipeline");
    CHECK(cfg["temperature"] == 0.0);
    CHECK(cfg["flag"] == true);
    CHECK(cfg["list"].size() == 2);
    CHECK(cfg["quality"]["nl_min_chars"] == 10);
    REQUIRE(cfg["source"].is_array());
    CHECK(cfg["source"].size() == 2);
    CHECK(cfg["source"][1]["name"] == "Herald");

    CHECK_THROWS((void)parse_toml("key = "));
    CHECK_THROWS((void)parse_toml("a.b = 1"));
    CHECK_THROWS((void)parse_toml("x = {inline = 1}"));
    CHECK_THROWS((void)parse_toml("dup = 1\ndup = 2"));
}
