#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "autoform/answer_inject.hpp"
#include "autoform/types.hpp"

using namespace autoform;
using namespace autoform::inject;

namespace {

// The series example: a find-type prompt whose ground truth fixes the
// sum to 6.
const std::string kSeriesNl =
    "Determine the value of the infinite series "
    "∑_{k=1}^{∞} k^2/2^k.";
const std::string kSeriesLean =
    "theorem lean_workbook : ∑' k : ℕ, (k ^ 2 : ℝ) / 2 ^ k = 6 "
    ":= by sorry";

NlFlPair mk(const std::string& nl, const std::string& lean)
{
    NlFlPair p;
    p.nl_text = nl;
    p.lean_statement = lean;
    p.source = Source::LeanWorkbook;
    p.id = canonical_id(nl);
    return p;
}

std::optional<AnswerExtraction> extract(const std::string& lean)
{
    return extract_answer(lean);
}

} // namespace

// ---------------------------------------------------------------------------
// Find-type classification

TEST_CASE("find-type prompts are detected by keyword")
{
    CHECK(classify_find_type(kSeriesNl));
    CHECK(classify_find_type("Find all x such that x^2 = 4."));
    CHECK(classify_find_type("Compute the integral of f."));
    CHECK(classify_find_type("Evaluate the product."));
    CHECK(classify_find_type("What is the remainder mod 7?"));
    CHECK(classify_find_type("How many subsets does S have?"));
    CHECK(classify_find_type("Calculate the length of the arc."));
    CHECK(classify_find_type("DETERMINE THE VALUE."));
}

TEST_CASE("prove-type prompts are not find-type")
{
    CHECK_FALSE(classify_find_type(
        "Prove that S is the set of all positive rationals."));
    CHECK_FALSE(classify_find_type("Show that the function is continuous."));
    CHECK_FALSE(classify_find_type(""));
}

// ---------------------------------------------------------------------------
// Goal splitting

TEST_CASE("split_goal isolates the conclusion")
{
    const auto g = split_goal(kSeriesLean);
    REQUIRE(g.has_value());
    CHECK(g->goal ==
          "∑' k : ℕ, (k ^ 2 : ℝ) / 2 ^ k = 6");

    const auto binders = split_goal(
        "theorem t (S : Set ℚ) (h : ∀ a ∈ S, a > 0) : S = "
        "{ r : ℚ | r > 0 } := sorry");
    REQUIRE(binders.has_value());
    CHECK(binders->goal == "S = { r : ℚ | r > 0 }");

    CHECK_FALSE(split_goal("not a theorem at all").has_value());
    CHECK_FALSE(split_goal("def f := 3").has_value());
}

// ---------------------------------------------------------------------------
// Pattern extraction

TEST_CASE("the registry ships twelve patterns in precedence order")
{
    const auto ids = PatternRegistry::standard().ids();
    CHECK(ids.size() == 12);
    const std::vector<std::string> expected = {
        "tendsto_nhds_literal", "sum_eq_literal",      "card_eq_literal",
        "greatest_least_literal", "iff_eq_literal",    "eq_rational_literal",
        "eq_tuple_literal",     "eq_set_builder",      "interval_mem_literal",
        "eq_numeric_ident",     "bound_literal",       "eq_literal"};
    CHECK(ids == expected);
}

TEST_CASE("series goal extracts the sum literal")
{
    const auto e = extract(kSeriesLean);
    REQUIRE(e.has_value());
    CHECK(e->pattern_id == "sum_eq_literal");
    CHECK(e->value_text == "6");
    CHECK(e->span_begin < e->span_end);
    CHECK(e->span_end <= kSeriesLean.size());
    CHECK(kSeriesLean.substr(e->span_begin, e->span_end - e->span_begin) ==
          "6");
}

TEST_CASE("statements without a literal answer extract nothing")
{
    CHECK_FALSE(extract("theorem t (a b : ℕ) : a + b = b + a := by sorry")
                    .has_value());
    CHECK_FALSE(
        extract("theorem t (f : ℝ → ℝ) (h : Continuous f) : "
                "Continuous (f ∘ f) := by sorry")
            .has_value());
}

TEST_CASE("rational answers extract as a/b")
{
    const auto e =
        extract("theorem t : (1 : ℚ) / 2 + 1 / 4 = 3/4 := by sorry");
    REQUIRE(e.has_value());
    CHECK(e->pattern_id == "eq_rational_literal");
    CHECK(e->value_text == "3/4");
}

TEST_CASE("each pattern matches its goal shape")
{
    struct Case {
        const char* lean;
        const char* pattern;
        const char* value;
    };
    const std::vector<Case> cases = {
        {"theorem t (f : ℕ → ℝ) : Filter.Tendsto f "
         "Filter.atTop (nhds 6) := by sorry",
         "tendsto_nhds_literal", "6"},
        {"theorem t : ∑' k : ℕ, (k ^ 2 : ℝ) / 2 ^ k = 6 := by "
         "sorry",
         "sum_eq_literal", "6"},
        {"theorem t (S : Finset ℕ) (h : S.Nonempty) : S.card = 12 := by "
         "sorry",
         "card_eq_literal", "12"},
        {"theorem t : IsGreatest {x : ℝ | x ^ 2 ≤ 4} 2 := by sorry",
         "greatest_least_literal", "2"},
        {"theorem t (n : ℕ) : 0 < n ↔ n = 1 := by sorry",
         "iff_eq_literal", "1"},
        {"theorem t : (3 : ℚ) / 12 = 1/4 := by sorry",
         "eq_rational_literal", "1/4"},
        {"theorem t (p : ℕ × ℕ) (h : p.1 + p.2 = 5) : p = (2, "
         "3) := by sorry",
         "eq_tuple_literal", "(2, 3)"},
        {"theorem t (S : Set ℝ) : S = {x : ℝ | x > 0} := by sorry",
         "eq_set_builder", "{x : ℝ | x > 0}"},
        {"theorem t (x : ℝ) (h : x ^ 2 = 2) (hx : 0 < x) : x ∈ "
         "Set.Icc 1 2 := by sorry",
         "interval_mem_literal", "[1, 2]"},
        {"theorem t (r : ℝ) (h : r > 0) : r * 2 / r - 2 + π = "
         "π := by sorry",
         "eq_numeric_ident", "π"},
        {"theorem t (x : ℝ) (h : 0 ≤ x) : x / (1 + x) ≤ 1 := "
         "by sorry",
         "bound_literal", "1"},
        {"theorem t : 37 * 3 = 111 := by sorry", "eq_literal", "111"},
    };
    for (const auto& c : cases) {
        CAPTURE(c.lean);
        const auto e = extract(c.lean);
        REQUIRE(e.has_value());
        CHECK(e->pattern_id == c.pattern);
        CHECK(e->value_text == c.value);
    }
}

TEST_CASE("type-ascribed and negative literals unwrap")
{
    const auto ascribed = extract("theorem t : 2 + 2 = (4 : ℝ) := by "
                                  "sorry");
    REQUIRE(ascribed.has_value());
    CHECK(ascribed->value_text == "4");

    const auto negative = extract("theorem t : 2 - 5 = -3 := by sorry");
    REQUIRE(negative.has_value());
    CHECK(negative->value_text == "-3");

    const auto interval_open = extract(
        "theorem t (x : ℝ) (h : P x) : x ∈ Set.Ioo (-1) 1 := by "
        "sorry");
    REQUIRE(interval_open.has_value());
    CHECK(interval_open->value_text == "(-1, 1)");
}

TEST_CASE("a restricted registry only applies the listed patterns")
{
    const auto only_sum =
        PatternRegistry::standard().subset({"sum_eq_literal"});
    CHECK(extract_answer(kSeriesLean, only_sum).has_value());
    CHECK_FALSE(
        extract_answer("theorem t : 1 + 1 = 2 := by sorry", only_sum)
            .has_value());
    CHECK_THROWS_AS(
        (void)PatternRegistry::standard().subset({"no_such_pattern"}),
        std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Injection

TEST_CASE("inject appends the exact answer sentence")
{
    AnswerExtraction e;
    e.pattern_id = "sum_eq_literal";
    e.value_text = "6";
    const std::string out = inject::inject(kSeriesNl, e);
    CHECK(out == kSeriesNl + " Show that the answer is 6.");
}

TEST_CASE("inject is idempotent")
{
    AnswerExtraction e;
    e.pattern_id = "eq_rational_literal";
    e.value_text = "3/4";
    const std::string once = inject::inject("Find the ratio.", e);
    CHECK(once == "Find the ratio. Show that the answer is 3/4.");
    CHECK(inject::inject(once, e) == once);
}

// ---------------------------------------------------------------------------
// Corpus pass

TEST_CASE("prove-type corpora pass through byte-identical")
{
    std::vector<NlFlPair> corpus = {
        mk("Prove that addition commutes.",
           "theorem t (a b : ℕ) : a + b = b + a := by sorry"),
        mk("Show that the identity is continuous.",
           "theorem t : Continuous (fun x : ℝ => x) := by sorry"),
    };
    const auto before = corpus;
    const auto stats = inject_corpus(corpus);
    CHECK(corpus == before);
    CHECK(stats.injected == 0);
    CHECK(stats.per_pattern.empty());
    CHECK(stats.non_find_type == 2);
}

TEST_CASE("the series record is injected with matching stats")
{
    std::vector<NlFlPair> corpus = {
        mk(kSeriesNl, kSeriesLean),
        mk("Prove that addition commutes.",
           "theorem t (a b : ℕ) : a + b = b + a := by sorry"),
    };
    const auto stats = inject_corpus(corpus);
    CHECK(stats.injected == 1);
    CHECK(stats.per_pattern.at("sum_eq_literal") == 1);
    CHECK(corpus[0].nl_text == kSeriesNl + " Show that the answer is 6.");
    CHECK(corpus[0].injected_answer == "6");
    CHECK(corpus[0].id == canonical_id(corpus[0].nl_text));
    CHECK(corpus[0].lean_statement == kSeriesLean);
    CHECK_FALSE(corpus[1].injected_answer.has_value());
}

TEST_CASE("a labeled ten-record fixture matches its hand counts")
{
    // Hand labels: 2 sum, 1 tendsto, 1 rational, 1 set-builder, 1 plain
    // eq; 2 prove-type records and 2 find-type misses.
    std::vector<NlFlPair> corpus = {
        mk(kSeriesNl, kSeriesLean),
        mk("Determine the value of the series over odd terms.",
           "theorem s2 : ∑' k : ℕ, (1 : ℝ) / 4 ^ k = 2 := by "
           "sorry"),
        mk("Find the limit of the averaged sequence.",
           "theorem l1 (f : ℕ → ℝ) : Filter.Tendsto f "
           "Filter.atTop (nhds 3) := by sorry"),
        mk("Compute the ratio of areas.",
           "theorem r1 : (6 : ℚ) / 8 = 3/4 := by sorry"),
        mk("Find the solution set of the inequality.",
           "theorem set1 (S : Set ℝ) (h : ∀ x, x ∈ S ↔ x "
           "> 1) : S = {x : ℝ | x > 1} := by sorry"),
        mk("Calculate the product of the roots.",
           "theorem e1 : 37 * 3 = 111 := by sorry"),
        mk("Prove that the square of an odd number is odd.",
           "theorem p1 (n : ℤ) (h : Odd n) : Odd (n ^ 2) := by sorry"),
        mk("Prove that the reals are uncountable.",
           "theorem p2 : ¬ Countable ℝ := by sorry"),
        mk("Find a bijection between the sets.",
           "theorem m1 (f : ℕ → ℕ) (hf : Function.Bijective "
           "f) : Function.Bijective (f ∘ f) := by sorry"),
        mk("Determine whether the map is injective.",
           "theorem m2 (g : ℕ → ℕ) (hg : Function.Injective "
           "g) : Function.Injective (g ∘ g) := by sorry"),
    };

    const auto stats = inject_corpus(corpus);
    CHECK(stats.injected == 6);
    CHECK(stats.per_pattern.at("sum_eq_literal") == 2);
    CHECK(stats.per_pattern.at("tendsto_nhds_literal") == 1);
    CHECK(stats.per_pattern.at("eq_rational_literal") == 1);
    CHECK(stats.per_pattern.at("eq_set_builder") == 1);
    CHECK(stats.per_pattern.at("eq_literal") == 1);
    CHECK(stats.non_find_type == 2);
    CHECK(stats.extraction_misses == 2);

    CHECK(corpus[1].nl_text.ends_with("Show that the answer is 2."));
    CHECK(corpus[2].nl_text.ends_with("Show that the answer is 3."));
    CHECK(corpus[3].nl_text.ends_with("Show that the answer is 3/4."));
    CHECK(corpus[5].nl_text.ends_with("Show that the answer is 111."));
    // Misses and prove-type records keep their text.
    CHECK(corpus[8].nl_text == "Find a bijection between the sets.");
    CHECK_FALSE(corpus[8].injected_answer.has_value());
}

TEST_CASE("inject_corpus is idempotent over the whole corpus")
{
    std::vector<NlFlPair> corpus = {
        mk(kSeriesNl, kSeriesLean),
        mk("Compute the ratio of areas.",
           "theorem r1 : (6 : ℚ) / 8 = 3/4 := by sorry"),
        mk("Prove that addition commutes.",
           "theorem t (a b : ℕ) : a + b = b + a := by sorry"),
    };
    const auto stats1 = inject_corpus(corpus);
    const auto after_first = corpus;
    const auto stats2 = inject_corpus(corpus);
    CHECK(corpus == after_first);
    CHECK(stats1.injected == 2);
    CHECK(stats2.injected == 2); // matched again, text unchanged
}

TEST_CASE("every injected record carries the suffix value")
{
    std::vector<NlFlPair> corpus = {
        mk(kSeriesNl, kSeriesLean),
        mk("Find the cardinality of the set of divisors of 12.",
           "theorem c1 : (Nat.divisors 12).card = 6 := by sorry"),
    };
    (void)inject_corpus(corpus);
    for (const auto& r : corpus) {
        REQUIRE(r.injected_answer.has_value());
        CHECK(r.nl_text.ends_with("Show that the answer is " +
                                  *r.injected_answer + "."));
    }
}
