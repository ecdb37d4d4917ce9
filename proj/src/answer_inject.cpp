#include "autoform/answer_inject.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace autoform::inject {

namespace {

// ---------------------------------------------------------------------------
// Bracket-aware scanning. Byte-wise scans are safe for ASCII tokens in
// UTF-8; the math brackets ⟨ ⟩ are matched as 3-byte sequences.

bool at(std::string_view s, std::size_t i, std::string_view token)
{
    return s.compare(i, token.size(), token) == 0;
}

int bracket_step(std::string_view s, std::size_t i, std::size_t& advance)
{
    advance = 1;
    switch (s[i]) {
        case '(': case '[': case '{': return 1;
        case ')': case ']': case '}': return -1;
        default: break;
    }
    if (at(s, i, "⟨")) { advance = 3; return 1; }  // ⟨
    if (at(s, i, "⟩")) { advance = 3; return -1; } // ⟩
    return 0;
}

// Positions (at depth 0) where `token` occurs outside any brackets.
std::vector<std::size_t> top_level_positions(std::string_view s,
                                             std::string_view token)
{
    std::vector<std::size_t> out;
    int depth = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t adv = 1;
        const int d = bracket_step(s, i, adv);
        if (d != 0) {
            depth += d;
            i += adv;
            continue;
        }
        if (depth == 0 && at(s, i, token)) {
            out.push_back(i);
        }
        ++i;
    }
    return out;
}

bool is_balanced(std::string_view s)
{
    int depth = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t adv = 1;
        depth += bracket_step(s, i, adv);
        if (depth < 0) {
            return false;
        }
        i += adv;
    }
    return depth == 0;
}

std::string_view trim_view(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

// `=` that is actual equality: not `:=`, `=>`, `==` or `!=`.
std::vector<std::size_t> top_level_eq(std::string_view s)
{
    std::vector<std::size_t> out;
    for (const std::size_t i : top_level_positions(s, "=")) {
        if (i > 0 && (s[i - 1] == ':' || s[i - 1] == '=' || s[i - 1] == '!')) {
            continue;
        }
        if (i + 1 < s.size() && (s[i + 1] == '>' || s[i + 1] == '=')) {
            continue;
        }
        out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Literal parsing

struct Literal {
    enum class Kind { Number, Rational };
    Kind kind = Kind::Number;
    std::string display;
};

bool parse_number_token(std::string_view s)
{
    s = trim_view(s);
    if (s.empty()) {
        return false;
    }
    std::size_t i = 0;
    if (s[i] == '-') {
        ++i;
    }
    std::size_t digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        ++i;
        ++digits;
    }
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() &&
               std::isdigit(static_cast<unsigned char>(s[i]))) {
            ++i;
            ++digits;
        }
    }
    return digits > 0 && i == s.size();
}

// Unwraps redundant parens and type ascriptions: "((6 : ℝ))" -> "6".
std::string_view unwrap(std::string_view s)
{
    for (;;) {
        s = trim_view(s);
        if (s.size() >= 2 && s.front() == '(' && s.back() == ')' &&
            is_balanced(s.substr(1, s.size() - 2))) {
            s = s.substr(1, s.size() - 2);
            // Type ascription inside the group.
            const auto colons = top_level_positions(s, ":");
            if (colons.size() == 1 && !at(s, colons[0], ":=")) {
                s = s.substr(0, colons[0]);
            }
            continue;
        }
        return s;
    }
}

std::optional<Literal> parse_literal(std::string_view raw)
{
    const std::string_view s = unwrap(raw);
    if (s.empty()) {
        return std::nullopt;
    }
    if (parse_number_token(s)) {
        return Literal{Literal::Kind::Number, std::string(s)};
    }
    const auto slashes = top_level_positions(s, "/");
    if (slashes.size() == 1) {
        const std::string_view lhs = unwrap(s.substr(0, slashes[0]));
        const std::string_view rhs = unwrap(s.substr(slashes[0] + 1));
        if (parse_number_token(lhs) && parse_number_token(rhs)) {
            return Literal{Literal::Kind::Rational,
                           std::string(lhs) + "/" + std::string(rhs)};
        }
    }
    return std::nullopt;
}

// Next whitespace-delimited balanced token starting at `pos`.
std::string_view next_token(std::string_view s, std::size_t pos)
{
    while (pos < s.size() &&
           std::isspace(static_cast<unsigned char>(s[pos]))) {
        ++pos;
    }
    if (pos >= s.size()) {
        return {};
    }
    std::size_t i = pos;
    int depth = 0;
    while (i < s.size()) {
        std::size_t adv = 1;
        const int d = bracket_step(s, i, adv);
        if (d == 1) {
            ++depth;
            i += adv;
            continue;
        }
        if (d == -1) {
            if (depth == 0) {
                break; // closes a group that opened before `pos`
            }
            --depth;
            i += adv;
            if (depth == 0) {
                break; // token itself was a balanced group
            }
            continue;
        }
        if (depth == 0 && std::isspace(static_cast<unsigned char>(s[i]))) {
            break;
        }
        ++i;
    }
    return s.substr(pos, i - pos);
}

// ---------------------------------------------------------------------------
// Matchers. Each receives the parsed goal and reports the answer text
// plus the byte span of the matched value in the full statement.

AnswerExtraction make_extraction(const GoalView& g, std::string pattern_id,
                                 std::string value, std::string_view region)
{
    AnswerExtraction e;
    e.pattern_id = std::move(pattern_id);
    e.value_text = std::move(value);
    const auto* goal_data = g.goal.data();
    e.span_begin = g.goal_begin + std::size_t(region.data() - goal_data);
    e.span_end = e.span_begin + region.size();
    return e;
}

std::optional<std::string_view> rhs_of_last_eq(std::string_view goal)
{
    const auto eqs = top_level_eq(goal);
    if (eqs.empty()) {
        return std::nullopt;
    }
    return trim_view(goal.substr(eqs.back() + 1));
}

std::optional<AnswerExtraction> match_tendsto(const GoalView& g)
{
    if (g.goal.find("Tendsto") == std::string_view::npos) {
        return std::nullopt;
    }
    std::size_t pos = g.goal.find("nhds");
    std::size_t skip = 4;
    if (pos == std::string_view::npos) {
        const std::string_view script_n = "\U0001D4DD"; // 𝓝
        pos = g.goal.find(script_n);
        skip = script_n.size();
    }
    if (pos == std::string_view::npos) {
        return std::nullopt;
    }
    const std::string_view arg = next_token(g.goal, pos + skip);
    if (const auto lit = parse_literal(arg)) {
        return make_extraction(g, "tendsto_nhds_literal", lit->display, arg);
    }
    return std::nullopt;
}

std::optional<AnswerExtraction> match_sum_eq(const GoalView& g)
{
    const bool has_big_op =
        g.goal.find("∑") != std::string_view::npos ||  // ∑
        g.goal.find("∏") != std::string_view::npos ||  // ∏
        g.goal.find("tsum") != std::string_view::npos;
    if (!has_big_op) {
        return std::nullopt;
    }
    const auto rhs = rhs_of_last_eq(g.goal);
    if (!rhs) {
        return std::nullopt;
    }
    if (const auto lit = parse_literal(*rhs)) {
        return make_extraction(g, "sum_eq_literal", lit->display, *rhs);
    }
    return std::nullopt;
}

std::optional<AnswerExtraction> match_card_eq(const GoalView& g)
{
    const bool has_card =
        g.goal.find(".card") != std::string_view::npos ||
        g.goal.find("Nat.card") != std::string_view::npos ||
        g.goal.find("Fintype.card") != std::string_view::npos ||
        g.goal.find("ncard") != std::string_view::npos;
    if (!has_card) {
        return std::nullopt;
    }
    const auto rhs = rhs_of_last_eq(g.goal);
    if (!rhs) {
        return std::nullopt;
    }
    if (const auto lit = parse_literal(*rhs)) {
        return make_extraction(g, "card_eq_literal", lit->display, *rhs);
    }
    return std::nullopt;
}

std::optional<AnswerExtraction> match_greatest_least(const GoalView& g)
{
    if (g.goal.find("IsGreatest") == std::string_view::npos &&
        g.goal.find("IsLeast") == std::string_view::npos) {
        return std::nullopt;
    }
    // The extremum is the trailing argument.
    std::string_view last;
    std::size_t pos = 0;
    while (true) {
        const std::string_view tok = next_token(g.goal, pos);
        if (tok.empty()) {
            break;
        }
        last = tok;
        pos = std::size_t(tok.data() - g.goal.data()) + tok.size();
    }
    if (const auto lit = parse_literal(last)) {
        return make_extraction(g, "greatest_least_literal", lit->display,
                               last);
    }
    return std::nullopt;
}

std::optional<AnswerExtraction> match_iff_eq(const GoalView& g)
{
    const auto iffs = top_level_positions(g.goal, "↔"); // ↔
    if (iffs.empty()) {
        return std::nullopt;
    }
    const std::size_t iff_len = std::string_view("↔").size();
    const std::string_view lhs = trim_view(g.goal.substr(0, iffs.back()));
    const std::string_view rhs =
        trim_view(g.goal.substr(iffs.back() + iff_len));
    for (std::string_view side : {rhs, lhs}) {
        const auto eqs = top_level_eq(side);
        if (eqs.empty()) {
            continue;
        }
        const std::string_view value = trim_view(side.substr(eqs.back() + 1));
        if (const auto lit = parse_literal(value)) {
            return make_extraction(g, "iff_eq_literal", lit->display, value);
        }
    }
    return std::nullopt;
}

std::optional<AnswerExtraction> match_eq_rational(const GoalView& g)
{
    const auto rhs = rhs_of_last_eq(g.goal);
    if (!rhs) {
        return std::nullopt;
    }
    const auto lit = parse_literal(*rhs);
    if (lit && lit->kind == Literal::Kind::Rational) {
        return make_extraction(g, "eq_rational_literal", lit->display, *rhs);
    }
    return std::nullopt;
}

std::optional<AnswerExtraction> match_eq_tuple(const GoalView& g)
{
    const auto rhs = rhs_of_last_eq(g.goal);
    if (!rhs || rhs->size() < 2 || rhs->front() != '(' || rhs->back() != ')') {
        return std::nullopt;
    }
    const std::string_view inner = rhs->substr(1, rhs->size() - 2);
    if (!is_balanced(inner)) {
        return std::nullopt;
    }
    const auto commas = top_level_positions(inner, ",");
    if (commas.empty()) {
        return std::nullopt;
    }
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t c : commas) {
        parts.emplace_back(trim_view(inner.substr(start, c - start)));
        start = c + 1;
    }
    parts.emplace_back(trim_view(inner.substr(start)));
    std::string display = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto lit = parse_literal(parts[i]);
        if (!lit) {
            return std::nullopt;
        }
        if (i > 0) {
            display += ", ";
        }
        display += lit->display;
    }
    display += ")";
    return make_extraction(g, "eq_tuple_literal", display, *rhs);
}

std::optional<AnswerExtraction> match_eq_set(const GoalView& g)
{
    const auto rhs = rhs_of_last_eq(g.goal);
    if (!rhs || rhs->size() < 2 || rhs->front() != '{' || rhs->back() != '}') {
        return std::nullopt;
    }
    if (!is_balanced(*rhs)) {
        return std::nullopt;
    }
    return make_extraction(g, "eq_set_builder", std::string(*rhs), *rhs);
}

std::optional<AnswerExtraction> match_interval_mem(const GoalView& g)
{
    const auto mems = top_level_positions(g.goal, "∈"); // ∈
    if (mems.empty()) {
        return std::nullopt;
    }
    const std::size_t mem_len = std::string_view("∈").size();
    const std::string_view rhs =
        trim_view(g.goal.substr(mems.back() + mem_len));

    struct IntervalKind {
        std::string_view name;
        char open;
        char close;
    };
    static constexpr IntervalKind kKinds[] = {
        {"Icc", '[', ']'}, {"Ico", '[', ')'}, {"Ioc", '(', ']'},
        {"Ioo", '(', ')'}};
    for (const auto& kind : kKinds) {
        std::size_t after = std::string_view::npos;
        if (rhs.starts_with(std::string("Set.") + std::string(kind.name))) {
            after = 4 + kind.name.size();
        } else if (rhs.starts_with(kind.name)) {
            after = kind.name.size();
        }
        if (after == std::string_view::npos) {
            continue;
        }
        const std::string_view a = next_token(rhs, after);
        if (a.empty()) {
            return std::nullopt;
        }
        const std::size_t a_end =
            std::size_t(a.data() - rhs.data()) + a.size();
        const std::string_view b = next_token(rhs, a_end);
        const auto la = parse_literal(a);
        const auto lb = parse_literal(b);
        if (la && lb) {
            const std::string display = std::string(1, kind.open) +
                                        la->display + ", " + lb->display +
                                        std::string(1, kind.close);
            return make_extraction(g, "interval_mem_literal", display, rhs);
        }
        return std::nullopt;
    }
    return std::nullopt;
}

std::optional<AnswerExtraction> match_eq_numeric_ident(const GoalView& g)
{
    static const std::vector<std::string_view> kNumericIdents = {
        "π", "Real.pi", "Real.goldenRatio"}; // π et al.
    const auto rhs = rhs_of_last_eq(g.goal);
    if (!rhs) {
        return std::nullopt;
    }
    const std::string_view ident = unwrap(*rhs);
    for (const auto known : kNumericIdents) {
        if (ident == known) {
            return make_extraction(g, "eq_numeric_ident", std::string(ident),
                                   *rhs);
        }
    }
    return std::nullopt;
}

std::optional<AnswerExtraction> match_bound(const GoalView& g)
{
    for (std::string_view rel : {"≤", "≥"}) { // ≤ ≥
        const auto positions = top_level_positions(g.goal, rel);
        if (positions.empty()) {
            continue;
        }
        const std::string_view rhs =
            trim_view(g.goal.substr(positions.back() + rel.size()));
        if (const auto lit = parse_literal(rhs)) {
            return make_extraction(g, "bound_literal", lit->display, rhs);
        }
    }
    return std::nullopt;
}

std::optional<AnswerExtraction> match_eq_literal(const GoalView& g)
{
    const auto rhs = rhs_of_last_eq(g.goal);
    if (!rhs) {
        return std::nullopt;
    }
    if (const auto lit = parse_literal(*rhs)) {
        return make_extraction(g, "eq_literal", lit->display, *rhs);
    }
    return std::nullopt;
}

} // namespace

// ---------------------------------------------------------------------------
// Goal splitting

std::optional<GoalView> split_goal(std::string_view lean_statement)
{
    // Signature separator: the first top-level ':' that is neither ':='
    // nor '::'.
    std::size_t colon = std::string_view::npos;
    for (const std::size_t i : top_level_positions(lean_statement, ":")) {
        if (at(lean_statement, i, ":=") || at(lean_statement, i, "::") ||
            (i > 0 && lean_statement[i - 1] == ':')) {
            continue;
        }
        colon = i;
        break;
    }
    const auto assigns = top_level_positions(lean_statement, ":=");
    if (colon == std::string_view::npos || assigns.empty() ||
        assigns.back() < colon) {
        return std::nullopt;
    }
    const std::string_view goal = trim_view(
        lean_statement.substr(colon + 1, assigns.back() - colon - 1));
    if (goal.empty()) {
        return std::nullopt;
    }
    GoalView g;
    g.statement = lean_statement;
    g.goal = goal;
    g.goal_begin = std::size_t(goal.data() - lean_statement.data());
    return g;
}

// ---------------------------------------------------------------------------
// Registry

const PatternRegistry& PatternRegistry::standard()
{
    static const PatternRegistry kStandard = [] {
        PatternRegistry r;
        r.patterns_ = {
            {"tendsto_nhds_literal", "limit value inside nhds",
             match_tendsto},
            {"sum_eq_literal", "series/product equal to a literal",
             match_sum_eq},
            {"card_eq_literal", "cardinality equal to a literal",
             match_card_eq},
            {"greatest_least_literal", "IsGreatest/IsLeast extremum",
             match_greatest_least},
            {"iff_eq_literal", "iff-characterization fixing a literal",
             match_iff_eq},
            {"eq_rational_literal", "equality with a rational literal",
             match_eq_rational},
            {"eq_tuple_literal", "equality with a tuple of literals",
             match_eq_tuple},
            {"eq_set_builder", "equality with a set literal", match_eq_set},
            {"interval_mem_literal", "membership in a literal interval",
             match_interval_mem},
            {"eq_numeric_ident", "equality with a named numeric constant",
             match_eq_numeric_ident},
            {"bound_literal", "closed-form bound by a literal", match_bound},
            {"eq_literal", "equality with a numeric literal",
             match_eq_literal},
        };
        return r;
    }();
    return kStandard;
}

PatternRegistry PatternRegistry::subset(
    const std::vector<std::string>& ids) const
{
    PatternRegistry out;
    for (const auto& id : ids) {
        const auto it =
            std::find_if(patterns_.begin(), patterns_.end(),
                         [&id](const PatternDef& p) { return p.id == id; });
        if (it == patterns_.end()) {
            throw std::invalid_argument("unknown pattern id: " + id);
        }
        out.patterns_.push_back(*it);
    }
    return out;
}

std::vector<std::string> PatternRegistry::ids() const
{
    std::vector<std::string> out;
    out.reserve(patterns_.size());
    for (const auto& p : patterns_) {
        out.push_back(p.id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Classification / extraction / injection

bool classify_find_type(std::string_view nl_text)
{
    static const std::vector<std::string_view> kKeywords = {
        "find", "determine", "compute", "evaluate",
        "what is", "how many", "calculate"};
    std::string lowered(nl_text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    for (const auto kw : kKeywords) {
        if (lowered.find(kw) != std::string::npos) {
            return true;
        }
    }
    return false;
}

std::optional<AnswerExtraction> extract_answer(std::string_view lean_statement,
                                               const PatternRegistry& registry)
{
    const auto goal = split_goal(lean_statement);
    if (!goal) {
        return std::nullopt;
    }
    for (const auto& pattern : registry.patterns()) {
        if (auto e = pattern.match(*goal)) {
            return e;
        }
    }
    return std::nullopt;
}

std::string inject(std::string_view nl_text,
                   const AnswerExtraction& extraction)
{
    const std::string sentence =
        "Show that the answer is " + extraction.value_text + ".";
    if (nl_text.ends_with(sentence)) {
        return std::string(nl_text);
    }
    return std::string(nl_text) + " " + sentence;
}

InjectStats inject_corpus(std::vector<NlFlPair>& records,
                          const PatternRegistry& registry)
{
    InjectStats stats;
    for (auto& r : records) {
        if (!classify_find_type(r.nl_text)) {
            ++stats.non_find_type;
            continue;
        }
        const auto extraction = extract_answer(r.lean_statement, registry);
        if (!extraction) {
            ++stats.extraction_misses;
            continue;
        }
        r.nl_text = inject(r.nl_text, *extraction);
        r.injected_answer = extraction->value_text;
        r.id = canonical_id(r.nl_text);
        ++stats.per_pattern[extraction->pattern_id];
        ++stats.injected;
    }
    return stats;
}

} // namespace autoform::inject
