#include "autoform/prompts.hpp"

#include "autoform/sha256.hpp"

namespace autoform::prompts {

const std::string_view kGenerationSystemPrompt =
    "You are an assistant that translates natural-language math statements "
    "into Lean 4 theorems that compile with Mathlib. The preamble import "
    "Mathlib and open BigOperators Real Nat Topology Rat is already "
    "provided. Given a math problem or statement, output only a single "
    "Lean 4 theorem whose type states the claim, ending the proof with := "
    "by sorry. Do not include any proof steps, explanations, comments, or "
    "extra text. Wrap your output in a lean4 code block.";

const std::string_view kJudgeRubric =
    "You are an expert Lean 4 / Mathlib reviewer. You will be given:\n"
    "\n"
    "1. A ground-truth Lean 4 theorem statement.\n"
    "2. A candidate Lean 4 theorem statement produced by a model.\n"
    "\n"
    "Both compile successfully. Judge how semantically faithful the "
    "candidate is to the ground truth, ignoring superficial differences "
    "(variable names, open declarations, import style).\n"
    "\n"
    "Score on a scale of 0.0 to 1.0:\n"
    "\n"
    "- 1.0 = semantically identical formalization\n"
    "- 0.7-0.9 = minor differences that don't change meaning\n"
    "- 0.3-0.6 = partially captures the statement but with meaningful "
    "errors\n"
    "- 0.0-0.2 = wrong or unrelated formalization\n"
    "\n"
    "Respond with ONLY a JSON object: {\"score\": <float>, \"reason\": "
    "\"<brief explanation>\"}";

std::string render_judge_prompt(std::string_view nl_text,
                                std::string_view candidate,
                                std::string_view ground_truth)
{
    std::string out;
    out.reserve(kJudgeRubric.size() + nl_text.size() + candidate.size() +
                ground_truth.size() + 128);
    out += kJudgeRubric;
    out += "\n\nNatural-language problem:\n";
    out += nl_text;
    out += "\n\nGround truth:\n```lean4\n";
    out += ground_truth;
    out += "\n```\n\nCandidate:\n```lean4\n";
    out += candidate;
    out += "\n```\n";
    return out;
}

std::string generation_prompt_sha256()
{
    return Sha256::hex(kGenerationSystemPrompt);
}

std::string judge_rubric_sha256()
{
    return Sha256::hex(kJudgeRubric);
}

} // namespace autoform::prompts
