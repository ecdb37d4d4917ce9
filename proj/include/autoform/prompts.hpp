#pragma once

#include <string>
#include <string_view>

namespace autoform::prompts {

// Frozen prompt assets shared by training-data formatting, the reward
// judge, and evaluation. These strings are byte-frozen: downstream
// checksums pin them, so any edit is a breaking change.

// System prompt used for generation (SFT formatting and rollouts).
extern const std::string_view kGenerationSystemPrompt;

// Scoring rubric sent to the semantic judge ahead of the two statements.
extern const std::string_view kJudgeRubric;

// Rubric plus the rendered problem, ground truth and candidate blocks.
std::string render_judge_prompt(std::string_view nl_text,
                                std::string_view candidate,
                                std::string_view ground_truth);

std::string generation_prompt_sha256();
std::string judge_rubric_sha256();

} // namespace autoform::prompts
