#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apilearn/agent.hpp"
#include "apilearn/backend.hpp"
#include "apilearn/core.hpp"
#include "apilearn/prompts.hpp"

namespace apilearn {

// Self-exploration on training tasks, per-call judge critique, and the four
// experience-processing methods DE, UD, RD, AG.

struct ExperienceSet {
    DemosByFunction per_function;  // demos with source == experience
    std::vector<Trajectory> trajectories;
};

struct ExploreOutcome {
    ExperienceSet experiences;
    std::vector<std::string> skipped_tasks;  // episode errored; reason logged
};

// Runs an episode on every training task and converts every step of every
// trajectory, success or failure, into an experience demonstration.
ExploreOutcome self_explore(const std::vector<sandbox::TaskInstance>& train_tasks,
                            const Textualization& textualization, Backend& agent_backend,
                            const EpisodeConfig& config);

std::optional<CritiqueFlags> parse_verdict_flags(const std::string& critique_text);

Critique judge_call(const std::string& task_text, const Trajectory& trajectory,
                    bool overall_correct, std::size_t step_index, Backend& judge_backend,
                    const PromptAsset& asset = default_prompt(PromptRole::Judge));

// One judge call per step of every trajectory; critiques are attached to the
// matching experiences' evaluation fields. A judge failure leaves that
// experience without an evaluation.
std::vector<Critique> judge_experiences(ExperienceSet& experiences, Backend& judge_backend,
                                        const PromptAsset& asset = default_prompt(
                                            PromptRole::Judge));

// Rendered sampled expert demos followed by rendered experiences; identical
// to the DxD block for functions without experiences.
Textualization de(const DemosByFunction& train_demos, const ExperienceSet& experiences,
                  std::size_t n, std::uint64_t seed);

Textualization ud(const Textualization& gd_textualization, const ExperienceSet& experiences,
                  Backend& updater_backend,
                  const PromptAsset& asset = default_prompt(PromptRole::DocUpdater));

// Regenerates docs from expert demos plus experiences; functions without
// experiences keep their GD doc.
Textualization rd(const DemosByFunction& train_demos, const ExperienceSet& experiences,
                  std::size_t n, std::uint64_t seed, Backend& generator_backend,
                  const Textualization& gd_textualization,
                  const PromptAsset& asset = default_prompt(PromptRole::DocGenerator));

struct AgOptions {
    // Experience text beyond this budget is truncated to the most recent
    // entries; a notice is written to stderr.
    std::size_t experience_char_budget = 60000;
};

Textualization ag(const Textualization& gd_textualization, const ExperienceSet& experiences,
                  Backend& summarizer_backend,
                  const PromptAsset& asset = default_prompt(PromptRole::Summarizer),
                  const AgOptions& options = {});

Textualization inject_guideline(const Textualization& textualization,
                                const FunctionName& function, const std::string& text);

}  // namespace apilearn
