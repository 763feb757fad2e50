#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apilearn/backend.hpp"
#include "apilearn/core.hpp"
#include "apilearn/prompts.hpp"

namespace apilearn {

// The expert-demonstration processing methods: DxD, GD, GDwC, OD. All three
// demo-based methods consume the identical per-function sample for a given
// (train_demos, n, seed), and functions with fewer than n training demos are
// omitted; excluding their tasks is the harness's job.

// Sorted union of parameter names used across the demos. Mixing functions is
// an error. The result is injected into the generator's user prompt to
// suppress hallucinated parameters.
std::vector<std::string> extract_parameters(const std::vector<Demonstration>& demos_f);

Textualization dxd(const DemosByFunction& train_demos, std::size_t n, std::uint64_t seed);

std::string generator_user_prompt(const FunctionName& function,
                                  const std::vector<Demonstration>& sample,
                                  const std::vector<std::string>& parameters,
                                  const PromptAsset& asset);

Textualization gd(const DemosByFunction& train_demos, std::size_t n, std::uint64_t seed,
                  Backend& backend,
                  const PromptAsset& asset = default_prompt(PromptRole::DocGenerator));

Textualization gdwc(const DemosByFunction& train_demos, std::size_t n, std::uint64_t seed,
                    Backend& backend,
                    const PromptAsset& asset = default_prompt(PromptRole::DocGenerator));

Textualization od(const std::string& environment_id);

// The example-call lines appended by GDwC (calls only, no task or previous
// steps).
std::string example_calls_section(const std::vector<Demonstration>& sample);

// Warnings for generated docs lacking a parameter section.
std::vector<std::string> lint_documentation(const Textualization& t);

// Persists one text file per function plus manifest.json. Files carry a
// single provenance header line which load_textualization strips again.
void save_textualization(const Textualization& t, const std::filesystem::path& dir,
                         const std::string& model_label = "none");

Textualization load_textualization(const std::filesystem::path& dir);

// Digest of the per-function contents, for run manifests.
std::string textualization_digest(const Textualization& t);

}  // namespace apilearn
