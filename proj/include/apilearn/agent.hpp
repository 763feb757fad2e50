#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apilearn/backend.hpp"
#include "apilearn/core.hpp"
#include "apilearn/prompts.hpp"
#include "apilearn/sandbox.hpp"

namespace apilearn {

// The policy loop: build prompts from a textualization, parse structured
// actions from model output, execute in the sandbox, stop on finish or
// max_steps.

struct Action {
    enum class Kind { Call, Finish };
    Kind kind = Kind::Finish;
    std::optional<ToolCall> call;  // present iff kind == Call
};

struct ParsedAction {
    Action action;
    std::optional<std::string> thought;  // any text before the action object
};

class ActionParseError : public Error {
public:
    explicit ActionParseError(const std::string& raw_output)
        : Error("no well-formed action object in model output: \"" + raw_output + "\""),
          raw_output_(raw_output) {}
    const std::string& raw_output() const { return raw_output_; }

private:
    std::string raw_output_;
};

// Extracts the first well-formed {"function": ..., "parameters": {...}}
// object; tolerates surrounding prose and code fences. {"function":"finish"}
// maps to Finish.
ParsedAction parse_action(const std::string& llm_output);

struct EpisodeConfig {
    std::size_t max_steps = 10;
    std::optional<std::size_t> history_limit;  // keep task message + last K
    std::size_t reprompt_on_parse_error = 1;
    double temperature = 0.0;
    std::string model = "default";
    std::int64_t seed = 0;
    bool emit_transcripts = false;
};

// Keeps the task message (index 0) plus the last k conversation messages,
// merging adjacent same-role messages so alternation survives truncation.
std::vector<ChatMessage> truncate_history(const std::vector<ChatMessage>& messages,
                                          std::size_t k);

std::string build_agent_system_prompt(
    const Textualization& textualization,
    const PromptAsset& asset = default_prompt(PromptRole::AgentSystem));

struct TranscriptEntry {
    ChatRequest request;
    std::string response;
};

struct EpisodeResult {
    Trajectory trajectory;
    bool errored = false;  // backend failure; excluded from success counts
    std::string error_reason;
    std::vector<TranscriptEntry> transcript;  // only with emit_transcripts
};

EpisodeResult run_episode(
    const sandbox::TaskInstance& task, const Textualization& textualization, Backend& backend,
    const EpisodeConfig& config,
    const PromptAsset& agent_system = default_prompt(PromptRole::AgentSystem));

}  // namespace apilearn
