#include "apilearn/prompts.hpp"

#include <filesystem>

namespace apilearn {

std::string to_string(PromptRole role) {
    switch (role) {
        case PromptRole::DocGenerator: return "doc_generator";
        case PromptRole::DocUpdater: return "doc_updater";
        case PromptRole::Judge: return "judge";
        case PromptRole::Summarizer: return "summarizer";
        case PromptRole::AgentSystem: return "agent_system";
    }
    throw Error("unreachable prompt role");
}

PromptRole prompt_role_from_string(std::string_view s) {
    if (s == "doc_generator") return PromptRole::DocGenerator;
    if (s == "doc_updater") return PromptRole::DocUpdater;
    if (s == "judge") return PromptRole::Judge;
    if (s == "summarizer") return PromptRole::Summarizer;
    if (s == "agent_system") return PromptRole::AgentSystem;
    throw Error("unknown prompt role: '" + std::string(s) + "'");
}

namespace {

const char* kDocGenerator = R"(Write API documentation for the function named below, using only what its demonstrations show.

Function name: {function_name}

Demonstrations:
{demonstrations}

The function accepts exactly the following input parameters and no others:
{parameter_list}

Write three sections:
Description: what the function does and when to use it.
Parameters: one line per parameter from the list above, with its apparent type and value format. Do not invent or describe any parameter that is not in the list.
Returns: what the function returns, based on the Return sections of the demonstrations.)";

const char* kDocUpdater = R"(Below is the current documentation of the function {function_name}, followed by new experiences collected by an agent that used the function, each with an evaluation where available.

Current documentation:
{document}

Experiences:
{experiences}

Rewrite the documentation, keeping the Description/Parameters/Returns structure and correcting anything the experiences show to be wrong or missing, especially parameter values and formats. Do not invent parameters that appear in neither the current documentation nor the experiences.)";

const char* kJudge = R"(An agent attempted the following task by calling API functions.

Task:
{task}

Full trajectory:
{trajectory}

The trajectory as a whole was {overall_correct}.

The single call to evaluate is step {step_index}:
{target_step}

Critique this one call: 1) is it a repeated call of an earlier step, 2) is the parameter filling accurate for the task, and 3) is the function used in the right place in the trajectory. Write a short natural-language critique, then end with a final line of exactly this form:
VERDICT: repeated=<y/n> params=<y/n> position=<y/n>)";

const char* kSummarizer = R"(Below are self-exploration experiences of the function {function_name}, each followed by its evaluation where available.

{experiences}

Write short bulleted guidelines (each line starting with "- ") that capture the lessons from these experiences for future use of this function: correct parameter values and formats, lookups that must happen first, and mistakes to avoid.)";

const char* kAgentSystem = R"(You complete tasks by calling API functions in a sandboxed environment.

Respond with exactly one action per turn: a single JSON object.
To call a function: {"function": "<function_name>", "parameters": {"<name>": <value>, ...}}
Parameter values must be scalars (string, number, boolean, or null).
You may write brief reasoning before the JSON object; it is recorded as your thought.
After each call, the next user message is the function's return value.
When the task is complete, or cannot be completed, respond with: {"function": "finish"}

What is known about the available functions is given below. Only call functions listed there.)";

}  // namespace

const std::vector<std::string>& declared_placeholders(PromptRole role) {
    static const std::vector<std::string> generator = {"{function_name}", "{demonstrations}",
                                                       "{parameter_list}"};
    static const std::vector<std::string> updater = {"{function_name}", "{document}",
                                                     "{experiences}"};
    static const std::vector<std::string> judge = {"{task}", "{trajectory}", "{overall_correct}",
                                                   "{step_index}", "{target_step}"};
    static const std::vector<std::string> summarizer = {"{function_name}", "{experiences}"};
    static const std::vector<std::string> agent = {};
    switch (role) {
        case PromptRole::DocGenerator: return generator;
        case PromptRole::DocUpdater: return updater;
        case PromptRole::Judge: return judge;
        case PromptRole::Summarizer: return summarizer;
        case PromptRole::AgentSystem: return agent;
    }
    throw Error("unreachable prompt role");
}

const PromptAsset& default_prompt(PromptRole role) {
    static const PromptAsset generator{PromptRole::DocGenerator, kDocGenerator};
    static const PromptAsset updater{PromptRole::DocUpdater, kDocUpdater};
    static const PromptAsset judge{PromptRole::Judge, kJudge};
    static const PromptAsset summarizer{PromptRole::Summarizer, kSummarizer};
    static const PromptAsset agent{PromptRole::AgentSystem, kAgentSystem};
    switch (role) {
        case PromptRole::DocGenerator: return generator;
        case PromptRole::DocUpdater: return updater;
        case PromptRole::Judge: return judge;
        case PromptRole::Summarizer: return summarizer;
        case PromptRole::AgentSystem: return agent;
    }
    throw Error("unreachable prompt role");
}

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

void validate_prompt_asset(const PromptAsset& asset) {
    if (trim(asset.text).empty()) {
        throw Error("prompt asset for role '" + to_string(asset.role) + "' is empty");
    }
    for (const std::string& placeholder : declared_placeholders(asset.role)) {
        std::size_t n = count_occurrences(asset.text, placeholder);
        if (n != 1) {
            throw Error("prompt asset for role '" + to_string(asset.role) + "' must contain " +
                        placeholder + " exactly once (found " + std::to_string(n) + ")");
        }
    }
}

std::string fill_placeholders(const std::string& tmpl,
                              const std::map<std::string, std::string>& values) {
    std::string out = tmpl;
    for (const auto& [key, value] : values) {
        std::string placeholder = "{" + key + "}";
        if (out.find(placeholder) == std::string::npos) {
            throw Error("template does not contain placeholder " + placeholder);
        }
        out = replace_all(out, placeholder, value);
    }
    return out;
}

std::string system_line(PromptRole role) {
    switch (role) {
        case PromptRole::DocGenerator:
            return "You write precise API documentation from usage demonstrations. Never invent "
                   "parameters that were not observed.";
        case PromptRole::DocUpdater:
            return "You revise API documentation using new usage experiences. Never invent "
                   "parameters that were not observed.";
        case PromptRole::Judge:
            return "You evaluate a single function call within an agent's task trajectory.";
        case PromptRole::Summarizer:
            return "You distill usage experiences of an API function into practical guidelines.";
        case PromptRole::AgentSystem:
            return "You are an API-calling agent.";
    }
    throw Error("unreachable prompt role");
}

PromptAsset load_prompt(PromptRole role, const std::string& prompts_dir) {
    if (prompts_dir.empty()) return default_prompt(role);
    std::filesystem::path path = std::filesystem::path(prompts_dir) / (to_string(role) + ".txt");
    if (!std::filesystem::exists(path)) return default_prompt(role);
    PromptAsset asset{role, read_file(path)};
    validate_prompt_asset(asset);
    return asset;
}

}  // namespace apilearn
