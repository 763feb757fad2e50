#include "apilearn/agent.hpp"

namespace apilearn {

namespace {

// Finds the end of a balanced JSON object starting at `start`, respecting
// string literals and escapes. Returns npos when unbalanced.
std::size_t find_object_end(const std::string& text, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
        } else if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            --depth;
            if (depth == 0) return i;
        }
    }
    return std::string::npos;
}

std::optional<Action> action_from_json(const json& j) {
    if (!j.is_object() || !j.contains("function") || !j.at("function").is_string()) {
        return std::nullopt;
    }
    std::string function = j.at("function").get<std::string>();
    if (function == "finish") {
        return Action{Action::Kind::Finish, std::nullopt};
    }
    if (!FunctionName::is_valid(function)) return std::nullopt;
    ToolCall call;
    call.function = FunctionName(function);
    if (j.contains("parameters")) {
        const json& params = j.at("parameters");
        if (!params.is_object()) return std::nullopt;
        for (auto it = params.begin(); it != params.end(); ++it) {
            if (it.value().is_object() || it.value().is_array()) {
                return std::nullopt;  // nested values make the object malformed
            }
            call.parameters[it.key()] = param_value_from_json(it.value());
        }
    }
    return Action{Action::Kind::Call, std::move(call)};
}

}  // namespace

ParsedAction parse_action(const std::string& llm_output) {
    std::size_t pos = 0;
    while ((pos = llm_output.find('{', pos)) != std::string::npos) {
        std::size_t end = find_object_end(llm_output, pos);
        if (end == std::string::npos) {
            ++pos;
            continue;
        }
        json j = json::parse(llm_output.substr(pos, end - pos + 1), nullptr, false);
        if (!j.is_discarded()) {
            if (auto action = action_from_json(j)) {
                ParsedAction parsed;
                parsed.action = std::move(*action);
                std::string before = trim(llm_output.substr(0, pos));
                // A code-fence opener right before the object is not thought.
                if (before.ends_with("```json")) {
                    before = trim(before.substr(0, before.size() - 7));
                } else if (before.ends_with("```")) {
                    before = trim(before.substr(0, before.size() - 3));
                }
                if (!before.empty()) parsed.thought = before;
                return parsed;
            }
        }
        ++pos;
    }
    throw ActionParseError(llm_output);
}

std::vector<ChatMessage> truncate_history(const std::vector<ChatMessage>& messages,
                                          std::size_t k) {
    if (k < 1) throw Error("history limit must be >= 1");
    if (messages.empty()) return {};
    std::vector<ChatMessage> kept;
    kept.push_back(messages.front());  // the task message
    std::size_t tail_start = messages.size() > k ? messages.size() - k : 1;
    if (tail_start < 1) tail_start = 1;
    for (std::size_t i = tail_start; i < messages.size(); ++i) kept.push_back(messages[i]);

    // Merge adjacent same-role messages so roles still alternate.
    std::vector<ChatMessage> merged;
    for (ChatMessage& m : kept) {
        if (!merged.empty() && merged.back().role == m.role) {
            merged.back().content += "\n\n" + m.content;
        } else {
            merged.push_back(std::move(m));
        }
    }
    return merged;
}

std::string build_agent_system_prompt(const Textualization& textualization,
                                      const PromptAsset& asset) {
    validate_prompt_asset(asset);
    std::string out = asset.text;
    for (const auto& [function, block] : textualization.per_function) {
        out += "\n\n### " + function.str() + "\n" + block;
    }
    return out;
}

EpisodeResult run_episode(const sandbox::TaskInstance& task,
                          const Textualization& textualization, Backend& backend,
                          const EpisodeConfig& config, const PromptAsset& agent_system) {
    if (textualization.per_function.empty()) {
        throw Error("run_episode: textualization covers no functions");
    }

    EpisodeResult result;
    Trajectory& traj = result.trajectory;
    traj.task_id = task.task_id;
    traj.task_text = task.text;
    traj.source = TrajectorySource::Agent;
    traj.seed = config.seed;

    std::string system = build_agent_system_prompt(textualization, agent_system);
    std::vector<ChatMessage> messages = {{ChatRole::User, task.text}};
    sandbox::SandboxState state = task.initial_state;
    std::size_t reprompts_left = config.reprompt_on_parse_error;

    while (traj.steps.size() < config.max_steps) {
        ChatRequest request;
        request.system = system;
        request.messages =
            config.history_limit ? truncate_history(messages, *config.history_limit) : messages;
        request.temperature = config.temperature;
        request.model = config.model;
        request.seed = config.seed;

        std::string output;
        try {
            output = backend.complete(request);
        } catch (const BackendError& e) {
            result.errored = true;
            result.error_reason = e.what();
            break;
        }
        if (config.emit_transcripts) result.transcript.push_back({request, output});

        ParsedAction parsed;
        try {
            parsed = parse_action(output);
        } catch (const ActionParseError&) {
            if (reprompts_left > 0) {
                --reprompts_left;
                messages.push_back({ChatRole::Assistant, output});
                messages.push_back({ChatRole::User, "Respond with exactly one action object."});
                continue;
            }
            break;  // reward still computed from the current state
        }

        if (parsed.action.kind == Action::Kind::Finish) break;

        const ToolCall& call = *parsed.action.call;
        std::string observation;
        try {
            sandbox::ExecResult exec = sandbox::execute(state, call);
            state = std::move(exec.state);
            observation = std::move(exec.observation);
        } catch (const sandbox::SandboxError&) {
            // Hallucinated function names come back as observations; the
            // episode continues and the state is untouched.
            observation = "Unknown function: " + call.function.str();
        }

        StepRecord step;
        step.call = call;
        step.thought = parsed.thought;
        step.return_value = observation;
        traj.steps.push_back(std::move(step));

        messages.push_back({ChatRole::Assistant, output});
        messages.push_back({ChatRole::User, observation});
    }

    traj.reward = result.errored ? 0 : sandbox::evaluate(state, task);
    return result;
}

}  // namespace apilearn
