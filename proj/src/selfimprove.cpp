#include "apilearn/selfimprove.hpp"

#include "apilearn/splitter.hpp"
#include "apilearn/textualizer.hpp"

#include <iostream>

namespace apilearn {

ExploreOutcome self_explore(const std::vector<sandbox::TaskInstance>& train_tasks,
                            const Textualization& textualization, Backend& agent_backend,
                            const EpisodeConfig& config) {
    ExploreOutcome outcome;
    for (const sandbox::TaskInstance& task : train_tasks) {
        EpisodeResult episode = run_episode(task, textualization, agent_backend, config);
        if (episode.errored) {
            std::cerr << "self-explore: skipping task " << task.task_id << ": "
                      << episode.error_reason << "\n";
            outcome.skipped_tasks.push_back(task.task_id);
            continue;
        }
        for (Demonstration& d : extract_demonstrations(episode.trajectory)) {
            outcome.experiences.per_function[d.function].push_back(std::move(d));
        }
        outcome.experiences.trajectories.push_back(std::move(episode.trajectory));
    }
    return outcome;
}

std::optional<CritiqueFlags> parse_verdict_flags(const std::string& critique_text) {
    auto pos = critique_text.rfind("VERDICT:");
    if (pos == std::string::npos) return std::nullopt;
    std::string line = critique_text.substr(pos);
    if (auto nl = line.find('\n'); nl != std::string::npos) line = line.substr(0, nl);

    auto read_flag = [&](const std::string& key) -> std::optional<bool> {
        auto k = line.find(key + "=");
        if (k == std::string::npos) return std::nullopt;
        char v = k + key.size() + 1 < line.size() ? line[k + key.size() + 1] : '\0';
        if (v == 'y' || v == 'Y') return true;
        if (v == 'n' || v == 'N') return false;
        return std::nullopt;
    };

    auto repeated = read_flag("repeated");
    auto params = read_flag("params");
    auto position = read_flag("position");
    if (!repeated || !params || !position) return std::nullopt;
    return CritiqueFlags{*repeated, *params, *position};
}

Critique judge_call(const std::string& task_text, const Trajectory& trajectory,
                    bool overall_correct, std::size_t step_index, Backend& judge_backend,
                    const PromptAsset& asset) {
    if (step_index >= trajectory.steps.size()) {
        throw Error("judge_call: step index " + std::to_string(step_index) +
                    " out of range for trajectory " + trajectory.task_id);
    }
    validate_prompt_asset(asset);

    const StepRecord& step = trajectory.steps[step_index];
    std::string target = "Call: " + render_call(step.call);
    if (step.return_value) target += "\nReturn: " + *step.return_value;

    ChatRequest request;
    request.system = system_line(PromptRole::Judge);
    request.messages.push_back(
        {ChatRole::User,
         fill_placeholders(asset.text,
                           {{"task", task_text},
                            {"trajectory", render_trajectory(trajectory)},
                            {"overall_correct", overall_correct ? "correct" : "incorrect"},
                            {"step_index", std::to_string(step_index + 1)},
                            {"target_step", target}})});

    Critique critique;
    critique.target = {trajectory.task_id, step_index};
    critique.text = judge_backend.complete(request);
    if (trim(critique.text).empty()) {
        throw BackendError("judge returned an empty critique for " + trajectory.task_id);
    }
    critique.flags = parse_verdict_flags(critique.text);
    return critique;
}

std::vector<Critique> judge_experiences(ExperienceSet& experiences, Backend& judge_backend,
                                        const PromptAsset& asset) {
    std::vector<Critique> critiques;
    for (const Trajectory& traj : experiences.trajectories) {
        for (std::size_t i = 0; i < traj.steps.size(); ++i) {
            Critique critique;
            try {
                critique = judge_call(traj.task_text, traj, traj.reward == 1, i, judge_backend,
                                      asset);
            } catch (const BackendError& e) {
                std::cerr << "judge: no critique for " << traj.task_id << " step " << i << ": "
                          << e.what() << "\n";
                continue;  // experience kept without an evaluation
            }
            for (auto& [function, demos] : experiences.per_function) {
                for (Demonstration& d : demos) {
                    if (d.provenance.trajectory_id == traj.task_id &&
                        d.provenance.step_index == i) {
                        d.evaluation = critique.text;
                    }
                }
            }
            critiques.push_back(std::move(critique));
        }
    }
    return critiques;
}

// ---------------------------------------------------------------------------
// Experience-processing methods
// ---------------------------------------------------------------------------

namespace {

std::string render_block(const std::vector<Demonstration>& demos) {
    std::string out;
    for (const Demonstration& d : demos) {
        if (!out.empty()) out += "\n";
        out += render_demonstration(d);
    }
    return out;
}

const std::vector<Demonstration>* experiences_of(const ExperienceSet& experiences,
                                                 const FunctionName& function) {
    auto it = experiences.per_function.find(function);
    if (it == experiences.per_function.end() || it->second.empty()) return nullptr;
    return &it->second;
}

}  // namespace

Textualization de(const DemosByFunction& train_demos, const ExperienceSet& experiences,
                  std::size_t n, std::uint64_t seed) {
    Textualization t = dxd(train_demos, n, seed);
    t.method = Method::DE;
    for (auto& [function, block] : t.per_function) {
        if (const auto* exp = experiences_of(experiences, function)) {
            block += "\n" + render_block(*exp);
        }
    }
    return t;
}

Textualization ud(const Textualization& gd_textualization, const ExperienceSet& experiences,
                  Backend& updater_backend, const PromptAsset& asset) {
    if (gd_textualization.method != Method::GD) {
        throw Error("ud requires a GD textualization, got " +
                    to_string(gd_textualization.method));
    }
    validate_prompt_asset(asset);
    Textualization t = gd_textualization;
    t.method = Method::UD;
    for (auto& [function, block] : t.per_function) {
        const auto* exp = experiences_of(experiences, function);
        if (exp == nullptr) continue;  // the GD doc is used as-is

        ChatRequest request;
        request.system = system_line(PromptRole::DocUpdater);
        request.messages.push_back(
            {ChatRole::User, fill_placeholders(asset.text, {{"function_name", function.str()},
                                                            {"document", block},
                                                            {"experiences", render_block(*exp)}})});
        try {
            std::string updated = updater_backend.complete(request);
            if (trim(updated).empty()) throw BackendError("empty updated document");
            block = updated;
        } catch (const BackendError& e) {
            std::cerr << "ud: keeping GD doc for " << function.str() << ": " << e.what() << "\n";
        }
    }
    return t;
}

Textualization rd(const DemosByFunction& train_demos, const ExperienceSet& experiences,
                  std::size_t n, std::uint64_t seed, Backend& generator_backend,
                  const Textualization& gd_textualization, const PromptAsset& asset) {
    validate_prompt_asset(asset);
    Textualization t;
    t.method = Method::RD;
    t.metadata = {n, static_cast<std::int64_t>(seed)};
    for (const auto& [function, block] : gd_textualization.per_function) {
        const auto* exp = experiences_of(experiences, function);
        if (exp == nullptr) {
            t.per_function[function] = block;  // no experiences: the GD doc is used
            continue;
        }
        auto demos_it = train_demos.find(function);
        std::vector<Demonstration> inputs =
            demos_it == train_demos.end()
                ? std::vector<Demonstration>{}
                : sample_demonstrations(demos_it->second, n, seed);
        inputs.insert(inputs.end(), exp->begin(), exp->end());

        ChatRequest request;
        request.system = system_line(PromptRole::DocGenerator);
        request.messages.push_back(
            {ChatRole::User,
             generator_user_prompt(function, inputs, extract_parameters(inputs), asset)});
        try {
            std::string doc = generator_backend.complete(request);
            if (trim(doc).empty()) throw BackendError("empty regenerated document");
            t.per_function[function] = doc;
        } catch (const BackendError& e) {
            std::cerr << "rd: keeping GD doc for " << function.str() << ": " << e.what() << "\n";
            t.per_function[function] = block;
        }
    }
    return t;
}

Textualization ag(const Textualization& gd_textualization, const ExperienceSet& experiences,
                  Backend& summarizer_backend, const PromptAsset& asset,
                  const AgOptions& options) {
    if (gd_textualization.method != Method::GD) {
        throw Error("ag requires a GD textualization, got " +
                    to_string(gd_textualization.method));
    }
    validate_prompt_asset(asset);
    Textualization t = gd_textualization;
    t.method = Method::AG;
    for (auto& [function, block] : t.per_function) {
        const auto* exp = experiences_of(experiences, function);
        if (exp == nullptr) continue;  // GD doc without guidelines

        std::string rendered = render_block(*exp);
        if (rendered.size() > options.experience_char_budget) {
            // One summarizer call per function; keep the most recent
            // experiences when the block exceeds the budget.
            std::vector<Demonstration> recent;
            std::size_t total = 0;
            for (auto it = exp->rbegin(); it != exp->rend(); ++it) {
                std::string one = render_demonstration(*it);
                if (total + one.size() > options.experience_char_budget && !recent.empty()) break;
                total += one.size();
                recent.insert(recent.begin(), *it);
            }
            std::cerr << "ag: truncated experiences of " << function.str() << " from "
                      << exp->size() << " to " << recent.size() << " entries\n";
            rendered = render_block(recent);
        }

        ChatRequest request;
        request.system = system_line(PromptRole::Summarizer);
        request.messages.push_back(
            {ChatRole::User, fill_placeholders(asset.text, {{"function_name", function.str()},
                                                            {"experiences", rendered}})});
        try {
            std::string guideline = summarizer_backend.complete(request);
            if (trim(guideline).empty()) throw BackendError("empty guideline");
            block += "\n\nGuidelines:\n" + guideline;
        } catch (const BackendError& e) {
            std::cerr << "ag: no guidelines for " << function.str() << ": " << e.what() << "\n";
        }
    }
    return t;
}

Textualization inject_guideline(const Textualization& textualization,
                                const FunctionName& function, const std::string& text) {
    auto it = textualization.per_function.find(function);
    if (it == textualization.per_function.end()) {
        throw Error("inject_guideline: function not in textualization: " + function.str());
    }
    Textualization t = textualization;
    t.per_function[function] += "\n" + text;
    return t;
}

}  // namespace apilearn
