#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apilearn/agent.hpp"
#include "apilearn/backend.hpp"
#include "apilearn/core.hpp"
#include "apilearn/sandbox.hpp"
#include "apilearn/splitter.hpp"

namespace apilearn {

// Experiment orchestration: task generation, expert demo extraction,
// splitting, textualization building, task filtering, seeded episode loops,
// and success-rate aggregation.

// Replays the in-repo expert: executes the task's canonical calls and scores
// the outcome.
Trajectory replay_canonical(const sandbox::TaskInstance& task);

std::vector<Trajectory> generate_expert_trajectories(
    const std::vector<sandbox::TaskInstance>& tasks);

// Expert demos come only from reward-1 trajectories.
std::vector<Demonstration> expert_demonstrations(const std::vector<Trajectory>& trajectories);

std::map<FunctionName, std::size_t> demo_census(const std::vector<Demonstration>& demos);

// Speaks the agent protocol and answers every task with its canonical calls,
// then finish. Requires untruncated histories (it counts observations).
class OracleBackend : public Backend {
public:
    explicit OracleBackend(const std::vector<sandbox::TaskInstance>& tasks);
    std::string complete(const ChatRequest& request) override;
    std::string name() const override { return "oracle"; }

private:
    std::map<std::string, std::vector<ToolCall>> calls_by_task_text_;
};

struct BackendSpec {
    std::string kind;  // "scripted" | "live" | "replay" | "oracle"
    std::string script_path;
    std::string store_path;       // replay source, or live recording target
    std::string base_url;
    std::string model = "default";
    std::string api_key_env = "OPENAI_API_KEY";
    double temperature = 0.0;
    int timeout_seconds = 120;
    int max_retries = 3;
};

std::shared_ptr<Backend> make_backend(const BackendSpec& spec,
                                      const std::vector<sandbox::TaskInstance>& tasks);

struct ExperimentConfig {
    std::string environment_id = "office";
    std::size_t task_count = 30;
    std::vector<std::string> methods;  // "DxD", "GD", "GDwC", "OD", or "DxD+DE" etc.
    std::vector<std::size_t> ns;       // demo counts for the pre-exploration methods
    std::vector<std::uint64_t> seeds;
    double test_fraction = 0.3;
    std::optional<std::size_t> demo_threshold;  // default: max(ns), explore_n for I' methods
    std::size_t explore_n = 5;  // fixed pre-exploration demo count for the I' methods
    EpisodeConfig episode;
    std::map<std::string, BackendSpec> backends;  // agent, generator, judge, summarizer
    bool deterministic = false;
    std::string prompts_dir;
};

// All validation problems at once; empty means valid.
std::vector<std::string> validate_config(const ExperimentConfig& config);

struct ResultRow {
    std::string method;
    std::size_t n = 0;  // 0 for methods without an N slot (OD)
    std::uint64_t seed = 0;
    std::size_t tasks_evaluated = 0;
    std::size_t successes = 0;
    double success_rate = 0.0;
    std::size_t errored_tasks = 0;
};

void to_json(json& j, const ResultRow& r);
void from_json(const json& j, ResultRow& r);

struct RowFailure {
    std::string method;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string reason;
};

struct ExperimentOutput {
    std::vector<ResultRow> rows;
    std::vector<RowFailure> failures;
    json manifest;  // resolved config + textualization digests per row
};

// A task is dropped iff any function in its canonical calls has fewer than
// `threshold` training demonstrations.
std::pair<std::vector<sandbox::TaskInstance>, std::vector<sandbox::TaskInstance>> filter_tasks(
    const std::vector<sandbox::TaskInstance>& tasks, const DemosByFunction& train_demos,
    std::size_t threshold);

// Runs every (method, n-slot, seed) combination. When artifacts_dir is
// non-empty, per-seed inputs (demos, splits, textualizations, experiences,
// critiques) are written beneath it.
ExperimentOutput run_experiment(const ExperimentConfig& config,
                                const std::string& artifacts_dir = "");

struct SummaryEntry {
    std::string method;
    std::size_t n = 0;
    std::size_t seeds = 0;
    double mean_success_rate_pct = 0.0;
    double mean_tasks_evaluated = 0.0;
};

// Mean success rate (percent) per (method, n) across seeds. Groups whose rows
// all evaluated zero tasks are omitted with a warning on stderr.
std::vector<SummaryEntry> aggregate(const std::vector<ResultRow>& rows);

std::string summary_csv(const std::vector<SummaryEntry>& entries);
std::string summary_md(const std::vector<SummaryEntry>& entries);

}  // namespace apilearn
