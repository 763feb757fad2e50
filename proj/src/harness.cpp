#include "apilearn/harness.hpp"

#include "apilearn/jsonl.hpp"
#include "apilearn/selfimprove.hpp"
#include "apilearn/textualizer.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>

namespace apilearn {

Trajectory replay_canonical(const sandbox::TaskInstance& task) {
    Trajectory t;
    t.task_id = task.task_id;
    t.task_text = task.text;
    t.source = TrajectorySource::Expert;
    t.seed = static_cast<std::int64_t>(task.seed);
    sandbox::SandboxState state = task.initial_state;
    for (const ToolCall& call : task.canonical_calls) {
        sandbox::ExecResult exec = sandbox::execute(state, call);
        StepRecord step;
        step.call = call;
        step.return_value = exec.observation;
        t.steps.push_back(std::move(step));
        state = std::move(exec.state);
    }
    t.reward = sandbox::evaluate(state, task);
    return t;
}

std::vector<Trajectory> generate_expert_trajectories(
    const std::vector<sandbox::TaskInstance>& tasks) {
    std::vector<Trajectory> out;
    out.reserve(tasks.size());
    for (const sandbox::TaskInstance& task : tasks) out.push_back(replay_canonical(task));
    return out;
}

std::vector<Demonstration> expert_demonstrations(const std::vector<Trajectory>& trajectories) {
    std::vector<Demonstration> demos;
    for (const Trajectory& t : trajectories) {
        if (t.reward != 1) continue;
        for (Demonstration& d : extract_demonstrations(t)) demos.push_back(std::move(d));
    }
    return demos;
}

std::map<FunctionName, std::size_t> demo_census(const std::vector<Demonstration>& demos) {
    std::map<FunctionName, std::size_t> counts;
    for (const Demonstration& d : demos) ++counts[d.function];
    return counts;
}

// ---------------------------------------------------------------------------
// OracleBackend
// ---------------------------------------------------------------------------

OracleBackend::OracleBackend(const std::vector<sandbox::TaskInstance>& tasks) {
    for (const sandbox::TaskInstance& t : tasks) calls_by_task_text_[t.text] = t.canonical_calls;
}

std::string OracleBackend::complete(const ChatRequest& request) {
    ++calls_;
    if (request.messages.empty()) throw BackendError("oracle backend: empty request");
    auto it = calls_by_task_text_.find(request.messages.front().content);
    if (it == calls_by_task_text_.end()) {
        throw BackendError("oracle backend: unknown task text: \"" +
                           request.messages.front().content + "\"");
    }
    std::size_t observations = 0;
    for (std::size_t i = 1; i < request.messages.size(); ++i) {
        if (request.messages[i].role == ChatRole::User) ++observations;
    }
    if (observations < it->second.size()) {
        return json(it->second[observations]).dump();
    }
    return R"({"function": "finish"})";
}

// ---------------------------------------------------------------------------
// Backend factory
// ---------------------------------------------------------------------------

std::shared_ptr<Backend> make_backend(const BackendSpec& spec,
                                      const std::vector<sandbox::TaskInstance>& tasks) {
    if (spec.kind == "scripted") {
        return std::make_shared<ScriptedBackend>(load_script_rules(spec.script_path));
    }
    if (spec.kind == "oracle") {
        return std::make_shared<OracleBackend>(tasks);
    }
    if (spec.kind == "replay") {
        return std::make_shared<ReplayBackend>(spec.store_path);
    }
    if (spec.kind == "live") {
        LiveBackendConfig config;
        config.base_url = spec.base_url;
        config.model = spec.model;
        config.temperature = spec.temperature;
        config.timeout_seconds = spec.timeout_seconds;
        config.max_retries = spec.max_retries;
        if (const char* key = std::getenv(spec.api_key_env.c_str())) config.api_key = key;
        std::shared_ptr<Backend> live = std::make_shared<LiveBackend>(config);
        if (!spec.store_path.empty()) {
            return std::make_shared<RecordingBackend>(live, spec.store_path);
        }
        return live;
    }
    throw Error("unknown backend kind: '" + spec.kind + "'");
}

// ---------------------------------------------------------------------------
// Config validation
// ---------------------------------------------------------------------------

namespace {

struct MethodSlot {
    std::string tag;     // as configured, e.g. "GD+AG"
    std::string base;    // pre-exploration method for I' tags, else the method
    std::string update;  // empty for plain methods
    bool needs_n = false;
};

MethodSlot parse_method_tag(const std::string& tag) {
    MethodSlot slot;
    slot.tag = tag;
    auto plus = tag.find('+');
    if (plus == std::string::npos) {
        Method m = method_from_string(tag);
        if (m == Method::DE || m == Method::UD || m == Method::RD || m == Method::AG) {
            throw Error("method '" + tag + "' needs a pre-exploration base, e.g. 'DxD+" + tag +
                        "'");
        }
        slot.base = tag;
        slot.needs_n = m != Method::OD;
        return slot;
    }
    slot.base = tag.substr(0, plus);
    slot.update = tag.substr(plus + 1);
    Method base = method_from_string(slot.base);
    Method update = method_from_string(slot.update);
    if (base != Method::DxD && base != Method::GD) {
        throw Error("pre-exploration method must be DxD or GD in '" + tag + "'");
    }
    if (update != Method::DE && update != Method::UD && update != Method::RD &&
        update != Method::AG) {
        throw Error("post-exploration method must be DE, UD, RD, or AG in '" + tag + "'");
    }
    return slot;
}

bool needs_generator(const MethodSlot& slot) {
    if (slot.base == "GD" || slot.base == "GDwC") return true;
    // UD/RD/AG update generated docs even when exploration used DxD.
    return slot.update == "UD" || slot.update == "RD" || slot.update == "AG";
}

}  // namespace

std::vector<std::string> validate_config(const ExperimentConfig& config) {
    std::vector<std::string> errors;
    if (config.environment_id != "office" && config.environment_id != "retail") {
        errors.push_back("unknown environment: '" + config.environment_id + "'");
    }
    if (config.task_count < 1) errors.push_back("task_count must be >= 1");
    if (config.seeds.empty()) errors.push_back("seeds must be non-empty");
    if (config.methods.empty()) errors.push_back("methods must be non-empty");
    if (config.test_fraction < 0.0 || config.test_fraction > 1.0) {
        errors.push_back("test_fraction must be in [0, 1]");
    }
    if (config.episode.max_steps < 1) errors.push_back("episode.max_steps must be >= 1");

    bool any_needs_n = false;
    bool any_explore = false;
    bool any_generator = false;
    for (const std::string& tag : config.methods) {
        try {
            MethodSlot slot = parse_method_tag(tag);
            any_needs_n |= slot.needs_n;
            any_explore |= !slot.update.empty();
            any_generator |= needs_generator(slot);
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }
    if (any_needs_n && config.ns.empty()) {
        errors.push_back("ns must be non-empty for demonstration-based methods");
    }
    if (any_explore && config.explore_n < 1) errors.push_back("explore_n must be >= 1");

    auto check_backend = [&](const std::string& role, bool required) {
        auto it = config.backends.find(role);
        if (it == config.backends.end()) {
            if (required) errors.push_back("missing backend binding for role '" + role + "'");
            return;
        }
        const BackendSpec& spec = it->second;
        if (spec.kind == "scripted" && spec.script_path.empty()) {
            errors.push_back("backend '" + role + "': scripted kind needs script_path");
        } else if (spec.kind == "replay" && spec.store_path.empty()) {
            errors.push_back("backend '" + role + "': replay kind needs store_path");
        } else if (spec.kind == "live") {
            if (spec.base_url.empty()) {
                errors.push_back("backend '" + role + "': live kind needs base_url");
            }
            if (std::getenv(spec.api_key_env.c_str()) == nullptr) {
                errors.push_back("backend '" + role + "': API key environment variable '" +
                                 spec.api_key_env + "' is not set");
            }
        } else if (spec.kind != "scripted" && spec.kind != "replay" && spec.kind != "live" &&
                   spec.kind != "oracle") {
            errors.push_back("backend '" + role + "': unknown kind '" + spec.kind + "'");
        }
    };
    check_backend("agent", true);
    check_backend("generator", any_generator);
    check_backend("judge", any_explore);
    check_backend("summarizer", any_explore);

    return errors;
}

// ---------------------------------------------------------------------------
// filter_tasks
// ---------------------------------------------------------------------------

std::pair<std::vector<sandbox::TaskInstance>, std::vector<sandbox::TaskInstance>> filter_tasks(
    const std::vector<sandbox::TaskInstance>& tasks, const DemosByFunction& train_demos,
    std::size_t threshold) {
    std::vector<sandbox::TaskInstance> kept;
    std::vector<sandbox::TaskInstance> dropped;
    for (const sandbox::TaskInstance& task : tasks) {
        bool keep = true;
        for (const ToolCall& call : task.canonical_calls) {
            auto it = train_demos.find(call.function);
            std::size_t count = it == train_demos.end() ? 0 : it->second.size();
            if (count < threshold) {
                keep = false;
                break;
            }
        }
        (keep ? kept : dropped).push_back(task);
    }
    return {std::move(kept), std::move(dropped)};
}

// ---------------------------------------------------------------------------
// run_experiment
// ---------------------------------------------------------------------------

namespace {

struct SeedData {
    std::vector<sandbox::TaskInstance> tasks;
    std::vector<Demonstration> demos;
    SplitResult split;
    std::vector<sandbox::TaskInstance> train_tasks;
    std::vector<sandbox::TaskInstance> test_tasks;
};

SeedData prepare_seed(const ExperimentConfig& config, std::uint64_t seed,
                      const std::string& artifacts_dir) {
    SeedData data;
    data.tasks = sandbox::generate_tasks(config.environment_id, config.task_count, seed);
    std::vector<Trajectory> expert = generate_expert_trajectories(data.tasks);
    data.demos = expert_demonstrations(expert);
    data.split = train_test_split(group_by_function(data.demos), config.test_fraction, seed);
    for (const sandbox::TaskInstance& task : data.tasks) {
        if (data.split.train_tasks.count(task.task_id)) data.train_tasks.push_back(task);
        if (data.split.test_tasks.count(task.task_id)) data.test_tasks.push_back(task);
    }

    if (!artifacts_dir.empty()) {
        std::filesystem::path dir =
            std::filesystem::path(artifacts_dir) / ("seed-" + std::to_string(seed));
        save_jsonl(expert, dir / "demos" / "expert_trajectories.jsonl");
        save_jsonl(data.demos, dir / "demos" / "expert_demos.jsonl");
        std::vector<Demonstration> train_flat;
        std::vector<Demonstration> test_flat;
        for (const auto& [_, ds] : data.split.train_demos) {
            train_flat.insert(train_flat.end(), ds.begin(), ds.end());
        }
        for (const auto& [_, ds] : data.split.test_demos) {
            test_flat.insert(test_flat.end(), ds.begin(), ds.end());
        }
        save_jsonl(train_flat, dir / "splits" / "train.jsonl");
        save_jsonl(test_flat, dir / "splits" / "test.jsonl");
        write_file(dir / "splits" / "split_report.json", split_report(data.split).dump(2) + "\n");
    }
    return data;
}

double mean(const std::vector<double>& values) {
    double total = 0.0;
    for (double v : values) total += v;
    return values.empty() ? 0.0 : total / static_cast<double>(values.size());
}

std::string format_pct(double fraction_pct) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction_pct);
    return std::string(buf);
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config,
                                const std::string& artifacts_dir) {
    std::vector<std::string> errors = validate_config(config);
    if (!errors.empty()) {
        throw Error("invalid experiment config:\n  " + join(errors, "\n  "));
    }

    ExperimentOutput output;
    json row_manifest = json::array();

    for (std::uint64_t seed : config.seeds) {
        SeedData data = prepare_seed(config, seed, artifacts_dir);

        for (const std::string& tag : config.methods) {
            MethodSlot slot = parse_method_tag(tag);
            std::vector<std::size_t> slot_ns =
                slot.needs_n ? config.ns : std::vector<std::size_t>{0};
            if (!slot.update.empty()) slot_ns = {config.explore_n};

            for (std::size_t n : slot_ns) {
                try {
                    std::size_t threshold = config.demo_threshold.value_or(
                        !slot.update.empty()
                            ? config.explore_n
                            : *std::max_element(config.ns.begin(), config.ns.end()));

                    auto backend_for = [&](const std::string& role) {
                        auto it = config.backends.find(role);
                        if (it == config.backends.end()) {
                            throw Error("no backend bound for role '" + role + "'");
                        }
                        return make_backend(it->second, data.tasks);
                    };

                    EpisodeConfig episode = config.episode;
                    episode.seed = static_cast<std::int64_t>(seed);

                    // Build the textualization for this row.
                    Textualization textualization;
                    ExperienceSet experiences;
                    std::vector<Critique> critiques;
                    std::shared_ptr<Backend> generator;
                    if (needs_generator(slot)) generator = backend_for("generator");

                    if (slot.update.empty()) {
                        if (slot.base == "DxD") {
                            textualization = dxd(data.split.train_demos, n, seed);
                        } else if (slot.base == "GD") {
                            textualization = gd(data.split.train_demos, n, seed, *generator);
                        } else if (slot.base == "GDwC") {
                            textualization = gdwc(data.split.train_demos, n, seed, *generator);
                        } else {
                            textualization = od(config.environment_id);
                        }
                    } else {
                        std::size_t base_n = config.explore_n;
                        Textualization gd_t;
                        Textualization base_t;
                        if (slot.base == "GD") {
                            gd_t = gd(data.split.train_demos, base_n, seed, *generator);
                            base_t = gd_t;
                        } else {
                            base_t = dxd(data.split.train_demos, base_n, seed);
                            if (slot.update != "DE") {
                                gd_t = gd(data.split.train_demos, base_n, seed, *generator);
                            }
                        }

                        auto [explore_kept, explore_dropped] =
                            filter_tasks(data.train_tasks, data.split.train_demos, threshold);
                        std::shared_ptr<Backend> explorer = backend_for("agent");
                        ExploreOutcome explored =
                            self_explore(explore_kept, base_t, *explorer, episode);
                        experiences = std::move(explored.experiences);

                        std::shared_ptr<Backend> judge = backend_for("judge");
                        critiques = judge_experiences(experiences, *judge);

                        if (slot.update == "DE") {
                            textualization = de(data.split.train_demos, experiences, base_n, seed);
                        } else if (slot.update == "UD") {
                            std::shared_ptr<Backend> updater = backend_for("generator");
                            textualization = ud(gd_t, experiences, *updater);
                        } else if (slot.update == "RD") {
                            textualization = rd(data.split.train_demos, experiences, base_n, seed,
                                                *generator, gd_t);
                        } else {
                            std::shared_ptr<Backend> summarizer = backend_for("summarizer");
                            textualization = ag(gd_t, experiences, *summarizer);
                        }
                    }

                    auto [kept, droppedCount] =
                        filter_tasks(data.test_tasks, data.split.train_demos, threshold);

                    // No test-set leakage, ever.
                    for (const sandbox::TaskInstance& task : kept) {
                        if (data.split.train_tasks.count(task.task_id)) {
                            throw Error("leakage: evaluated task " + task.task_id +
                                        " is in the train set");
                        }
                    }

                    std::shared_ptr<Backend> agent_backend = backend_for("agent");
                    std::size_t successes = 0;
                    std::size_t errored = 0;
                    std::vector<Trajectory> test_trajectories;
                    for (const sandbox::TaskInstance& task : kept) {
                        EpisodeResult episode_result =
                            run_episode(task, textualization, *agent_backend, episode);
                        if (episode_result.errored) {
                            std::cerr << "episode error on " << task.task_id << ": "
                                      << episode_result.error_reason << "\n";
                            ++errored;
                            continue;
                        }
                        successes += static_cast<std::size_t>(episode_result.trajectory.reward);
                        test_trajectories.push_back(std::move(episode_result.trajectory));
                    }

                    ResultRow row;
                    row.method = tag;
                    row.n = n;
                    row.seed = seed;
                    row.tasks_evaluated = kept.size() - errored;
                    row.successes = successes;
                    row.success_rate = row.tasks_evaluated == 0
                                           ? 0.0
                                           : static_cast<double>(successes) /
                                                 static_cast<double>(row.tasks_evaluated);
                    row.errored_tasks = errored;
                    output.rows.push_back(row);

                    row_manifest.push_back(
                        json{{"method", tag},
                             {"n", n},
                             {"seed", seed},
                             {"textualization_digest", textualization_digest(textualization)},
                             {"threshold", threshold},
                             {"test_tasks_kept", kept.size()},
                             {"test_tasks_dropped", droppedCount.size()}});

                    if (!artifacts_dir.empty()) {
                        std::filesystem::path dir = std::filesystem::path(artifacts_dir) /
                                                    ("seed-" + std::to_string(seed));
                        std::string label = tag + "-N" + std::to_string(n);
                        save_textualization(textualization, dir / "textualizations" / label,
                                            "offline");
                        save_jsonl(test_trajectories, dir / "trajectories" / (label + ".jsonl"));
                        if (!slot.update.empty()) {
                            std::vector<Demonstration> flat;
                            for (const auto& [_, ds] : experiences.per_function) {
                                flat.insert(flat.end(), ds.begin(), ds.end());
                            }
                            save_jsonl(flat, dir / "experiences" / (label + ".jsonl"));
                            save_jsonl(critiques, dir / "critiques" / (label + ".jsonl"));
                        }
                    }
                } catch (const std::exception& e) {
                    output.failures.push_back(RowFailure{tag, n, seed, e.what()});
                    std::cerr << "row failed (method=" << tag << " n=" << n << " seed=" << seed
                              << "): " << e.what() << "\n";
                }
            }
        }
    }

    output.manifest = json{{"environment_id", config.environment_id},
                           {"task_count", config.task_count},
                           {"methods", config.methods},
                           {"ns", config.ns},
                           {"seeds", config.seeds},
                           {"test_fraction", config.test_fraction},
                           {"explore_n", config.explore_n},
                           {"deterministic", config.deterministic},
                           {"rows", row_manifest}};
    return output;
}

// ---------------------------------------------------------------------------
// Aggregation and reports
// ---------------------------------------------------------------------------

void to_json(json& j, const ResultRow& r) {
    j = json{{"method", r.method},
             {"n", r.n},
             {"seed", r.seed},
             {"tasks_evaluated", r.tasks_evaluated},
             {"successes", r.successes},
             {"success_rate", r.success_rate},
             {"errored_tasks", r.errored_tasks}};
}

void from_json(const json& j, ResultRow& r) {
    r.method = j.at("method").get<std::string>();
    r.n = j.at("n").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.tasks_evaluated = j.at("tasks_evaluated").get<std::size_t>();
    r.successes = j.at("successes").get<std::size_t>();
    r.success_rate = j.at("success_rate").get<double>();
    r.errored_tasks = j.at("errored_tasks").get<std::size_t>();
}

std::vector<SummaryEntry> aggregate(const std::vector<ResultRow>& rows) {
    std::map<std::pair<std::string, std::size_t>, std::vector<const ResultRow*>> groups;
    for (const ResultRow& row : rows) groups[{row.method, row.n}].push_back(&row);

    std::vector<SummaryEntry> entries;
    for (const auto& [key, group_rows] : groups) {
        std::vector<double> rates;
        std::vector<double> tasks;
        for (const ResultRow* row : group_rows) {
            if (row->tasks_evaluated == 0) continue;
            rates.push_back(row->success_rate * 100.0);
            tasks.push_back(static_cast<double>(row->tasks_evaluated));
        }
        if (rates.empty()) {
            std::cerr << "aggregate: omitting group (method=" << key.first << " n=" << key.second
                      << "): no rows with evaluated tasks\n";
            continue;
        }
        SummaryEntry entry;
        entry.method = key.first;
        entry.n = key.second;
        entry.seeds = rates.size();
        entry.mean_success_rate_pct = mean(rates);
        entry.mean_tasks_evaluated = mean(tasks);
        entries.push_back(entry);
    }
    return entries;
}

std::string summary_csv(const std::vector<SummaryEntry>& entries) {
    std::string out = "method,n,seeds,mean_success_rate_pct,mean_tasks_evaluated\n";
    for (const SummaryEntry& e : entries) {
        out += e.method + "," + std::to_string(e.n) + "," + std::to_string(e.seeds) + "," +
               format_pct(e.mean_success_rate_pct) + "," + format_pct(e.mean_tasks_evaluated) +
               "\n";
    }
    return out;
}

std::string summary_md(const std::vector<SummaryEntry>& entries) {
    std::vector<std::size_t> ns;
    std::vector<std::string> methods;
    for (const SummaryEntry& e : entries) {
        if (std::find(ns.begin(), ns.end(), e.n) == ns.end()) ns.push_back(e.n);
        if (std::find(methods.begin(), methods.end(), e.method) == methods.end()) {
            methods.push_back(e.method);
        }
    }
    std::sort(ns.begin(), ns.end());

    auto cell = [&](const std::string& method, std::size_t n) -> std::string {
        for (const SummaryEntry& e : entries) {
            if (e.method == method && e.n == n) return format_pct(e.mean_success_rate_pct);
        }
        return "";
    };

    std::string out = "| Method |";
    for (std::size_t n : ns) out += n == 0 ? " n/a |" : " N=" + std::to_string(n) + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < ns.size(); ++i) out += "---|";
    out += "\n";
    for (const std::string& method : methods) {
        out += "| " + method + " |";
        for (std::size_t n : ns) out += " " + cell(method, n) + " |";
        out += "\n";
    }

    out += "\nMean success rate (%) across seeds.\n\nTasks evaluated (mean):\n";
    for (const SummaryEntry& e : entries) {
        out += "- " + e.method + (e.n == 0 ? "" : " N=" + std::to_string(e.n)) + ": " +
               format_pct(e.mean_tasks_evaluated) + " tasks over " + std::to_string(e.seeds) +
               " seed(s)\n";
    }
    return out;
}

}  // namespace apilearn
