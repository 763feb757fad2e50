#include "apilearn/splitter.hpp"

#include "apilearn/rng.hpp"

#include <algorithm>
#include <cmath>

namespace apilearn {

std::string task_id_of(const Demonstration& d) {
    if (d.provenance.trajectory_id.empty()) {
        throw Error("demonstration of " + d.function.str() +
                    " has an empty task id (provenance.trajectory_id)");
    }
    return d.provenance.trajectory_id;
}

SplitResult train_test_split(const DemosByFunction& demos_by_function,
                             double test_fraction, std::uint64_t seed) {
    if (test_fraction < 0.0 || test_fraction > 1.0) {
        throw Error("test_fraction must be in [0, 1]");
    }

    SplitResult result;

    // std::map iterates function names in sorted order.
    for (const auto& [function, demos] : demos_by_function) {
        // Tasks of this function not yet assigned, in first-seen order.
        std::vector<std::string> remaining;
        std::set<std::string> remaining_seen;
        for (const Demonstration& d : demos) {
            std::string task = task_id_of(d);
            if (result.train_tasks.count(task) || result.test_tasks.count(task)) {
                continue;
            }
            if (remaining_seen.insert(task).second) {
                remaining.push_back(task);
            }
        }

        // Fresh generator per function, reseeded from the split seed.
        SplitMix64 rng(seed);
        rng.shuffle(remaining);
        auto num_test = static_cast<std::size_t>(
            std::floor(static_cast<double>(remaining.size()) * test_fraction));
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            if (i < num_test) {
                result.test_tasks.insert(remaining[i]);
            } else {
                result.train_tasks.insert(remaining[i]);
            }
        }

        for (const Demonstration& d : demos) {
            std::string task = task_id_of(d);
            if (result.train_tasks.count(task)) {
                result.train_demos[function].push_back(d);
            } else {
                result.test_demos[function].push_back(d);
            }
        }
    }

    // Diagnostic: test tasks using a function with zero training demos.
    std::map<std::string, std::set<FunctionName>> functions_by_task;
    for (const auto& [function, demos] : demos_by_function) {
        for (const Demonstration& d : demos) {
            functions_by_task[task_id_of(d)].insert(function);
        }
    }
    for (const std::string& task : result.test_tasks) {
        for (const FunctionName& fn : functions_by_task[task]) {
            auto it = result.train_demos.find(fn);
            if (it == result.train_demos.end() || it->second.empty()) {
                result.uncovered_test_tasks.push_back(task);
                break;
            }
        }
    }
    std::sort(result.uncovered_test_tasks.begin(), result.uncovered_test_tasks.end());

    return result;
}

std::vector<Demonstration> sample_demonstrations(const std::vector<Demonstration>& demos_f,
                                                 std::size_t n, std::uint64_t seed) {
    if (demos_f.empty()) return {};
    std::vector<Demonstration> shuffled = demos_f;
    SplitMix64 rng(seed ^ fnv1a64(demos_f.front().function.str()));
    rng.shuffle(shuffled);
    shuffled.resize(std::min(n, shuffled.size()));
    return shuffled;
}

json split_report(const SplitResult& split) {
    json per_function = json::object();
    std::set<FunctionName> functions;
    for (const auto& [fn, _] : split.train_demos) functions.insert(fn);
    for (const auto& [fn, _] : split.test_demos) functions.insert(fn);
    for (const FunctionName& fn : functions) {
        auto count = [&](const DemosByFunction& m) -> std::size_t {
            auto it = m.find(fn);
            return it == m.end() ? 0 : it->second.size();
        };
        per_function[fn.str()] = json{{"train", count(split.train_demos)},
                                      {"test", count(split.test_demos)}};
    }
    return json{{"train_tasks", split.train_tasks},
                {"test_tasks", split.test_tasks},
                {"uncovered_test_tasks", split.uncovered_test_tasks},
                {"demos_per_function", per_function}};
}

json to_json_split(const SplitResult& split) {
    auto demos_json = [](const DemosByFunction& m) {
        json out = json::object();
        for (const auto& [fn, demos] : m) out[fn.str()] = demos;
        return out;
    };
    return json{{"train_tasks", split.train_tasks},
                {"test_tasks", split.test_tasks},
                {"train_demos", demos_json(split.train_demos)},
                {"test_demos", demos_json(split.test_demos)},
                {"uncovered_test_tasks", split.uncovered_test_tasks}};
}

}  // namespace apilearn
