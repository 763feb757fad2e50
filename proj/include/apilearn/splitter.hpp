#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "apilearn/core.hpp"

namespace apilearn {

// Leakage-free train-test splitting of tasks and demonstrations, plus nested
// sampling of N demonstrations per function.
//
// A demonstration's task key is its provenance trajectory id; expert
// trajectories are generated one per task, so trajectory ids are task ids.

struct SplitResult {
    std::set<std::string> train_tasks;
    std::set<std::string> test_tasks;
    DemosByFunction train_demos;
    DemosByFunction test_demos;
    // Test tasks that use a function with no training demonstrations at all.
    // The split never drops them; exclusion policy belongs to the harness.
    std::vector<std::string> uncovered_test_tasks;
};

// Iterates functions in sorted name order. Demos whose task is already
// assigned follow it; each function's remaining distinct tasks (first-seen
// order) are shuffled with a fresh SplitMix64(seed) and the first
// floor(count * test_fraction) become test tasks.
SplitResult train_test_split(const DemosByFunction& demos_by_function,
                             double test_fraction, std::uint64_t seed);

// Shuffles demos_f once with SplitMix64(seed ^ fnv1a64(function name)) and
// returns the first min(n, |demos_f|). sample(n) is therefore always a prefix
// of sample(n + k).
std::vector<Demonstration> sample_demonstrations(const std::vector<Demonstration>& demos_f,
                                                 std::size_t n, std::uint64_t seed);

std::string task_id_of(const Demonstration& d);  // throws on empty id

json split_report(const SplitResult& split);

// Canonical serialization for determinism checks.
json to_json_split(const SplitResult& split);

}  // namespace apilearn
