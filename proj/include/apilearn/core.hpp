#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "apilearn/util.hpp"

namespace apilearn {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Domain data model: demonstrations, trajectories, critiques, guidelines,
// textualizations. All types are immutable values after construction and safe
// to copy between workers.
// ---------------------------------------------------------------------------

// Dot-qualified function identifier, e.g. "email.reply_email".
class FunctionName {
public:
    FunctionName() = default;
    explicit FunctionName(std::string value);

    const std::string& str() const { return value_; }
    bool empty() const { return value_.empty(); }

    static bool is_valid(std::string_view value);

    auto operator<=>(const FunctionName&) const = default;

private:
    std::string value_;
};

// Scalar parameter value. Nested objects/arrays are rejected at parse time.
using ParamValue = std::variant<std::nullptr_t, bool, std::int64_t, double, std::string>;

json param_value_to_json(const ParamValue& v);
ParamValue param_value_from_json(const json& j);  // throws Error on nested values
std::string render_param_value(const ParamValue& v);

struct ToolCall {
    FunctionName function;
    // std::map keeps parameter names unique and serialization sorted by name.
    std::map<std::string, ParamValue> parameters;

    bool operator==(const ToolCall&) const = default;
};

// "fn(a=1, b="x")" with parameters in name order.
std::string render_call(const ToolCall& call);

struct StepRecord {
    ToolCall call;
    std::optional<std::string> thought;
    std::optional<std::string> return_value;  // present iff executed in an environment

    bool operator==(const StepRecord&) const = default;
};

enum class TrajectorySource { Expert, Agent };
enum class DemoSource { Expert, Experience };

std::string to_string(TrajectorySource s);
TrajectorySource trajectory_source_from_string(std::string_view s);
std::string to_string(DemoSource s);
DemoSource demo_source_from_string(std::string_view s);

struct Trajectory {
    std::string task_id;
    std::string task_text;
    std::vector<StepRecord> steps;
    int reward = 0;  // 0 or 1
    TrajectorySource source = TrajectorySource::Expert;
    std::int64_t seed = 0;

    bool operator==(const Trajectory&) const = default;
};

struct Provenance {
    std::string trajectory_id;
    std::size_t step_index = 0;

    bool operator==(const Provenance&) const = default;
};

// A single contextualized use of a function: the task, the calls that came
// before, the call itself, and optionally thought / return / evaluation.
struct Demonstration {
    FunctionName function;
    std::string task_text;
    std::vector<ToolCall> previous_steps;
    ToolCall call;
    std::optional<std::string> thought;
    std::optional<std::string> return_value;
    std::optional<std::string> evaluation;  // never present for expert demos
    DemoSource source = DemoSource::Expert;
    Provenance provenance;

    bool operator==(const Demonstration&) const = default;
};

struct CritiqueFlags {
    bool repeated_call = false;
    bool parameters_ok = false;
    bool position_ok = false;

    bool operator==(const CritiqueFlags&) const = default;
};

struct Critique {
    Provenance target;
    std::string text;
    std::optional<CritiqueFlags> flags;

    bool operator==(const Critique&) const = default;
};

struct Guideline {
    FunctionName function;
    std::string text;

    bool operator==(const Guideline&) const = default;
};

enum class Method { DxD, GD, GDwC, OD, DE, UD, RD, AG };

std::string to_string(Method m);
Method method_from_string(std::string_view s);

struct TextualizationMeta {
    std::size_t n = 0;
    std::int64_t seed = 0;

    bool operator==(const TextualizationMeta&) const = default;
};

// Per-function text conveying functionality, produced by one of the
// processing methods.
struct Textualization {
    Method method = Method::OD;
    std::map<FunctionName, std::string> per_function;
    TextualizationMeta metadata;

    bool operator==(const Textualization&) const = default;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// One demonstration per step, in order; demonstration i carries the calls of
// steps 0..i-1 as its previous steps. Expert trajectories should only be fed
// in when they succeeded (reward 1); the caller enforces that.
std::vector<Demonstration> extract_demonstrations(const Trajectory& trajectory);

// Deterministic rendering with fixed section order. Absent optional sections
// are omitted entirely.
std::string render_demonstration(const Demonstration& d);

std::string render_trajectory(const Trajectory& t);

std::map<FunctionName, std::vector<Demonstration>>
group_by_function(const std::vector<Demonstration>& demos);

using DemosByFunction = std::map<FunctionName, std::vector<Demonstration>>;

// ---------------------------------------------------------------------------
// JSON serialization (JSONL persistence lives in jsonl.hpp)
// ---------------------------------------------------------------------------

void to_json(json& j, const ToolCall& c);
void from_json(const json& j, ToolCall& c);
void to_json(json& j, const StepRecord& s);
void from_json(const json& j, StepRecord& s);
void to_json(json& j, const Trajectory& t);
void from_json(const json& j, Trajectory& t);
void to_json(json& j, const Demonstration& d);
void from_json(const json& j, Demonstration& d);
void to_json(json& j, const Critique& c);
void from_json(const json& j, Critique& c);
void to_json(json& j, const Guideline& g);
void from_json(const json& j, Guideline& g);

}  // namespace apilearn
