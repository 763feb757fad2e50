#include "apilearn/core.hpp"

#include "apilearn/rng.hpp"

#include <cstdio>

namespace apilearn {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// FunctionName
// ---------------------------------------------------------------------------

bool FunctionName::is_valid(std::string_view value) {
    if (value.empty()) return false;
    // [a-z0-9_]+(\.[a-z0-9_]+)*
    bool segment_has_char = false;
    for (char c : value) {
        if (c == '.') {
            if (!segment_has_char) return false;
            segment_has_char = false;
        } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') {
            segment_has_char = true;
        } else {
            return false;
        }
    }
    return segment_has_char;
}

FunctionName::FunctionName(std::string value) : value_(std::move(value)) {
    if (!is_valid(value_)) {
        throw Error("invalid function name: '" + value_ + "'");
    }
}

// ---------------------------------------------------------------------------
// ParamValue
// ---------------------------------------------------------------------------

json param_value_to_json(const ParamValue& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

ParamValue param_value_from_json(const json& j) {
    if (j.is_null()) return nullptr;
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_unsigned()) {
        auto u = j.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(INT64_MAX)) {
            throw Error("integer parameter value out of range: " + j.dump());
        }
        return static_cast<std::int64_t>(u);
    }
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw Error("parameter values must be scalars (string/number/boolean/null), got: " +
                j.dump());
}

std::string render_param_value(const ParamValue& v) {
    return param_value_to_json(v).dump();
}

std::string render_call(const ToolCall& call) {
    std::string out = call.function.str() + "(";
    bool first = true;
    for (const auto& [name, value] : call.parameters) {
        if (!first) out += ", ";
        first = false;
        out += name + "=" + render_param_value(value);
    }
    out += ")";
    return out;
}

// ---------------------------------------------------------------------------
// Enums
// ---------------------------------------------------------------------------

std::string to_string(TrajectorySource s) {
    return s == TrajectorySource::Expert ? "expert" : "agent";
}

TrajectorySource trajectory_source_from_string(std::string_view s) {
    if (s == "expert") return TrajectorySource::Expert;
    if (s == "agent") return TrajectorySource::Agent;
    throw Error("unknown trajectory source: '" + std::string(s) + "'");
}

std::string to_string(DemoSource s) {
    return s == DemoSource::Expert ? "expert" : "experience";
}

DemoSource demo_source_from_string(std::string_view s) {
    if (s == "expert") return DemoSource::Expert;
    if (s == "experience") return DemoSource::Experience;
    throw Error("unknown demonstration source: '" + std::string(s) + "'");
}

std::string to_string(Method m) {
    switch (m) {
        case Method::DxD: return "DxD";
        case Method::GD: return "GD";
        case Method::GDwC: return "GDwC";
        case Method::OD: return "OD";
        case Method::DE: return "DE";
        case Method::UD: return "UD";
        case Method::RD: return "RD";
        case Method::AG: return "AG";
    }
    throw Error("unreachable method enum value");
}

Method method_from_string(std::string_view s) {
    if (s == "DxD") return Method::DxD;
    if (s == "GD") return Method::GD;
    if (s == "GDwC") return Method::GDwC;
    if (s == "OD") return Method::OD;
    if (s == "DE") return Method::DE;
    if (s == "UD") return Method::UD;
    if (s == "RD") return Method::RD;
    if (s == "AG") return Method::AG;
    throw Error("unknown method: '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

std::vector<Demonstration> extract_demonstrations(const Trajectory& trajectory) {
    std::vector<Demonstration> out;
    out.reserve(trajectory.steps.size());
    std::vector<ToolCall> prefix;
    for (size_t i = 0; i < trajectory.steps.size(); ++i) {
        const StepRecord& step = trajectory.steps[i];
        Demonstration d;
        d.function = step.call.function;
        d.task_text = trajectory.task_text;
        d.previous_steps = prefix;
        d.call = step.call;
        d.thought = step.thought;
        d.return_value = step.return_value;
        d.source = trajectory.source == TrajectorySource::Expert ? DemoSource::Expert
                                                                 : DemoSource::Experience;
        d.provenance = {trajectory.task_id, i};
        out.push_back(std::move(d));
        prefix.push_back(step.call);
    }
    return out;
}

std::string render_demonstration(const Demonstration& d) {
    std::string out = "Demonstration of " + d.function.str() + "\n";
    out += "Overall Task/Query:\n" + d.task_text + "\n";
    out += "Previous Steps:\n";
    if (d.previous_steps.empty()) {
        out += "None\n";
    } else {
        for (size_t i = 0; i < d.previous_steps.size(); ++i) {
            out += std::to_string(i + 1) + ". " + render_call(d.previous_steps[i]) + "\n";
        }
    }
    if (d.thought) {
        out += "Thought:\n" + *d.thought + "\n";
    }
    out += "Function Call:\n" + render_call(d.call) + "\n";
    if (d.return_value) {
        out += "Return:\n" + *d.return_value + "\n";
    }
    if (d.evaluation) {
        out += "Evaluation of Demonstration:\n" + *d.evaluation + "\n";
    }
    return out;
}

std::string render_trajectory(const Trajectory& t) {
    std::string out = "Task: " + t.task_text + "\n";
    for (size_t i = 0; i < t.steps.size(); ++i) {
        const StepRecord& s = t.steps[i];
        out += "Step " + std::to_string(i + 1) + ":\n";
        if (s.thought) out += "Thought: " + *s.thought + "\n";
        out += "Call: " + render_call(s.call) + "\n";
        if (s.return_value) out += "Return: " + *s.return_value + "\n";
    }
    out += "Outcome: " + std::string(t.reward == 1 ? "success" : "failure") + "\n";
    return out;
}

DemosByFunction group_by_function(const std::vector<Demonstration>& demos) {
    DemosByFunction out;
    for (const auto& d : demos) {
        out[d.function].push_back(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON serialization. Optional fields are omitted when absent; readers treat
// missing keys as empty optionals.
// ---------------------------------------------------------------------------

namespace {

const json& require_field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw Error(std::string("missing field '") + key + "' in: " + j.dump());
    }
    return *it;
}

std::optional<std::string> optional_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

}  // namespace

void to_json(json& j, const ToolCall& c) {
    json params = json::object();
    for (const auto& [name, value] : c.parameters) {
        params[name] = param_value_to_json(value);
    }
    j = json{{"function", c.function.str()}, {"parameters", params}};
}

void from_json(const json& j, ToolCall& c) {
    c.function = FunctionName(require_field(j, "function").get<std::string>());
    c.parameters.clear();
    const json& params = require_field(j, "parameters");
    if (!params.is_object()) throw Error("'parameters' must be an object");
    for (auto it = params.begin(); it != params.end(); ++it) {
        c.parameters[it.key()] = param_value_from_json(it.value());
    }
}

void to_json(json& j, const StepRecord& s) {
    j = json{{"call", s.call}};
    if (s.thought) j["thought"] = *s.thought;
    if (s.return_value) j["return_value"] = *s.return_value;
}

void from_json(const json& j, StepRecord& s) {
    s.call = require_field(j, "call").get<ToolCall>();
    s.thought = optional_string(j, "thought");
    s.return_value = optional_string(j, "return_value");
}

void to_json(json& j, const Trajectory& t) {
    j = json{{"task_id", t.task_id}, {"task_text", t.task_text},
             {"steps", t.steps},     {"reward", t.reward},
             {"source", to_string(t.source)}, {"seed", t.seed}};
}

void from_json(const json& j, Trajectory& t) {
    t.task_id = require_field(j, "task_id").get<std::string>();
    t.task_text = require_field(j, "task_text").get<std::string>();
    t.steps = require_field(j, "steps").get<std::vector<StepRecord>>();
    t.reward = require_field(j, "reward").get<int>();
    if (t.reward != 0 && t.reward != 1) throw Error("reward must be 0 or 1");
    t.source = trajectory_source_from_string(require_field(j, "source").get<std::string>());
    t.seed = require_field(j, "seed").get<std::int64_t>();
}

void to_json(json& j, const Demonstration& d) {
    j = json{{"function", d.function.str()},
             {"task_text", d.task_text},
             {"previous_steps", d.previous_steps},
             {"call", d.call},
             {"source", to_string(d.source)},
             {"provenance", json{{"trajectory_id", d.provenance.trajectory_id},
                                 {"step_index", d.provenance.step_index}}}};
    if (d.thought) j["thought"] = *d.thought;
    if (d.return_value) j["return_value"] = *d.return_value;
    if (d.evaluation) j["evaluation"] = *d.evaluation;
}

void from_json(const json& j, Demonstration& d) {
    d.function = FunctionName(require_field(j, "function").get<std::string>());
    d.task_text = require_field(j, "task_text").get<std::string>();
    d.previous_steps = require_field(j, "previous_steps").get<std::vector<ToolCall>>();
    d.call = require_field(j, "call").get<ToolCall>();
    d.thought = optional_string(j, "thought");
    d.return_value = optional_string(j, "return_value");
    d.evaluation = optional_string(j, "evaluation");
    d.source = demo_source_from_string(require_field(j, "source").get<std::string>());
    const json& prov = require_field(j, "provenance");
    d.provenance.trajectory_id = require_field(prov, "trajectory_id").get<std::string>();
    d.provenance.step_index = require_field(prov, "step_index").get<std::size_t>();
    if (d.call.function != d.function) {
        throw Error("demonstration function does not match its call: " +
                    d.function.str() + " vs " + d.call.function.str());
    }
    if (d.source == DemoSource::Expert && d.evaluation) {
        throw Error("expert demonstrations cannot carry an evaluation");
    }
}

void to_json(json& j, const Critique& c) {
    j = json{{"target", json{{"trajectory_id", c.target.trajectory_id},
                             {"step_index", c.target.step_index}}},
             {"text", c.text}};
    if (c.flags) {
        j["flags"] = json{{"repeated_call", c.flags->repeated_call},
                          {"parameters_ok", c.flags->parameters_ok},
                          {"position_ok", c.flags->position_ok}};
    }
}

void from_json(const json& j, Critique& c) {
    const json& target = require_field(j, "target");
    c.target.trajectory_id = require_field(target, "trajectory_id").get<std::string>();
    c.target.step_index = require_field(target, "step_index").get<std::size_t>();
    c.text = require_field(j, "text").get<std::string>();
    if (c.text.empty()) throw Error("critique text must be non-empty");
    auto it = j.find("flags");
    if (it != j.end() && !it->is_null()) {
        CritiqueFlags f;
        f.repeated_call = require_field(*it, "repeated_call").get<bool>();
        f.parameters_ok = require_field(*it, "parameters_ok").get<bool>();
        f.position_ok = require_field(*it, "position_ok").get<bool>();
        c.flags = f;
    } else {
        c.flags.reset();
    }
}

void to_json(json& j, const Guideline& g) {
    j = json{{"function", g.function.str()}, {"text", g.text}};
}

void from_json(const json& j, Guideline& g) {
    g.function = FunctionName(require_field(j, "function").get<std::string>());
    g.text = require_field(j, "text").get<std::string>();
    if (g.text.empty()) throw Error("guideline text must be non-empty");
}

}  // namespace apilearn
