#include "apilearn/sandbox.hpp"

#include "apilearn/rng.hpp"

namespace apilearn::sandbox {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Employee, name, email)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Email, id, sender_name, sender_email, subject, body, timestamp)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SentEmail, kind, recipient, subject, body, related_email_id)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CalendarEvent, id, title, participant_email, start,
                                   duration_minutes)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Customer, id, name, email, phone, status)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RetailUser, user_id, first_name, last_name, email, zip)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Product, product_id, name, price_cents)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(OrderItem, item_id, product_id, name, price_cents)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Order, order_id, user_id, status, address1, city, state, zip,
                                   items, returned_item_ids)

std::string to_string(ValueKind k) {
    switch (k) {
        case ValueKind::String: return "string";
        case ValueKind::Integer: return "integer";
        case ValueKind::Boolean: return "boolean";
        case ValueKind::Datetime: return "datetime-string";
    }
    throw Error("unreachable value kind");
}

const std::vector<FunctionSpec>& list_functions(const std::string& environment_id) {
    if (environment_id == "office") return detail::office_functions();
    if (environment_id == "retail") return detail::retail_functions();
    throw SandboxError("unknown environment: '" + environment_id + "'");
}

const FunctionSpec* find_function(const std::string& environment_id, const FunctionName& fn) {
    for (const FunctionSpec& spec : list_functions(environment_id)) {
        if (spec.name == fn) return &spec;
    }
    return nullptr;
}

namespace detail {

std::optional<std::string> param_as_string(const ToolCall& call, const std::string& name) {
    auto it = call.parameters.find(name);
    if (it == call.parameters.end()) return std::nullopt;
    const ParamValue& v = it->second;
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v)) return param_value_to_json(v).dump();
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
    return std::nullopt;  // null
}

std::optional<std::int64_t> param_as_int(const ToolCall& call, const std::string& name) {
    auto it = call.parameters.find(name);
    if (it == call.parameters.end()) return std::nullopt;
    const ParamValue& v = it->second;
    if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
    if (std::holds_alternative<std::string>(v)) {
        try {
            size_t pos = 0;
            std::int64_t parsed = std::stoll(std::get<std::string>(v), &pos);
            if (pos == std::get<std::string>(v).size()) return parsed;
        } catch (...) {
        }
    }
    return std::nullopt;
}

bool valid_local_datetime(const std::string& value) {
    // YYYY-MM-DDTHH:MM:SS, no timezone suffix.
    if (value.size() != 19) return false;
    for (size_t i = 0; i < value.size(); ++i) {
        char c = value[i];
        if (i == 4 || i == 7) {
            if (c != '-') return false;
        } else if (i == 10) {
            if (c != 'T') return false;
        } else if (i == 13 || i == 16) {
            if (c != ':') return false;
        } else if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

std::optional<std::string> validate_call(const FunctionSpec& spec, const ToolCall& call) {
    for (const ParameterSpec& p : spec.parameters) {
        auto it = call.parameters.find(p.name);
        bool present = it != call.parameters.end() &&
                       !std::holds_alternative<std::nullptr_t>(it->second);
        if (!present) {
            if (p.required) return "Missing required parameter: " + p.name;
            continue;
        }
        if (p.kind == ValueKind::Datetime) {
            auto value = param_as_string(call, p.name);
            if (!value || !valid_local_datetime(*value)) {
                return "Invalid datetime format for parameter '" + p.name +
                       "': use YYYY-MM-DDTHH:MM:SS without a timezone suffix.";
            }
        }
    }
    for (const auto& [name, _] : call.parameters) {
        bool known = false;
        for (const ParameterSpec& p : spec.parameters) {
            if (p.name == name) {
                known = true;
                break;
            }
        }
        if (!known) return "Unknown parameter: " + name;
    }
    return std::nullopt;
}

}  // namespace detail

ExecResult execute(const SandboxState& state, const ToolCall& call) {
    const FunctionSpec* spec = find_function(state.environment_id, call.function);
    if (spec == nullptr) {
        throw SandboxError("unknown function '" + call.function.str() + "' in environment '" +
                           state.environment_id + "'");
    }
    if (auto err = detail::validate_call(*spec, call)) {
        return {state, *err};
    }
    if (state.environment_id == "office") return detail::execute_office(state, call);
    return detail::execute_retail(state, call);
}

std::string state_digest(const SandboxState& state) {
    json j;
    if (state.environment_id == "office") {
        j = json{{"emails", state.emails},
                 {"sent_emails", state.sent_emails},
                 {"events", state.events},
                 {"customers", state.customers}};
    } else if (state.environment_id == "retail") {
        j = json{{"orders", state.orders}};
    } else {
        throw SandboxError("unknown environment: '" + state.environment_id + "'");
    }
    return hex64(fnv1a64(j.dump()));
}

int evaluate(const SandboxState& final_state, const TaskInstance& task) {
    if (final_state.environment_id != task.environment_id) {
        throw SandboxError("evaluate: state environment '" + final_state.environment_id +
                           "' does not match task environment '" + task.environment_id + "'");
    }
    return state_digest(final_state) == task.goal_state_digest ? 1 : 0;
}

SandboxState generate_state(const std::string& environment_id, std::uint64_t seed) {
    if (environment_id == "office") return detail::generate_office_state(seed);
    if (environment_id == "retail") return detail::generate_retail_state(seed);
    throw SandboxError("unknown environment: '" + environment_id + "'");
}

std::vector<TaskInstance> generate_tasks(const std::string& environment_id, std::size_t count,
                                         std::uint64_t seed) {
    if (count < 1) throw SandboxError("task count must be >= 1");
    if (environment_id == "office") return detail::generate_office_tasks(count, seed);
    if (environment_id == "retail") return detail::generate_retail_tasks(count, seed);
    throw SandboxError("unknown environment: '" + environment_id + "'");
}

std::string render_function_doc(const FunctionSpec& spec) {
    std::string out = "Function: " + spec.name.str() + "\n";
    out += "Description: " + spec.description + "\n";
    out += "Parameters:\n";
    if (spec.parameters.empty()) {
        out += "None\n";
    } else {
        for (const ParameterSpec& p : spec.parameters) {
            out += "- " + p.name + " (" + to_string(p.kind) + ", " +
                   (p.required ? "required" : "optional") + ")";
            if (p.format_note) out += ": " + *p.format_note;
            out += "\n";
        }
    }
    out += "Returns: " + spec.returns + "\n";
    return out;
}

Textualization ground_truth_docs(const std::string& environment_id) {
    Textualization t;
    t.method = Method::OD;
    t.metadata = {};
    for (const FunctionSpec& spec : list_functions(environment_id)) {
        t.per_function[spec.name] = render_function_doc(spec);
    }
    return t;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

void to_json(json& j, const SandboxState& s) {
    j = json{{"environment_id", s.environment_id}, {"rng_seed", s.rng_seed}};
    if (s.environment_id == "office") {
        j["employees"] = s.employees;
        j["emails"] = s.emails;
        j["sent_emails"] = s.sent_emails;
        j["events"] = s.events;
        j["customers"] = s.customers;
    } else {
        j["users"] = s.users;
        j["products"] = s.products;
        j["orders"] = s.orders;
    }
}

void from_json(const json& j, SandboxState& s) {
    s = SandboxState{};
    s.environment_id = j.at("environment_id").get<std::string>();
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    if (s.environment_id == "office") {
        s.employees = j.at("employees").get<std::vector<Employee>>();
        s.emails = j.at("emails").get<std::vector<Email>>();
        s.sent_emails = j.at("sent_emails").get<std::vector<SentEmail>>();
        s.events = j.at("events").get<std::vector<CalendarEvent>>();
        s.customers = j.at("customers").get<std::vector<Customer>>();
    } else {
        s.users = j.at("users").get<std::vector<RetailUser>>();
        s.products = j.at("products").get<std::vector<Product>>();
        s.orders = j.at("orders").get<std::vector<Order>>();
    }
}

void to_json(json& j, const TaskInstance& t) {
    j = json{{"task_id", t.task_id},
             {"text", t.text},
             {"environment_id", t.environment_id},
             {"seed", t.seed},
             {"canonical_calls", t.canonical_calls},
             {"goal_state_digest", t.goal_state_digest}};
}

void from_json(const json& j, TaskInstance& t) {
    t.task_id = j.at("task_id").get<std::string>();
    t.text = j.at("text").get<std::string>();
    t.environment_id = j.at("environment_id").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.canonical_calls = j.at("canonical_calls").get<std::vector<ToolCall>>();
    t.goal_state_digest = j.at("goal_state_digest").get<std::string>();
    // initial_state is not stored per task; suites regenerate it from the seed.
}

}  // namespace apilearn::sandbox
