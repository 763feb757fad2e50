#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apilearn/core.hpp"

namespace apilearn::sandbox {

// Deterministic, seedable task environments: an office environment
// (email/calendar/CRM) and a retail environment (orders with '#'-prefixed
// IDs). execute() is a pure transition; evaluation is outcome-centric and
// compares only the environment-changing portion of the final state.

enum class ValueKind { String, Integer, Boolean, Datetime };

std::string to_string(ValueKind k);

struct ParameterSpec {
    std::string name;
    ValueKind kind = ValueKind::String;
    bool required = true;
    std::optional<std::string> format_note;
};

struct FunctionSpec {
    FunctionName name;
    std::vector<ParameterSpec> parameters;
    std::string description;
    std::string returns;
    bool read_only = false;
};

// --- office entities ---

struct Employee {
    std::string name;
    std::string email;
};

struct Email {
    std::string id;
    std::string sender_name;
    std::string sender_email;
    std::string subject;
    std::string body;
    std::string timestamp;  // ISO-8601 local, no timezone
};

struct SentEmail {
    std::string kind;  // "send" | "reply" | "forward"
    std::string recipient;
    std::string subject;
    std::string body;
    std::string related_email_id;  // for reply/forward
};

struct CalendarEvent {
    std::string id;
    std::string title;
    std::string participant_email;
    std::string start;
    std::int64_t duration_minutes = 0;
};

struct Customer {
    std::string id;
    std::string name;
    std::string email;
    std::string phone;
    std::string status;
};

// --- retail entities ---

struct RetailUser {
    std::string user_id;
    std::string first_name;
    std::string last_name;
    std::string email;
    std::string zip;
};

struct Product {
    std::string product_id;
    std::string name;
    std::int64_t price_cents = 0;
};

struct OrderItem {
    std::string item_id;
    std::string product_id;
    std::string name;
    std::int64_t price_cents = 0;
};

struct Order {
    std::string order_id;  // stored WITH leading '#'
    std::string user_id;
    std::string status;  // pending | delivered | cancelled | return_requested
    std::string address1;
    std::string city;
    std::string state;
    std::string zip;
    std::vector<OrderItem> items;
    std::vector<std::string> returned_item_ids;
};

struct SandboxState {
    std::string environment_id;  // "office" | "retail"
    std::uint64_t rng_seed = 0;
    // office tables
    std::vector<Employee> employees;
    std::vector<Email> emails;
    std::vector<SentEmail> sent_emails;
    std::vector<CalendarEvent> events;
    std::vector<Customer> customers;
    // retail tables
    std::vector<RetailUser> users;
    std::vector<Product> products;
    std::vector<Order> orders;
};

struct TaskInstance {
    std::string task_id;
    std::string text;
    std::string environment_id;
    SandboxState initial_state;
    std::string goal_state_digest;
    std::vector<ToolCall> canonical_calls;  // the oracle solution
    std::uint64_t seed = 0;
};

class SandboxError : public Error {
public:
    using Error::Error;
};

struct ExecResult {
    SandboxState state;
    std::string observation;
};

// Stable order; throws SandboxError for unknown environments.
const std::vector<FunctionSpec>& list_functions(const std::string& environment_id);

const FunctionSpec* find_function(const std::string& environment_id, const FunctionName& fn);

// Pure transition. Unknown functions throw SandboxError; every in-environment
// failure (missing parameter, unknown id, bad format) is an observation.
ExecResult execute(const SandboxState& state, const ToolCall& call);

// Canonical digest of the environment-changing tables only.
std::string state_digest(const SandboxState& state);

// 1 iff the environment-changing portion of final_state matches the task's
// goal digest; read-only calls and observations never affect the result.
int evaluate(const SandboxState& final_state, const TaskInstance& task);

SandboxState generate_state(const std::string& environment_id, std::uint64_t seed);

std::vector<TaskInstance> generate_tasks(const std::string& environment_id,
                                         std::size_t count, std::uint64_t seed);

Textualization ground_truth_docs(const std::string& environment_id);

// Documentation block for one function, rendered from its spec.
std::string render_function_doc(const FunctionSpec& spec);

void to_json(json& j, const SandboxState& s);
void from_json(const json& j, SandboxState& s);
void to_json(json& j, const TaskInstance& t);
void from_json(const json& j, TaskInstance& t);

// internal helpers shared by the office/retail implementations
namespace detail {
std::optional<std::string> param_as_string(const ToolCall& call, const std::string& name);
std::optional<std::int64_t> param_as_int(const ToolCall& call, const std::string& name);
// Returns an error observation when a required parameter is missing or a
// datetime parameter is malformed, nullopt when the call passes validation.
std::optional<std::string> validate_call(const FunctionSpec& spec, const ToolCall& call);
bool valid_local_datetime(const std::string& value);
ExecResult execute_office(const SandboxState& state, const ToolCall& call);
ExecResult execute_retail(const SandboxState& state, const ToolCall& call);
SandboxState generate_office_state(std::uint64_t seed);
SandboxState generate_retail_state(std::uint64_t seed);
std::vector<TaskInstance> generate_office_tasks(std::size_t count, std::uint64_t seed);
std::vector<TaskInstance> generate_retail_tasks(std::size_t count, std::uint64_t seed);
const std::vector<FunctionSpec>& office_functions();
const std::vector<FunctionSpec>& retail_functions();
}  // namespace detail

}  // namespace apilearn::sandbox
