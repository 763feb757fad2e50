#include "apilearn/rng.hpp"
#include "apilearn/sandbox.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>

namespace apilearn::sandbox::detail {

namespace {

using Spec = FunctionSpec;
using P = ParameterSpec;

const std::string kDatetimeNote =
    "ISO-8601 local datetime without a timezone suffix, e.g. '2025-06-02T14:30:00'. "
    "Timezone suffixes such as 'Z' or '+02:00' are rejected.";

std::vector<Spec> make_office_functions() {
    std::vector<Spec> fns;
    fns.push_back(Spec{
        FunctionName("calendar.create_event"),
        {P{"title", ValueKind::String, true, std::nullopt},
         P{"participant_email", ValueKind::String, true, "Email address of the participant."},
         P{"start", ValueKind::Datetime, true, kDatetimeNote},
         P{"duration_minutes", ValueKind::Integer, true, std::nullopt}},
        "Create a calendar event with a single participant.",
        "'Event created successfully.' together with the new event_id.",
        false});
    fns.push_back(Spec{
        FunctionName("calendar.delete_event"),
        {P{"event_id", ValueKind::String, true, "ID of the event, e.g. 'EV2003'."}},
        "Delete a calendar event.",
        "'Event deleted successfully.' or 'Event not found.' if the event_id does not exist.",
        false});
    fns.push_back(Spec{
        FunctionName("calendar.search_events"),
        {P{"query", ValueKind::String, true,
           "Matched case-insensitively against event titles."},
         P{"time_min", ValueKind::Datetime, false, kDatetimeNote},
         P{"time_max", ValueKind::Datetime, false, kDatetimeNote}},
        "Search calendar events by title, optionally restricted to a start-time range.",
        "Matching events with event_id, title, and start, or 'No events found.'",
        true});
    fns.push_back(Spec{
        FunctionName("crm.delete_customer"),
        {P{"customer_id", ValueKind::String, true, "ID of the customer, e.g. 'CU3004'."}},
        "Remove a customer record from the CRM.",
        "'Customer deleted successfully.' or 'Customer not found.'",
        false});
    fns.push_back(Spec{
        FunctionName("crm.search_customers"),
        {P{"query", ValueKind::String, true,
           "Matched case-insensitively against customer names and email addresses."}},
        "Search CRM customer records.",
        "Matching customers with customer_id, name, and status, or 'No customers found.'",
        true});
    fns.push_back(Spec{
        FunctionName("crm.update_customer"),
        {P{"customer_id", ValueKind::String, true, "ID of the customer, e.g. 'CU3004'."},
         P{"field", ValueKind::String, true, "One of: name, email, phone, status."},
         P{"new_value", ValueKind::String, true, std::nullopt}},
        "Update one field of a customer record.",
        "'Customer updated successfully.', 'Customer not found.', or 'Invalid field: <field>. "
        "Valid fields: name, email, phone, status.'",
        false});
    fns.push_back(Spec{
        FunctionName("directory.find_email_address"),
        {P{"name", ValueKind::String, true, "Full name of the employee, e.g. 'Dev Kumar'."}},
        "Look up an employee's email address in the company directory.",
        "The employee's email address, or 'No employee found.'",
        true});
    fns.push_back(Spec{
        FunctionName("email.delete_email"),
        {P{"email_id", ValueKind::String, true, "ID of the inbox email, e.g. 'EM1042'."}},
        "Delete an email from the inbox.",
        "'Email deleted successfully.' or 'Email not found.'",
        false});
    fns.push_back(Spec{
        FunctionName("email.forward_email"),
        {P{"email_id", ValueKind::String, true, "ID of the inbox email, e.g. 'EM1042'."},
         P{"recipient", ValueKind::String, true, "Recipient email address."}},
        "Forward an existing inbox email to another recipient.",
        "'Email forwarded successfully.' or 'Email not found.' if the email_id does not exist.",
        false});
    fns.push_back(Spec{
        FunctionName("email.reply_email"),
        {P{"email_id", ValueKind::String, true,
           "ID of the inbox email to reply to, e.g. 'EM1042'. Find it with email.search_emails."},
         P{"body", ValueKind::String, true, "Body text of the reply."}},
        "Reply to an existing inbox email; the reply goes to the original sender.",
        "'Email replied successfully.' or 'Email not found.' if the email_id does not exist.",
        false});
    fns.push_back(Spec{
        FunctionName("email.search_emails"),
        {P{"query", ValueKind::String, true,
           "Matched case-insensitively against sender name, sender address, and subject."}},
        "Search the inbox. Results are sorted newest first.",
        "Up to 5 matching emails with email_id, sender, subject, and timestamp, or 'No emails "
        "found.'",
        true});
    fns.push_back(Spec{
        FunctionName("email.send_email"),
        {P{"recipient", ValueKind::String, true, "Recipient email address."},
         P{"subject", ValueKind::String, true, std::nullopt},
         P{"body", ValueKind::String, true, std::nullopt}},
        "Send a new email.",
        "'Email sent successfully.'",
        false});
    return fns;
}

std::string str_param(const ToolCall& call, const std::string& name) {
    return param_as_string(call, name).value_or("");
}

const Email* latest_email_from(const SandboxState& state, const std::string& sender_name) {
    const Email* best = nullptr;
    for (const Email& e : state.emails) {
        if (e.sender_name == sender_name && (best == nullptr || e.timestamp > best->timestamp)) {
            best = &e;
        }
    }
    return best;
}

}  // namespace

const std::vector<FunctionSpec>& office_functions() {
    static const std::vector<FunctionSpec> fns = make_office_functions();
    return fns;
}

ExecResult execute_office(const SandboxState& state, const ToolCall& call) {
    const std::string& fn = call.function.str();

    if (fn == "directory.find_email_address") {
        std::string name = str_param(call, "name");
        for (const Employee& e : state.employees) {
            if (contains_ci(e.name, name)) {
                return {state, "Email address of " + e.name + ": " + e.email};
            }
        }
        return {state, "No employee found."};
    }

    if (fn == "email.search_emails") {
        std::string query = str_param(call, "query");
        std::vector<const Email*> matches;
        for (const Email& e : state.emails) {
            if (contains_ci(e.sender_name, query) || contains_ci(e.sender_email, query) ||
                contains_ci(e.subject, query)) {
                matches.push_back(&e);
            }
        }
        if (matches.empty()) return {state, "No emails found."};
        std::stable_sort(matches.begin(), matches.end(),
                         [](const Email* a, const Email* b) { return a->timestamp > b->timestamp; });
        if (matches.size() > 5) matches.resize(5);
        std::string obs = "Found " + std::to_string(matches.size()) + " email(s):";
        for (const Email* e : matches) {
            obs += "\nemail_id: " + e->id + " | from: " + e->sender_name + " <" + e->sender_email +
                   "> | subject: " + e->subject + " | timestamp: " + e->timestamp;
        }
        return {state, obs};
    }

    if (fn == "email.send_email") {
        std::string recipient = str_param(call, "recipient");
        bool known = std::any_of(state.employees.begin(), state.employees.end(),
                                 [&](const Employee& e) { return e.email == recipient; });
        if (!known) {
            // The address goes nowhere, so the environment does not change,
            // but the agent still sees a success message.
            return {state, "Email sent successfully."};
        }
        SandboxState next = state;
        next.sent_emails.push_back(
            SentEmail{"send", recipient, str_param(call, "subject"), str_param(call, "body"), ""});
        return {std::move(next), "Email sent successfully."};
    }

    if (fn == "email.reply_email" || fn == "email.forward_email" || fn == "email.delete_email") {
        std::string email_id = str_param(call, "email_id");
        auto it = std::find_if(state.emails.begin(), state.emails.end(),
                               [&](const Email& e) { return e.id == email_id; });
        if (it == state.emails.end()) return {state, "Email not found."};

        if (fn == "email.reply_email") {
            SandboxState next = state;
            next.sent_emails.push_back(SentEmail{"reply", it->sender_email, "Re: " + it->subject,
                                                 str_param(call, "body"), it->id});
            return {std::move(next), "Email replied successfully."};
        }
        if (fn == "email.forward_email") {
            std::string recipient = str_param(call, "recipient");
            bool known = std::any_of(state.employees.begin(), state.employees.end(),
                                     [&](const Employee& e) { return e.email == recipient; });
            if (!known) return {state, "Email forwarded successfully."};
            SandboxState next = state;
            next.sent_emails.push_back(
                SentEmail{"forward", recipient, "Fwd: " + it->subject, it->body, it->id});
            return {std::move(next), "Email forwarded successfully."};
        }
        SandboxState next = state;
        next.emails.erase(next.emails.begin() + (it - state.emails.begin()));
        return {std::move(next), "Email deleted successfully."};
    }

    if (fn == "calendar.create_event") {
        auto duration = param_as_int(call, "duration_minutes");
        if (!duration || *duration <= 0) {
            return {state, "Invalid value for parameter 'duration_minutes': expected a positive "
                           "integer."};
        }
        std::int64_t max_id = 1999;
        for (const CalendarEvent& e : state.events) {
            try {
                max_id = std::max<std::int64_t>(max_id, std::stoll(e.id.substr(2)));
            } catch (...) {
            }
        }
        SandboxState next = state;
        std::string id = "EV" + std::to_string(max_id + 1);
        next.events.push_back(CalendarEvent{id, str_param(call, "title"),
                                            str_param(call, "participant_email"),
                                            str_param(call, "start"), *duration});
        return {std::move(next), "Event created successfully. event_id: " + id};
    }

    if (fn == "calendar.search_events") {
        std::string query = str_param(call, "query");
        auto time_min = param_as_string(call, "time_min");
        auto time_max = param_as_string(call, "time_max");
        std::string obs;
        std::size_t found = 0;
        for (const CalendarEvent& e : state.events) {
            if (!contains_ci(e.title, query)) continue;
            if (time_min && e.start < *time_min) continue;
            if (time_max && e.start > *time_max) continue;
            ++found;
            obs += "\nevent_id: " + e.id + " | title: " + e.title + " | start: " + e.start;
        }
        if (found == 0) return {state, "No events found."};
        return {state, "Found " + std::to_string(found) + " event(s):" + obs};
    }

    if (fn == "calendar.delete_event") {
        std::string event_id = str_param(call, "event_id");
        auto it = std::find_if(state.events.begin(), state.events.end(),
                               [&](const CalendarEvent& e) { return e.id == event_id; });
        if (it == state.events.end()) return {state, "Event not found."};
        SandboxState next = state;
        next.events.erase(next.events.begin() + (it - state.events.begin()));
        return {std::move(next), "Event deleted successfully."};
    }

    if (fn == "crm.search_customers") {
        std::string query = str_param(call, "query");
        std::string obs;
        std::size_t found = 0;
        for (const Customer& c : state.customers) {
            if (!contains_ci(c.name, query) && !contains_ci(c.email, query)) continue;
            ++found;
            obs += "\ncustomer_id: " + c.id + " | name: " + c.name + " | status: " + c.status;
        }
        if (found == 0) return {state, "No customers found."};
        return {state, "Found " + std::to_string(found) + " customer(s):" + obs};
    }

    if (fn == "crm.update_customer") {
        std::string customer_id = str_param(call, "customer_id");
        std::string field = str_param(call, "field");
        if (field != "name" && field != "email" && field != "phone" && field != "status") {
            return {state,
                    "Invalid field: " + field + ". Valid fields: name, email, phone, status."};
        }
        auto it = std::find_if(state.customers.begin(), state.customers.end(),
                               [&](const Customer& c) { return c.id == customer_id; });
        if (it == state.customers.end()) return {state, "Customer not found."};
        SandboxState next = state;
        Customer& c = next.customers[it - state.customers.begin()];
        std::string value = str_param(call, "new_value");
        if (field == "name") c.name = value;
        else if (field == "email") c.email = value;
        else if (field == "phone") c.phone = value;
        else c.status = value;
        return {std::move(next), "Customer updated successfully."};
    }

    if (fn == "crm.delete_customer") {
        std::string customer_id = str_param(call, "customer_id");
        auto it = std::find_if(state.customers.begin(), state.customers.end(),
                               [&](const Customer& c) { return c.id == customer_id; });
        if (it == state.customers.end()) return {state, "Customer not found."};
        SandboxState next = state;
        next.customers.erase(next.customers.begin() + (it - state.customers.begin()));
        return {std::move(next), "Customer deleted successfully."};
    }

    throw SandboxError("unhandled office function: " + fn);
}

// ---------------------------------------------------------------------------
// World and task generation
// ---------------------------------------------------------------------------

namespace {

const std::array<const char*, 30> kFirstNames = {
    "Ava",  "Dev",  "Mia",  "Noah", "Omar", "Lena", "Kai",   "Zoe",  "Ravi", "Nina",
    "Theo", "Iris", "Hugo", "Tara", "Eli",  "Maya", "Finn",  "Sana", "Jude", "Vera",
    "Amir", "Cleo", "Rhys", "Dina", "Ezra", "Lola", "Arjun", "Bea",  "Cole", "Faye"};

const std::array<const char*, 30> kLastNames = {
    "Kumar",  "Alvarez", "Chen",     "Okafor", "Haddad", "Silva",  "Novak", "Greene",
    "Ito",    "Laurent", "Moore",    "Petrov", "Singh",  "Walsh",  "Duarte", "Kim",
    "Fontaine", "Abbas", "Lindgren", "Mbeki",  "Romano", "Quist",  "Tanaka", "Varga",
    "Ortega", "Beck",    "Iqbal",    "Sorensen", "Calloway", "Reyes"};

const std::array<const char*, 12> kSubjects = {
    "Project sync",     "Quarterly numbers", "Lunch on Friday", "Design review notes",
    "Travel booking",   "Onboarding checklist", "Budget follow-up", "Client feedback",
    "Team offsite",     "Security training", "Build failure",   "Invoice question"};

const std::array<const char*, 10> kBodies = {
    "Can we catch up this week?",
    "Please see the notes from today's meeting.",
    "Let me know your thoughts when you get a chance.",
    "The numbers look good, a few questions inline.",
    "I will be out on Thursday, can we move our sync?",
    "Attached is the draft for review.",
    "Thanks for the quick turnaround on this.",
    "Could you confirm the schedule for next week?",
    "The client asked for an update by Friday.",
    "Here is the summary we discussed."};

const std::array<const char*, 10> kEventTitles = {
    "Sprint Planning", "Quarterly Review", "One-on-one Sync", "Product Demo", "All Hands",
    "Design Critique", "Budget Meeting",   "Hiring Panel",    "Team Retro",   "Town Hall"};

const std::array<const char*, 3> kCustomerStatuses = {"lead", "active", "inactive"};

// Minutes after 2025-05-01T00:00:00, rendered as a local ISO-8601 timestamp.
// Month lengths are handled explicitly so generated data never needs libc
// time zones.
std::string minutes_to_timestamp(std::int64_t minutes_from_may1) {
    static const int days_in_month[] = {31, 30, 31, 31, 30, 31, 30, 31};  // May..Dec 2025
    std::int64_t day = minutes_from_may1 / (24 * 60);
    std::int64_t rem = minutes_from_may1 % (24 * 60);
    int month_idx = 0;
    while (day >= days_in_month[month_idx]) {
        day -= days_in_month[month_idx];
        ++month_idx;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "2025-%02d-%02dT%02d:%02d:00", 5 + month_idx,
                  static_cast<int>(day + 1), static_cast<int>(rem / 60),
                  static_cast<int>(rem % 60));
    return std::string(buf);
}

}  // namespace

SandboxState generate_office_state(std::uint64_t seed) {
    SplitMix64 rng(seed ^ fnv1a64("office-state"));
    SandboxState s;
    s.environment_id = "office";
    s.rng_seed = seed;

    std::vector<std::string> firsts(kFirstNames.begin(), kFirstNames.end());
    std::vector<std::string> lasts(kLastNames.begin(), kLastNames.end());
    rng.shuffle(firsts);
    rng.shuffle(lasts);
    for (size_t i = 0; i < 24; ++i) {
        std::string name = firsts[i] + " " + lasts[i];
        s.employees.push_back(
            Employee{name, to_lower(firsts[i]) + "." + to_lower(lasts[i]) + "@acmecorp.com"});
    }

    for (size_t i = 0; i < 70; ++i) {
        const Employee& sender = s.employees[rng.bounded(s.employees.size())];
        Email e;
        e.id = "EM" + std::to_string(1000 + i);
        e.sender_name = sender.name;
        e.sender_email = sender.email;
        e.subject = kSubjects[rng.bounded(kSubjects.size())];
        e.body = kBodies[rng.bounded(kBodies.size())];
        e.timestamp = minutes_to_timestamp(8 * 60 + static_cast<std::int64_t>(i) * 97);
        s.emails.push_back(std::move(e));
    }

    for (size_t i = 0; i < 22; ++i) {
        CalendarEvent e;
        e.id = "EV" + std::to_string(2000 + i);
        e.title = std::string(kEventTitles[i % kEventTitles.size()]) + " " + std::to_string(i + 1);
        e.participant_email = s.employees[rng.bounded(s.employees.size())].email;
        e.start = minutes_to_timestamp(32 * 24 * 60 + static_cast<std::int64_t>(i) * 1441);
        e.duration_minutes = static_cast<std::int64_t>(30 + 15 * rng.bounded(3));
        s.events.push_back(std::move(e));
    }

    std::set<std::string> used_customer_names;
    for (const Employee& e : s.employees) used_customer_names.insert(e.name);
    for (size_t i = 0; i < 18; ++i) {
        std::string name;
        do {
            name = std::string(kFirstNames[rng.bounded(kFirstNames.size())]) + " " +
                   kLastNames[rng.bounded(kLastNames.size())];
        } while (!used_customer_names.insert(name).second);
        Customer c;
        c.id = "CU" + std::to_string(3000 + i);
        c.name = name;
        c.email = to_lower(replace_all(name, " ", ".")) + "@clientmail.com";
        c.phone = "555-01" + std::to_string(10 + rng.bounded(90));
        c.status = kCustomerStatuses[rng.bounded(kCustomerStatuses.size())];
        s.customers.push_back(std::move(c));
    }

    return s;
}

namespace {

ToolCall make_call(const std::string& fn,
                   std::initializer_list<std::pair<std::string, ParamValue>> params) {
    ToolCall c;
    c.function = FunctionName(fn);
    for (auto& [k, v] : params) c.parameters[k] = v;
    return c;
}

}  // namespace

std::vector<TaskInstance> generate_office_tasks(std::size_t count, std::uint64_t seed) {
    SandboxState world = generate_office_state(seed);
    SplitMix64 rng(seed ^ fnv1a64("office-tasks"));
    std::vector<TaskInstance> tasks;
    std::set<std::string> used_texts;

    std::string initial_digest = state_digest(world);

    while (tasks.size() < count) {
        std::string text;
        std::vector<ToolCall> calls;

        switch (rng.bounded(8)) {
            case 0: {  // reply to last email from a sender
                const Email& anchor = world.emails[rng.bounded(world.emails.size())];
                const Email* target = latest_email_from(world, anchor.sender_name);
                std::string body = kBodies[rng.bounded(kBodies.size())];
                text = "Reply to my last email from " + anchor.sender_name + " with the body '" +
                       body + "'.";
                calls = {make_call("email.search_emails", {{"query", anchor.sender_name}}),
                         make_call("email.reply_email",
                                   {{"email_id", target->id}, {"body", body}})};
                break;
            }
            case 1: {  // send a fresh email
                const Employee& rcpt = world.employees[rng.bounded(world.employees.size())];
                std::string subject = kSubjects[rng.bounded(kSubjects.size())];
                std::string body = kBodies[rng.bounded(kBodies.size())];
                text = "Send an email to " + rcpt.name + " with the subject '" + subject +
                       "' and the body '" + body + "'.";
                calls = {make_call("directory.find_email_address", {{"name", rcpt.name}}),
                         make_call("email.send_email", {{"recipient", rcpt.email},
                                                        {"subject", subject},
                                                        {"body", body}})};
                break;
            }
            case 2: {  // forward the last email from A to B
                const Email& anchor = world.emails[rng.bounded(world.emails.size())];
                const Email* target = latest_email_from(world, anchor.sender_name);
                const Employee* rcpt;
                do {
                    rcpt = &world.employees[rng.bounded(world.employees.size())];
                } while (rcpt->name == anchor.sender_name);
                text = "Forward my last email from " + anchor.sender_name + " to " + rcpt->name +
                       ".";
                calls = {make_call("email.search_emails", {{"query", anchor.sender_name}}),
                         make_call("directory.find_email_address", {{"name", rcpt->name}}),
                         make_call("email.forward_email",
                                   {{"email_id", target->id}, {"recipient", rcpt->email}})};
                break;
            }
            case 3: {  // delete the last email from a sender
                const Email& anchor = world.emails[rng.bounded(world.emails.size())];
                const Email* target = latest_email_from(world, anchor.sender_name);
                text = "Delete my last email from " + anchor.sender_name + ".";
                calls = {make_call("email.search_emails", {{"query", anchor.sender_name}}),
                         make_call("email.delete_email", {{"email_id", target->id}})};
                break;
            }
            case 4: {  // create an event
                const Employee& who = world.employees[rng.bounded(world.employees.size())];
                std::int64_t duration = 30 + 15 * static_cast<std::int64_t>(rng.bounded(3));
                std::string title = "Planning session " + std::to_string(1 + rng.bounded(99));
                std::string start = minutes_to_timestamp(
                    61 * 24 * 60 + static_cast<std::int64_t>(rng.bounded(28 * 24)) * 60);
                text = "Create a " + std::to_string(duration) + "-minute event called '" + title +
                       "' with " + who.name + " starting at " + start + ".";
                calls = {make_call("directory.find_email_address", {{"name", who.name}}),
                         make_call("calendar.create_event",
                                   {{"title", title},
                                    {"participant_email", who.email},
                                    {"start", start},
                                    {"duration_minutes", duration}})};
                break;
            }
            case 5: {  // delete an event by title
                const CalendarEvent& ev = world.events[rng.bounded(world.events.size())];
                text = "Delete the calendar event '" + ev.title + "'.";
                calls = {make_call("calendar.search_events", {{"query", ev.title}}),
                         make_call("calendar.delete_event", {{"event_id", ev.id}})};
                break;
            }
            case 6: {  // update a customer's status
                const Customer& cust = world.customers[rng.bounded(world.customers.size())];
                std::string status;
                do {
                    status = kCustomerStatuses[rng.bounded(kCustomerStatuses.size())];
                } while (status == cust.status);
                text = "Set the status of customer " + cust.name + " to '" + status + "'.";
                calls = {make_call("crm.search_customers", {{"query", cust.name}}),
                         make_call("crm.update_customer", {{"customer_id", cust.id},
                                                           {"field", std::string("status")},
                                                           {"new_value", status}})};
                break;
            }
            default: {  // delete a customer
                const Customer& cust = world.customers[rng.bounded(world.customers.size())];
                text = cust.name + " is no longer a customer. Please delete them from the CRM.";
                calls = {make_call("crm.search_customers", {{"query", cust.name}}),
                         make_call("crm.delete_customer", {{"customer_id", cust.id}})};
                break;
            }
        }

        if (!used_texts.insert(text).second) continue;

        TaskInstance task;
        task.task_id = "office-" + std::to_string(seed) + "-" + std::to_string(tasks.size());
        task.text = text;
        task.environment_id = "office";
        task.initial_state = world;
        task.canonical_calls = calls;
        task.seed = seed;

        SandboxState cur = world;
        for (const ToolCall& c : calls) cur = execute(cur, c).state;
        task.goal_state_digest = state_digest(cur);
        if (task.goal_state_digest == initial_digest) {
            throw SandboxError("generated office task does not change the environment: " + text);
        }
        tasks.push_back(std::move(task));
    }

    return tasks;
}

}  // namespace apilearn::sandbox::detail
