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

const std::string kOrderIdNote =
    "Order IDs start with '#', e.g. '#W8732376'. A value without the leading '#' will not be "
    "found.";

std::vector<Spec> make_retail_functions() {
    std::vector<Spec> fns;
    fns.push_back(Spec{
        FunctionName("cancel_pending_order"),
        {P{"order_id", ValueKind::String, true, kOrderIdNote}},
        "Cancel an order that is still pending.",
        "'Order cancelled successfully.' if the order was pending; 'Order not found' or 'Order "
        "is not pending.' otherwise.",
        false});
    fns.push_back(Spec{
        FunctionName("find_user_id_by_email"),
        {P{"email", ValueKind::String, true, "Email address on the user's account."}},
        "Find a user's ID by their account email address.",
        "The user_id, or 'User not found'.",
        true});
    fns.push_back(Spec{
        FunctionName("find_user_id_by_name_zip"),
        {P{"first_name", ValueKind::String, true, std::nullopt},
         P{"last_name", ValueKind::String, true, std::nullopt},
         P{"zip", ValueKind::String, true, "Five-digit zip code on the user's account."}},
        "Find a user's ID by their name and zip code.",
        "The user_id, or 'User not found'.",
        true});
    fns.push_back(Spec{
        FunctionName("get_order_details"),
        {P{"order_id", ValueKind::String, true, kOrderIdNote}},
        "Look up an order: status, delivery address, and items.",
        "The order details, or 'Order not found'.",
        true});
    fns.push_back(Spec{
        FunctionName("get_product_details"),
        {P{"product_id", ValueKind::String, true, "Product ID, e.g. 'P4893022'."}},
        "Look up a product's name and price.",
        "The product details, or 'Product not found'.",
        true});
    fns.push_back(Spec{
        FunctionName("get_user_details"),
        {P{"user_id", ValueKind::String, true, "User ID, e.g. 'mia_li_3668'."}},
        "Look up a user's profile, including their orders with order IDs and statuses.",
        "The user details, or 'User not found'.",
        true});
    fns.push_back(Spec{
        FunctionName("list_all_product_types"),
        {},
        "List every product type in the catalog.",
        "One line per product with product_id and type.",
        true});
    fns.push_back(Spec{
        FunctionName("modify_pending_order_address"),
        {P{"order_id", ValueKind::String, true, kOrderIdNote},
         P{"address1", ValueKind::String, true, "Street address line."},
         P{"city", ValueKind::String, true, std::nullopt},
         P{"state", ValueKind::String, true, "Two-letter state code."},
         P{"zip", ValueKind::String, true, std::nullopt}},
        "Change the delivery address of an order that is still pending.",
        "'Order address updated successfully.', 'Order not found', or 'Order is not pending.'",
        false});
    fns.push_back(Spec{
        FunctionName("return_delivered_order_items"),
        {P{"order_id", ValueKind::String, true, kOrderIdNote},
         P{"item_ids", ValueKind::String, true,
           "Comma-separated item IDs from the order, e.g. 'I1000001,I1000002'."}},
        "Request a return of items from a delivered order.",
        "'Return requested successfully.', 'Order not found', 'Order is not delivered.', or "
        "'Item not found in order: <item_id>'.",
        false});
    return fns;
}

std::string str_param(const ToolCall& call, const std::string& name) {
    return param_as_string(call, name).value_or("");
}

std::string format_price(std::int64_t cents) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "$%lld.%02lld", static_cast<long long>(cents / 100),
                  static_cast<long long>(cents % 100));
    return std::string(buf);
}

const Order* find_order(const SandboxState& state, const std::string& order_id) {
    for (const Order& o : state.orders) {
        if (o.order_id == order_id) return &o;  // stored IDs carry the leading '#'
    }
    return nullptr;
}

}  // namespace

const std::vector<FunctionSpec>& retail_functions() {
    static const std::vector<FunctionSpec> fns = make_retail_functions();
    return fns;
}

ExecResult execute_retail(const SandboxState& state, const ToolCall& call) {
    const std::string& fn = call.function.str();

    if (fn == "find_user_id_by_email") {
        std::string email = str_param(call, "email");
        for (const RetailUser& u : state.users) {
            if (to_lower(u.email) == to_lower(email)) return {state, "user_id: " + u.user_id};
        }
        return {state, "User not found"};
    }

    if (fn == "find_user_id_by_name_zip") {
        std::string first = to_lower(str_param(call, "first_name"));
        std::string last = to_lower(str_param(call, "last_name"));
        std::string zip = str_param(call, "zip");
        for (const RetailUser& u : state.users) {
            if (to_lower(u.first_name) == first && to_lower(u.last_name) == last && u.zip == zip) {
                return {state, "user_id: " + u.user_id};
            }
        }
        return {state, "User not found"};
    }

    if (fn == "get_user_details") {
        std::string user_id = str_param(call, "user_id");
        for (const RetailUser& u : state.users) {
            if (u.user_id != user_id) continue;
            std::string obs = "user_id: " + u.user_id + "\nname: " + u.first_name + " " +
                              u.last_name + "\nemail: " + u.email + "\nzip: " + u.zip +
                              "\norders:";
            bool any = false;
            for (const Order& o : state.orders) {
                if (o.user_id != u.user_id) continue;
                any = true;
                obs += "\n- order_id: " + o.order_id + " | status: " + o.status;
            }
            if (!any) obs += " none";
            return {state, obs};
        }
        return {state, "User not found"};
    }

    if (fn == "get_order_details") {
        const Order* o = find_order(state, str_param(call, "order_id"));
        if (o == nullptr) return {state, "Order not found"};
        std::string obs = "order_id: " + o->order_id + "\nstatus: " + o->status + "\naddress: " +
                          o->address1 + ", " + o->city + ", " + o->state + " " + o->zip +
                          "\nitems:";
        for (const OrderItem& item : o->items) {
            obs += "\n- item_id: " + item.item_id + " | product_id: " + item.product_id +
                   " | name: " + item.name + " | price: " + format_price(item.price_cents);
        }
        if (!o->returned_item_ids.empty()) {
            obs += "\nreturn requested for: " + join(o->returned_item_ids, ", ");
        }
        return {state, obs};
    }

    if (fn == "cancel_pending_order") {
        const Order* o = find_order(state, str_param(call, "order_id"));
        if (o == nullptr) return {state, "Order not found"};
        if (o->status != "pending") return {state, "Order is not pending."};
        SandboxState next = state;
        next.orders[o - state.orders.data()].status = "cancelled";
        return {std::move(next), "Order cancelled successfully."};
    }

    if (fn == "modify_pending_order_address") {
        const Order* o = find_order(state, str_param(call, "order_id"));
        if (o == nullptr) return {state, "Order not found"};
        if (o->status != "pending") return {state, "Order is not pending."};
        SandboxState next = state;
        Order& target = next.orders[o - state.orders.data()];
        target.address1 = str_param(call, "address1");
        target.city = str_param(call, "city");
        target.state = str_param(call, "state");
        target.zip = str_param(call, "zip");
        return {std::move(next), "Order address updated successfully."};
    }

    if (fn == "return_delivered_order_items") {
        const Order* o = find_order(state, str_param(call, "order_id"));
        if (o == nullptr) return {state, "Order not found"};
        if (o->status != "delivered") return {state, "Order is not delivered."};
        std::vector<std::string> ids;
        for (const std::string& raw : split(str_param(call, "item_ids"), ',')) {
            std::string id = trim(raw);
            if (id.empty()) continue;
            bool in_order = std::any_of(o->items.begin(), o->items.end(),
                                        [&](const OrderItem& it) { return it.item_id == id; });
            if (!in_order) return {state, "Item not found in order: " + id};
            ids.push_back(id);
        }
        if (ids.empty()) return {state, "Missing required parameter: item_ids"};
        SandboxState next = state;
        Order& target = next.orders[o - state.orders.data()];
        target.status = "return_requested";
        target.returned_item_ids = ids;
        return {std::move(next), "Return requested successfully."};
    }

    if (fn == "list_all_product_types") {
        std::string obs = "Product types:";
        for (const Product& p : state.products) {
            obs += "\n- product_id: " + p.product_id + " | type: " + p.name;
        }
        return {state, obs};
    }

    if (fn == "get_product_details") {
        std::string product_id = str_param(call, "product_id");
        for (const Product& p : state.products) {
            if (p.product_id != product_id) continue;
            return {state, "product_id: " + p.product_id + "\nname: " + p.name +
                           "\nprice: " + format_price(p.price_cents)};
        }
        return {state, "Product not found"};
    }

    throw SandboxError("unhandled retail function: " + fn);
}

// ---------------------------------------------------------------------------
// World and task generation
// ---------------------------------------------------------------------------

namespace {

const std::array<const char*, 20> kFirstNames = {
    "Mia",   "Liam", "Sofia", "Ethan", "Yuki",  "Omar",  "Ivy",   "Lucas", "Emma",  "Raj",
    "Chloe", "Dan",  "Aisha", "Mateo", "Hana",  "Noor",  "Tariq", "Elena", "Jonas", "Priya"};

const std::array<const char*, 20> kLastNames = {
    "Li",    "Santos", "Johnson", "Kim",    "Ahmed", "Brown", "Sanchez", "Silva", "Lee",
    "Khan",  "Moore",  "Thomas",  "Garcia", "Martin", "Lopez", "Davis",  "Muller", "Costa",
    "Anand", "Wilson"};

const std::array<const char*, 12> kProductTypes = {
    "t-shirt",  "jacket",    "backpack",  "water bottle", "desk lamp",  "keyboard",
    "mouse",    "notebook",  "running shoes", "headphones", "phone case", "coffee mug"};

const std::array<const char*, 6> kStreets = {"Oak Lane",  "Maple Ave", "Cedar St",
                                             "Pine Rd",   "Elm Blvd",  "Birch Way"};
const std::array<const char*, 6> kCities = {"Springfield", "Riverton",  "Fairview",
                                            "Lakewood",    "Brookside", "Hillcrest"};
const std::array<const char*, 6> kStates = {"CA", "NY", "TX", "WA", "IL", "CO"};

std::string five_digits(SplitMix64& rng) {
    return std::to_string(10000 + rng.bounded(90000));
}

ToolCall make_call(const std::string& fn,
                   std::initializer_list<std::pair<std::string, ParamValue>> params) {
    ToolCall c;
    c.function = FunctionName(fn);
    for (auto& [k, v] : params) c.parameters[k] = v;
    return c;
}

const Order* order_with_status(const SandboxState& state, const std::string& user_id,
                               const std::string& status) {
    for (const Order& o : state.orders) {
        if (o.user_id == user_id && o.status == status) return &o;
    }
    return nullptr;
}

}  // namespace

SandboxState generate_retail_state(std::uint64_t seed) {
    SplitMix64 rng(seed ^ fnv1a64("retail-state"));
    SandboxState s;
    s.environment_id = "retail";
    s.rng_seed = seed;

    std::vector<std::string> firsts(kFirstNames.begin(), kFirstNames.end());
    std::vector<std::string> lasts(kLastNames.begin(), kLastNames.end());
    rng.shuffle(firsts);
    rng.shuffle(lasts);
    std::set<std::string> used_ids;
    for (size_t i = 0; i < 18; ++i) {
        RetailUser u;
        u.first_name = firsts[i];
        u.last_name = lasts[i];
        do {
            u.user_id = to_lower(u.first_name) + "_" + to_lower(u.last_name) + "_" +
                        std::to_string(1000 + rng.bounded(9000));
        } while (!used_ids.insert(u.user_id).second);
        u.email = to_lower(u.first_name) + "." + to_lower(u.last_name) +
                  std::to_string(10 + rng.bounded(90)) + "@mailbox.com";
        u.zip = five_digits(rng);
        s.users.push_back(std::move(u));
    }

    std::set<std::string> used_pids;
    for (size_t i = 0; i < kProductTypes.size(); ++i) {
        Product p;
        p.name = kProductTypes[i];
        do {
            p.product_id = "P" + std::to_string(1000000 + rng.bounded(9000000));
        } while (!used_pids.insert(p.product_id).second);
        p.price_cents = static_cast<std::int64_t>(500 + rng.bounded(14500));
        s.products.push_back(std::move(p));
    }

    // Each user gets exactly one pending or delivered order (alternating);
    // the first twelve users also get a cancelled one. Keeping at most one
    // pending and one delivered order per user makes "my pending order"
    // unambiguous in task texts.
    std::set<std::string> used_oids;
    std::set<std::string> used_iids;
    auto new_order = [&](const RetailUser& user, const std::string& status) {
        Order o;
        do {
            o.order_id = "#W" + std::to_string(1000000 + rng.bounded(9000000));
        } while (!used_oids.insert(o.order_id).second);
        o.user_id = user.user_id;
        o.status = status;
        o.address1 = std::to_string(10 + rng.bounded(990)) + " " +
                     kStreets[rng.bounded(kStreets.size())];
        o.city = kCities[rng.bounded(kCities.size())];
        o.state = kStates[rng.bounded(kStates.size())];
        o.zip = five_digits(rng);
        size_t item_count = 1 + rng.bounded(3);
        for (size_t k = 0; k < item_count; ++k) {
            const Product& p = s.products[rng.bounded(s.products.size())];
            OrderItem item;
            do {
                item.item_id = "I" + std::to_string(1000000 + rng.bounded(9000000));
            } while (!used_iids.insert(item.item_id).second);
            item.product_id = p.product_id;
            item.name = p.name;
            item.price_cents = p.price_cents;
            o.items.push_back(std::move(item));
        }
        return o;
    };

    for (size_t i = 0; i < s.users.size(); ++i) {
        s.orders.push_back(new_order(s.users[i], i % 2 == 0 ? "pending" : "delivered"));
    }
    for (size_t i = 0; i < 12; ++i) {
        s.orders.push_back(new_order(s.users[i], "cancelled"));
    }

    return s;
}

std::vector<TaskInstance> generate_retail_tasks(std::size_t count, std::uint64_t seed) {
    SandboxState world = generate_retail_state(seed);
    SplitMix64 rng(seed ^ fnv1a64("retail-tasks"));
    std::vector<TaskInstance> tasks;
    std::set<std::string> used_texts;

    std::string initial_digest = state_digest(world);

    std::vector<const RetailUser*> pending_users;
    std::vector<const RetailUser*> delivered_users;
    for (const RetailUser& u : world.users) {
        if (order_with_status(world, u.user_id, "pending")) pending_users.push_back(&u);
        if (order_with_status(world, u.user_id, "delivered")) delivered_users.push_back(&u);
    }

    while (tasks.size() < count) {
        std::string text;
        std::vector<ToolCall> calls;

        switch (rng.bounded(4)) {
            case 0: {  // cancel by name + zip
                const RetailUser& u = *pending_users[rng.bounded(pending_users.size())];
                const Order* o = order_with_status(world, u.user_id, "pending");
                text = "My name is " + u.first_name + " " + u.last_name + " and my zip code is " +
                       u.zip + ". Please cancel my pending order.";
                calls = {make_call("find_user_id_by_name_zip", {{"first_name", u.first_name},
                                                                {"last_name", u.last_name},
                                                                {"zip", u.zip}}),
                         make_call("get_user_details", {{"user_id", u.user_id}}),
                         make_call("cancel_pending_order", {{"order_id", o->order_id}})};
                break;
            }
            case 1: {  // cancel by email
                const RetailUser& u = *pending_users[rng.bounded(pending_users.size())];
                const Order* o = order_with_status(world, u.user_id, "pending");
                text = "My email is " + u.email + ". Please cancel my pending order.";
                calls = {make_call("find_user_id_by_email", {{"email", u.email}}),
                         make_call("get_user_details", {{"user_id", u.user_id}}),
                         make_call("cancel_pending_order", {{"order_id", o->order_id}})};
                break;
            }
            case 2: {  // change delivery address of the pending order
                const RetailUser& u = *pending_users[rng.bounded(pending_users.size())];
                const Order* o = order_with_status(world, u.user_id, "pending");
                std::string address1 = std::to_string(10 + rng.bounded(990)) + " " +
                                       kStreets[rng.bounded(kStreets.size())];
                std::string city = kCities[rng.bounded(kCities.size())];
                std::string st = kStates[rng.bounded(kStates.size())];
                std::string zip = five_digits(rng);
                text = "My name is " + u.first_name + " " + u.last_name + " and my zip code is " +
                       u.zip + ". Please change the delivery address of my pending order to " +
                       address1 + ", " + city + ", " + st + " " + zip + ".";
                calls = {make_call("find_user_id_by_name_zip", {{"first_name", u.first_name},
                                                                {"last_name", u.last_name},
                                                                {"zip", u.zip}}),
                         make_call("get_user_details", {{"user_id", u.user_id}}),
                         make_call("modify_pending_order_address", {{"order_id", o->order_id},
                                                                    {"address1", address1},
                                                                    {"city", city},
                                                                    {"state", st},
                                                                    {"zip", zip}})};
                break;
            }
            default: {  // return everything from the delivered order
                const RetailUser& u = *delivered_users[rng.bounded(delivered_users.size())];
                const Order* o = order_with_status(world, u.user_id, "delivered");
                std::vector<std::string> ids;
                for (const OrderItem& item : o->items) ids.push_back(item.item_id);
                text = "My email is " + u.email +
                       ". I would like to return all items from my delivered order.";
                calls = {make_call("find_user_id_by_email", {{"email", u.email}}),
                         make_call("get_user_details", {{"user_id", u.user_id}}),
                         make_call("get_order_details", {{"order_id", o->order_id}}),
                         make_call("return_delivered_order_items",
                                   {{"order_id", o->order_id}, {"item_ids", join(ids, ",")}})};
                break;
            }
        }

        if (!used_texts.insert(text).second) continue;

        TaskInstance task;
        task.task_id = "retail-" + std::to_string(seed) + "-" + std::to_string(tasks.size());
        task.text = text;
        task.environment_id = "retail";
        task.initial_state = world;
        task.canonical_calls = calls;
        task.seed = seed;

        SandboxState cur = world;
        for (const ToolCall& c : calls) cur = execute(cur, c).state;
        task.goal_state_digest = state_digest(cur);
        if (task.goal_state_digest == initial_digest) {
            throw SandboxError("generated retail task does not change the environment: " + text);
        }
        tasks.push_back(std::move(task));
    }

    return tasks;
}

}  // namespace apilearn::sandbox::detail
