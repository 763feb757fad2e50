#include "apilearn/backend.hpp"

#include "apilearn/jsonl.hpp"
#include "apilearn/rng.hpp"

#include <chrono>
#include <fstream>
#include <regex>
#include <thread>

#include <httplib.h>

namespace apilearn {

json request_to_json(const ChatRequest& request) {
    json messages = json::array();
    for (const ChatMessage& m : request.messages) {
        messages.push_back(json{{"role", m.role == ChatRole::User ? "user" : "assistant"},
                                {"content", m.content}});
    }
    json j{{"system", request.system},
           {"messages", messages},
           {"temperature", request.temperature},
           {"model", request.model}};
    if (request.seed) j["seed"] = *request.seed;
    return j;
}

std::string request_digest(const ChatRequest& request) {
    json j = request_to_json(request);
    j.erase("seed");  // digest covers system + messages + temperature + model
    return hex64(fnv1a64(j.dump()));
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

std::vector<ScriptRule> load_script_rules(const std::filesystem::path& path) {
    json j = json::parse(read_file(path));
    if (!j.is_array()) throw Error("script file must be a JSON array: " + path.string());
    std::vector<ScriptRule> rules;
    for (const json& entry : j) {
        ScriptRule rule;
        std::string matcher = entry.value("matcher", "contains");
        if (matcher == "exact") rule.matcher = ScriptRule::Matcher::Exact;
        else if (matcher == "contains") rule.matcher = ScriptRule::Matcher::Contains;
        else if (matcher == "regex") rule.matcher = ScriptRule::Matcher::Regex;
        else throw Error("unknown matcher '" + matcher + "' in " + path.string());
        rule.pattern = entry.at("pattern").get<std::string>();
        rule.response = entry.at("response").get<std::string>();
        if (entry.contains("max_uses")) rule.max_uses = entry.at("max_uses").get<int>();
        rules.push_back(std::move(rule));
    }
    return rules;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules)
    : rules_(std::move(rules)), uses_(rules_.size(), 0) {
    for (const ScriptRule& r : rules_) {
        if (r.pattern.empty()) throw Error("script rule pattern must be non-empty");
    }
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    ++calls_;
    const std::string* last_user = nullptr;
    for (const ChatMessage& m : request.messages) {
        if (m.role == ChatRole::User) last_user = &m.content;
    }
    if (last_user == nullptr) throw BackendError("scripted backend: request has no user message");

    for (size_t i = 0; i < rules_.size(); ++i) {
        const ScriptRule& rule = rules_[i];
        if (rule.max_uses && uses_[i] >= *rule.max_uses) continue;
        bool matched = false;
        switch (rule.matcher) {
            case ScriptRule::Matcher::Exact: matched = *last_user == rule.pattern; break;
            case ScriptRule::Matcher::Contains:
                matched = last_user->find(rule.pattern) != std::string::npos;
                break;
            case ScriptRule::Matcher::Regex:
                matched = std::regex_search(*last_user, std::regex(rule.pattern));
                break;
        }
        if (matched) {
            ++uses_[i];
            return rule.response;
        }
    }
    throw BackendError("scripted backend: no rule matched message: \"" + *last_user + "\"");
}

// ---------------------------------------------------------------------------
// Record / replay
// ---------------------------------------------------------------------------

void record_transcript(const ChatRequest& request, const std::string& response,
                       const std::filesystem::path& store) {
    if (store.has_parent_path()) std::filesystem::create_directories(store.parent_path());
    std::ofstream out(store, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot open transcript store: " + store.string());
    json line{{"digest", request_digest(request)},
              {"request", request_to_json(request)},
              {"response", response}};
    out << line.dump() << "\n";
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner, std::filesystem::path store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

std::string RecordingBackend::complete(const ChatRequest& request) {
    ++calls_;
    std::string response = inner_->complete(request);
    record_transcript(request, response, store_);
    return response;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& store) : store_(store) {
    std::ifstream in(store, std::ios::binary);
    if (!in) throw Error("cannot open transcript store: " + store.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(store.string() + ": line " + std::to_string(line_no) +
                        ": malformed JSON");
        }
        Entry e;
        e.canonical_request = j.at("request").dump();
        e.response = j.at("response").get<std::string>();
        by_digest_[j.at("digest").get<std::string>()] = std::move(e);
    }
}

std::string ReplayBackend::complete(const ChatRequest& request) {
    ++calls_;
    std::string digest = request_digest(request);
    auto it = by_digest_.find(digest);
    if (it != by_digest_.end()) return it->second.response;

    // Nearest match by longest common prefix of the canonical request text,
    // to make misses debuggable.
    std::string canonical = request_to_json(request).dump();
    std::string best_digest;
    size_t best_prefix = 0;
    for (const auto& [d, entry] : by_digest_) {
        size_t k = 0;
        while (k < canonical.size() && k < entry.canonical_request.size() &&
               canonical[k] == entry.canonical_request[k]) {
            ++k;
        }
        if (k >= best_prefix) {
            best_prefix = k;
            best_digest = d;
        }
    }
    std::string hint = by_digest_.empty()
                           ? "store is empty"
                           : "nearest recorded request is digest " + best_digest +
                                 " (diverges at byte " + std::to_string(best_prefix) + ")";
    throw BackendError("replay miss for digest " + digest + " in " + store_.string() + "; " +
                       hint);
}

// ---------------------------------------------------------------------------
// LiveBackend
// ---------------------------------------------------------------------------

namespace {

// Splits "http://host:port/v1" into client origin and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error("base_url must include a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

bool retryable_status(int status) {
    return status == 429 || status >= 500;
}

}  // namespace

LiveBackend::LiveBackend(LiveBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw Error("live backend requires a base_url");
}

std::string LiveBackend::complete(const ChatRequest& request) {
    ++calls_;
    auto [origin, prefix] = split_base_url(config_.base_url);

    json body;
    body["model"] = request.model.empty() || request.model == "default" ? config_.model
                                                                        : request.model;
    body["temperature"] = request.temperature;
    if (request.seed) body["seed"] = *request.seed;
    json messages = json::array();
    messages.push_back(json{{"role", "system"}, {"content", request.system}});
    for (const ChatMessage& m : request.messages) {
        messages.push_back(json{{"role", m.role == ChatRole::User ? "user" : "assistant"},
                                {"content", m.content}});
    }
    body["messages"] = messages;

    httplib::Client client(origin);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(250 << (attempt - 1)));
        }
        auto res = client.Post(prefix + "/chat/completions", headers, payload,
                               "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            json response = json::parse(res->body, nullptr, false);
            if (response.is_discarded()) {
                throw BackendError("live backend: response is not JSON: " +
                                   res->body.substr(0, 200));
            }
            try {
                return response.at("choices").at(0).at("message").at("content")
                    .get<std::string>();
            } catch (const std::exception& e) {
                throw BackendError(std::string("live backend: unexpected response shape: ") +
                                   e.what() + ": " + res->body.substr(0, 200));
            }
        }
        if (!retryable_status(res->status)) {
            throw BackendError("live backend: HTTP " + std::to_string(res->status) + ": " +
                               res->body.substr(0, 200));
        }
        last_error = "HTTP " + std::to_string(res->status);
    }
    throw BackendError("live backend: request failed after " +
                       std::to_string(config_.max_retries + 1) + " attempts; last error: " +
                       last_error);
}

}  // namespace apilearn
