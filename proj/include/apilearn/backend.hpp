#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apilearn/core.hpp"

namespace apilearn {

// Pluggable chat-completion backends: a live HTTP client speaking the
// OpenAI-compatible wire protocol, a deterministic scripted backend, and a
// record/replay pair for offline tests.

enum class ChatRole { User, Assistant };

struct ChatMessage {
    ChatRole role = ChatRole::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::string system;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    std::string model = "default";

    bool operator==(const ChatRequest&) const = default;
};

class BackendError : public Error {
public:
    using Error::Error;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
    std::size_t calls() const { return calls_; }

protected:
    std::size_t calls_ = 0;
};

// Covers system + messages + temperature + model.
std::string request_digest(const ChatRequest& request);

json request_to_json(const ChatRequest& request);

// --- scripted ---

struct ScriptRule {
    enum class Matcher { Exact, Contains, Regex };
    Matcher matcher = Matcher::Exact;
    std::string pattern;
    std::string response;
    std::optional<int> max_uses;
};

std::vector<ScriptRule> load_script_rules(const std::filesystem::path& path);

// Applies the first matching rule, in order, against the last user message.
// No matching rule is an error quoting the unmatched message, never a silent
// default.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptRule> rules);
    std::string complete(const ChatRequest& request) override;
    std::string name() const override { return "scripted"; }

private:
    std::vector<ScriptRule> rules_;
    std::vector<int> uses_;
};

// Computes responses from a function; test and oracle plumbing.
class CallbackBackend : public Backend {
public:
    using Fn = std::function<std::string(const ChatRequest&)>;
    explicit CallbackBackend(Fn fn, std::string label = "callback")
        : fn_(std::move(fn)), label_(std::move(label)) {}
    std::string complete(const ChatRequest& request) override {
        ++calls_;
        return fn_(request);
    }
    std::string name() const override { return label_; }

private:
    Fn fn_;
    std::string label_;
};

// --- record / replay ---

void record_transcript(const ChatRequest& request, const std::string& response,
                       const std::filesystem::path& store);

class RecordingBackend : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> inner, std::filesystem::path store);
    std::string complete(const ChatRequest& request) override;
    std::string name() const override { return "record(" + inner_->name() + ")"; }

private:
    std::shared_ptr<Backend> inner_;
    std::filesystem::path store_;
};

class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(const std::filesystem::path& store);
    std::string complete(const ChatRequest& request) override;
    std::string name() const override { return "replay"; }

private:
    struct Entry {
        std::string canonical_request;
        std::string response;
    };
    std::map<std::string, Entry> by_digest_;
    std::filesystem::path store_;
};

// --- live HTTP ---

struct LiveBackendConfig {
    std::string base_url;  // e.g. "http://localhost:8000/v1"
    std::string model;
    std::string api_key;  // resolved from the environment by the caller
    double temperature = 0.0;
    int timeout_seconds = 120;
    int max_retries = 3;
};

class LiveBackend : public Backend {
public:
    explicit LiveBackend(LiveBackendConfig config);
    std::string complete(const ChatRequest& request) override;
    std::string name() const override { return "live(" + config_.model + ")"; }

private:
    LiveBackendConfig config_;
};

}  // namespace apilearn
