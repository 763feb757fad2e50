#pragma once

#include <map>
#include <string>
#include <vector>

#include "apilearn/util.hpp"

namespace apilearn {

enum class PromptRole { DocGenerator, DocUpdater, Judge, Summarizer, AgentSystem };

std::string to_string(PromptRole role);
PromptRole prompt_role_from_string(std::string_view s);

// Editable user-message template for one role. Each role's declared
// placeholders must appear exactly once; the short system line sent with the
// request is fixed per role.
struct PromptAsset {
    PromptRole role = PromptRole::DocGenerator;
    std::string text;
};

const PromptAsset& default_prompt(PromptRole role);

const std::vector<std::string>& declared_placeholders(PromptRole role);

// Throws Error when a declared placeholder is missing or duplicated.
void validate_prompt_asset(const PromptAsset& asset);

std::string fill_placeholders(const std::string& tmpl,
                              const std::map<std::string, std::string>& values);

// Fixed per-role system line.
std::string system_line(PromptRole role);

// Loads `<role>.txt` overrides from a directory; missing files fall back to
// the built-in defaults. Every loaded asset is validated.
PromptAsset load_prompt(PromptRole role, const std::string& prompts_dir);

}  // namespace apilearn
