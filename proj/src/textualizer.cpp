#include "apilearn/textualizer.hpp"

#include "apilearn/rng.hpp"
#include "apilearn/sandbox.hpp"
#include "apilearn/splitter.hpp"

#include <set>

namespace apilearn {

std::vector<std::string> extract_parameters(const std::vector<Demonstration>& demos_f) {
    std::set<std::string> names;
    const FunctionName* function = nullptr;
    for (const Demonstration& d : demos_f) {
        if (function == nullptr) {
            function = &d.function;
        } else if (d.function != *function) {
            throw Error("extract_parameters: demos mix functions " + function->str() + " and " +
                        d.function.str());
        }
        for (const auto& [name, _] : d.call.parameters) names.insert(name);
    }
    return {names.begin(), names.end()};
}

Textualization dxd(const DemosByFunction& train_demos, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw Error("dxd requires n >= 1");
    Textualization t;
    t.method = Method::DxD;
    t.metadata = {n, static_cast<std::int64_t>(seed)};
    for (const auto& [function, demos] : train_demos) {
        if (demos.size() < n) continue;
        std::string block;
        for (const Demonstration& d : sample_demonstrations(demos, n, seed)) {
            if (!block.empty()) block += "\n";
            block += render_demonstration(d);
        }
        t.per_function[function] = block;
    }
    return t;
}

std::string generator_user_prompt(const FunctionName& function,
                                  const std::vector<Demonstration>& sample,
                                  const std::vector<std::string>& parameters,
                                  const PromptAsset& asset) {
    validate_prompt_asset(asset);
    std::string demos_text;
    for (const Demonstration& d : sample) {
        if (!demos_text.empty()) demos_text += "\n";
        demos_text += render_demonstration(d);
    }
    std::string parameter_list = parameters.empty() ? "(none observed)" : join(parameters, ", ");
    return fill_placeholders(asset.text, {{"function_name", function.str()},
                                          {"demonstrations", demos_text},
                                          {"parameter_list", parameter_list}});
}

namespace {

std::string generate_doc(const FunctionName& function, const std::vector<Demonstration>& sample,
                         Backend& backend, const PromptAsset& asset) {
    ChatRequest request;
    request.system = system_line(PromptRole::DocGenerator);
    request.messages.push_back(
        {ChatRole::User, generator_user_prompt(function, sample, extract_parameters(sample),
                                               asset)});
    std::string doc;
    try {
        doc = backend.complete(request);
    } catch (const BackendError& e) {
        throw Error("document generation failed for " + function.str() + ": " + e.what());
    }
    if (trim(doc).empty()) {
        throw Error("document generator returned an empty document for " + function.str());
    }
    return doc;
}

}  // namespace

Textualization gd(const DemosByFunction& train_demos, std::size_t n, std::uint64_t seed,
                  Backend& backend, const PromptAsset& asset) {
    if (n < 1) throw Error("gd requires n >= 1");
    Textualization t;
    t.method = Method::GD;
    t.metadata = {n, static_cast<std::int64_t>(seed)};
    for (const auto& [function, demos] : train_demos) {
        if (demos.size() < n) continue;
        t.per_function[function] =
            generate_doc(function, sample_demonstrations(demos, n, seed), backend, asset);
    }
    return t;
}

std::string example_calls_section(const std::vector<Demonstration>& sample) {
    std::string out = "Example Calls:";
    for (const Demonstration& d : sample) {
        out += "\n" + render_call(d.call);
    }
    return out;
}

Textualization gdwc(const DemosByFunction& train_demos, std::size_t n, std::uint64_t seed,
                    Backend& backend, const PromptAsset& asset) {
    Textualization t = gd(train_demos, n, seed, backend, asset);
    t.method = Method::GDwC;
    for (auto& [function, block] : t.per_function) {
        block += "\n\n" + example_calls_section(
                               sample_demonstrations(train_demos.at(function), n, seed));
    }
    return t;
}

Textualization od(const std::string& environment_id) {
    return sandbox::ground_truth_docs(environment_id);
}

std::vector<std::string> lint_documentation(const Textualization& t) {
    std::vector<std::string> warnings;
    for (const auto& [function, block] : t.per_function) {
        if (!contains_ci(block, "parameter")) {
            warnings.push_back(function.str() + ": document has no parameter section");
        }
    }
    return warnings;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

const char* kProvenancePrefix = "[provenance] ";

}  // namespace

void save_textualization(const Textualization& t, const std::filesystem::path& dir,
                         const std::string& model_label) {
    std::filesystem::create_directories(dir);
    json files = json::array();
    for (const auto& [function, block] : t.per_function) {
        std::string filename = function.str() + ".txt";
        std::string header = std::string(kProvenancePrefix) + "method=" + to_string(t.method) +
                             " N=" + std::to_string(t.metadata.n) +
                             " seed=" + std::to_string(t.metadata.seed) + " model=" + model_label;
        write_file(dir / filename, header + "\n" + block);
        files.push_back(json{{"function", function.str()},
                             {"file", filename},
                             {"digest", hex64(fnv1a64(block))}});
    }
    json manifest{{"method", to_string(t.method)},
                  {"n", t.metadata.n},
                  {"seed", t.metadata.seed},
                  {"model", model_label},
                  {"files", files}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Textualization load_textualization(const std::filesystem::path& dir) {
    json manifest = json::parse(read_file(dir / "manifest.json"));
    Textualization t;
    t.method = method_from_string(manifest.at("method").get<std::string>());
    t.metadata.n = manifest.at("n").get<std::size_t>();
    t.metadata.seed = manifest.at("seed").get<std::int64_t>();
    for (const json& entry : manifest.at("files")) {
        std::string content = read_file(dir / entry.at("file").get<std::string>());
        // Strip the provenance header line; it is audit metadata, not part of
        // the textualization shown to the agent.
        if (content.rfind(kProvenancePrefix, 0) == 0) {
            auto nl = content.find('\n');
            content = nl == std::string::npos ? "" : content.substr(nl + 1);
        }
        FunctionName function(entry.at("function").get<std::string>());
        std::string expected = entry.at("digest").get<std::string>();
        if (hex64(fnv1a64(content)) != expected) {
            throw Error("textualization file " + entry.at("file").get<std::string>() +
                        " does not match its manifest digest");
        }
        t.per_function[function] = content;
    }
    return t;
}

std::string textualization_digest(const Textualization& t) {
    json j = json::object();
    for (const auto& [function, block] : t.per_function) j[function.str()] = block;
    return hex64(fnv1a64(json{{"method", to_string(t.method)}, {"blocks", j}}.dump()));
}

}  // namespace apilearn
