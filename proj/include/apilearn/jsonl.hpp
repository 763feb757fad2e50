#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "apilearn/core.hpp"

namespace apilearn {

// JSONL persistence: one object per line, LF endings. load(save(x)) == x
// field-for-field. A malformed line fails the whole load with its 1-based
// line number; partial results are never returned.

template <class T>
std::size_t save_jsonl(const std::vector<T>& items, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    for (const T& item : items) {
        out << json(item).dump() << "\n";
    }
    if (!out) throw Error("write failed: " + path.string());
    return items.size();
}

template <class T>
std::vector<T> load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    std::vector<T> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            throw Error(path.string() + ": line " + std::to_string(line_no) +
                        ": blank line in JSONL file");
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(path.string() + ": line " + std::to_string(line_no) +
                        ": malformed JSON");
        }
        try {
            items.push_back(j.get<T>());
        } catch (const std::exception& e) {
            throw Error(path.string() + ": line " + std::to_string(line_no) + ": " +
                        e.what());
        }
    }
    return items;
}

}  // namespace apilearn
