#pragma once

#include <divprio/prioritizer.hpp>

#include <filesystem>
#include <fstream>

namespace divprio {

enum class OrderFormat { json, text };

/// JSON order record. Timing fields are left out when `with_timings` is false
/// so that repeated runs produce byte-identical files.
inline nlohmann::json order_to_json(const PrioritizedOrder& o, bool with_timings = true) {
    nlohmann::json j;
    j["technique"] = o.technique;
    j["params"] = o.params;
    if (o.seed) j["seed"] = *o.seed;
    j["order"] = o.order;
    j["scores"] = o.scores;
    if (with_timings) {
        j["prep_seconds"] = o.prep_seconds;
        j["algo_seconds"] = o.algo_seconds;
    }
    return j;
}

inline std::string format_order(const PrioritizedOrder& o, OrderFormat fmt, bool with_timings = true) {
    if (fmt == OrderFormat::json) return order_to_json(o, with_timings).dump(2) + "\n";
    std::string out;
    for (const auto& id : o.order) {
        out += id;
        out += '\n';
    }
    return out;
}

/// Test ids from an order file: either the JSON record or one id per line.
inline std::vector<std::string> parse_order_ids(std::string_view text) {
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw InputError(std::string("order file is not valid JSON: ") + e.what());
        }
        if (!j.contains("order") || !j["order"].is_array()) throw InputError("order file has no 'order' array");
        std::vector<std::string> ids;
        for (const auto& v : j["order"]) {
            if (!v.is_string()) throw InputError("order entries must be strings");
            ids.push_back(v.get<std::string>());
        }
        return ids;
    }
    std::vector<std::string> ids;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) ids.emplace_back(line);
    }
    return ids;
}

inline std::vector<std::string> load_order_ids(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw InputError("order file not found: '" + path.string() + "'");
    auto raw = read_file_bytes(path);
    return parse_order_ids(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
}

}  // namespace divprio
