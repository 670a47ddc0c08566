#pragma once

// Ordered "key = value" text blocks used for config files and checkpoint
// headers.

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tomofuse/error.hpp"

namespace tomofuse {

class KeyValues {
public:
    void set(const std::string& key, std::string value) {
        for (auto& [k, v] : items_) {
            if (k == key) {
                v = std::move(value);
                return;
            }
        }
        items_.emplace_back(key, std::move(value));
    }

    std::optional<std::string> get(std::string_view key) const {
        for (const auto& [k, v] : items_) {
            if (k == key) return v;
        }
        return std::nullopt;
    }

    std::string require(std::string_view key) const {
        auto v = get(key);
        if (!v) throw Error(ErrorCode::InvalidConfig, "missing key " + std::string(key));
        return *v;
    }

    const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

    std::string to_text() const {
        std::string out;
        for (const auto& [k, v] : items_) out += k + " = " + v + "\n";
        return out;
    }

    // Parses "key = value" lines; '#' starts a comment, blank lines are skipped.
    static KeyValues parse(std::string_view text, std::string_view origin = "<text>") {
        KeyValues kv;
        std::istringstream in{std::string(text)};
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const auto trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string_view::npos) {
                throw Error(ErrorCode::InvalidConfig,
                            std::string(origin) + ":" + std::to_string(lineno) + ": expected key = value");
            }
            const auto key = trim(trimmed.substr(0, eq));
            if (key.empty()) {
                throw Error(ErrorCode::InvalidConfig, std::string(origin) + ":" + std::to_string(lineno) + ": empty key");
            }
            kv.set(std::string(key), std::string(trim(trimmed.substr(eq + 1))));
        }
        return kv;
    }

    static std::string_view trim(std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<bool> parse_bool(std::string_view s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    return std::nullopt;
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find(sep, start);
        const auto part = KeyValues::trim(s.substr(start, end == std::string_view::npos ? s.size() - start : end - start));
        if (!part.empty()) out.emplace_back(part);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

}  // namespace tomofuse
