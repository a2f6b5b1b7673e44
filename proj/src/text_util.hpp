#pragma once

// Small tokenizing helpers shared by the text-format parsers.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "sbsim/error.hpp"

namespace sbsim::detail {

struct Line {
    int number = 0;  // 1-based
    std::string_view text;
};

inline std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    int number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++number;
        if (!(end == text.size() && line.empty())) lines.push_back({number, line});
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline bool is_blank_or_comment(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

inline std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = s.find(sep, start);
        out.push_back(s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

inline bool try_parse_double(std::string_view token, double& out) {
    if (token.empty()) return false;
    const std::string s(token);
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno != ERANGE;
}

inline double parse_double(std::string_view token, std::string_view what, const std::string& source, int line,
                           ErrorCode code = ErrorCode::ConfigError) {
    double v;
    if (!try_parse_double(token, v)) {
        throw Error(code, "expected a number for " + std::string(what) + ", got '" + std::string(token) + "'",
                    source, line);
    }
    return v;
}

inline long long parse_int(std::string_view token, std::string_view what, const std::string& source, int line,
                           ErrorCode code = ErrorCode::ConfigError) {
    const std::string s(token);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        throw Error(code, "expected an integer for " + std::string(what) + ", got '" + s + "'", source, line);
    }
    return v;
}

/// Round-trippable decimal.
inline std::string format_double(double v) {
    char buf[40];
    for (int precision = 6; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

/// Fixed-point formatting used by report files.
inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace sbsim::detail
