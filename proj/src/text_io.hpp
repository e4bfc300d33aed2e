// SPDX-License-Identifier: Apache-2.0
//
// Small helpers shared by the plain-text file readers.

#pragma once

#include "cfmimo/types.hpp"

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace cfmimo::detail {

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline bool is_blank_or_comment(std::string_view line)
{
    const auto t = trim(line);
    return t.empty() || t.front() == '#';
}

inline std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view s, const std::string& file, std::size_t line)
{
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ParseError(file, line, "malformed number '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s, const std::string& file, std::size_t line)
{
    long v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end)
        throw ParseError(file, line, "malformed integer '" + std::string(s) + "'");
    return v;
}

}  // namespace cfmimo::detail
