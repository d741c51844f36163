#pragma once

//! \file csv.hpp
//! \brief Minimal CSV helpers: shortest round-trip number formatting and row splitting.

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

#include "vpid/errors.hpp"

namespace vpid::csv {

//! Shortest decimal representation that parses back to the same double.
inline std::string format(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view field) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw ConfigError("not a number: '" + std::string(field) + "'");
    return v;
}

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

//! Writes values joined by commas and terminated by a newline.
template <typename Range>
void write_row(std::ostream& os, const Range& values) {
    bool first = true;
    for (const auto& v : values) {
        if (!first) os << ',';
        first = false;
        if constexpr (std::is_arithmetic_v<std::decay_t<decltype(v)>>)
            os << format(static_cast<double>(v));
        else
            os << v;
    }
    os << '\n';
}

}  // namespace vpid::csv
