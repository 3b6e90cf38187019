#pragma once

#include <charconv>
#include <string>

namespace kergap {

// Shortest decimal form that round-trips the exact double, so written files
// can be compared and replayed bit-exactly.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace kergap
