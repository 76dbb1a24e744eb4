#pragma once

#include <charconv>
#include <string>

namespace fvgrad {

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace fvgrad
