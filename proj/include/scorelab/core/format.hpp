#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>

namespace scorelab {

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace scorelab
