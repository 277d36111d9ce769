#pragma once

namespace scorelab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace scorelab
