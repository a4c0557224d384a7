#pragma once

namespace diffpath {

inline constexpr const char* tool_version = "0.1.0";

}  // namespace diffpath
