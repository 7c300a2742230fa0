#pragma once

namespace frsh {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace frsh
