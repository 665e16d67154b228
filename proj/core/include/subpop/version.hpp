#pragma once

namespace subpop {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace subpop
