#pragma once

namespace gradiometry {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gradiometry
