#pragma once

namespace oec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace oec
