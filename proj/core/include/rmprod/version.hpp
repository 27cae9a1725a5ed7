#pragma once

namespace rmprod {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rmprod
