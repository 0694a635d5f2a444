#pragma once

namespace pvkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pvkit
