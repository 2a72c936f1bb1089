#pragma once

namespace edis {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace edis
