#pragma once

namespace entswitch {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace entswitch
