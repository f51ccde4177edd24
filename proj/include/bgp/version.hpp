#pragma once

namespace bgp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bgp
