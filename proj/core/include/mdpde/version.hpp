#pragma once

namespace mdpde {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mdpde
