#pragma once

#include <string_view>

namespace genie {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kProgram = "genie";

}  // namespace genie
