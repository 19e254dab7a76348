#pragma once

namespace lingrow {

inline constexpr const char* kVersion = "0.1.0";

} // namespace lingrow
