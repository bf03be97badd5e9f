#pragma once

namespace symstab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace symstab
