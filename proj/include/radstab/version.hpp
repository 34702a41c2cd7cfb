#pragma once

namespace radstab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace radstab
