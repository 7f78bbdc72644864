#pragma once

namespace bhc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bhc
