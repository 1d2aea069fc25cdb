#pragma once

namespace coinfect {
inline constexpr const char* kVersion = "0.1.0";
}
