#pragma once

namespace wicklab {
inline constexpr const char* kVersion = "wicklab 0.1.0";
}
