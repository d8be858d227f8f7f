#pragma once

namespace wavetail {
inline constexpr const char* kVersion = "0.1.0";
}
