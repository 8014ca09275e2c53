#pragma once

namespace soilph {
inline constexpr const char* kVersion = "0.3.0";
}
