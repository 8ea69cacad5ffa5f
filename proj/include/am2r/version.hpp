#pragma once

namespace am2r {

inline constexpr const char* kVersion = "0.1.0";

}
