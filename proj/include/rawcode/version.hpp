#pragma once

namespace rawcode {

inline constexpr const char* kVersion = "0.1.0";

} // namespace rawcode
