#pragma once

namespace alloylab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace alloylab
