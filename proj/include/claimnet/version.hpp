#pragma once

namespace claimnet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace claimnet
