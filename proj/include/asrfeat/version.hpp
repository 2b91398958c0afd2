#pragma once

namespace asrfeat {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace asrfeat
