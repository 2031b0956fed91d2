#pragma once

namespace cmcflow {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cmcflow
