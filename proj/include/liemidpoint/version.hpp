#pragma once

namespace lmp {

inline constexpr const char kVersion[] = "0.1.0";

} // namespace lmp
