#pragma once

namespace subres {
inline constexpr const char* version = "0.1.0";
}
