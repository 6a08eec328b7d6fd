#pragma once

namespace nsf {
inline constexpr const char kVersionString[] = "0.1.0";
}
