// version.hpp

#pragma once

namespace qo {

inline constexpr const char* version = "1.0.0";

} // namespace qo
