// errors.hpp — Exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace qo {

// Thermal tail cannot be brought below the requested tolerance within the level cap.
struct TruncationCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The dynamical map is not invertible at the requested time (1 - A - B or |C| at zero).
struct SingularMapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A truncated Hilbert space exceeds the configured memory bound.
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qo
