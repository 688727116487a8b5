#pragma once

#include <stdexcept>

namespace nmrbell {

// File system failures (missing file, unwritable path). CLI exit code 4.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed content or configuration. CLI exit code 2.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An iterative solver failed to converge. CLI exit code 3.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nmrbell
