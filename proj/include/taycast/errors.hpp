#pragma once

#include <stdexcept>

namespace taycast {

// Dimension or head-count mismatch between operands.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite or otherwise unusable numeric input.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed text in a file being read; messages carry the row number.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration values (manifest fields, split fractions, specs).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Series too short to produce the requested windows or segments.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite state produced during a recursive rollout; names the substep.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace taycast
