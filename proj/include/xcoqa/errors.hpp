#pragma once

#include <stdexcept>
#include <string>

namespace xcoqa {

// Input files that fail to parse or violate a declared schema.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Duplicate ids, missing references, inconsistent collections.
struct conflict_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments at an API boundary (empty negatives, epsilon = 0, ...).
struct argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Unsupported language or missing resource.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Vector shape / normalization violations.
struct shape_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace xcoqa
