#pragma once

#include <stdexcept>
#include <string>

namespace hrtrust {

/// Base of every exception thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A precondition on caller-provided values was violated.
struct InvalidInput : Error {
    using Error::Error;
};

/// Input is well formed but geometrically or statistically degenerate
/// (zero vector, zero variance, single class, ...).
struct DegenerateInput : Error {
    using Error::Error;
};

/// The workspace layout cannot satisfy the interaction parameters.
struct InfeasibleLayout : Error {
    using Error::Error;
};

struct NotFound : Error {
    using Error::Error;
};

}  // namespace hrtrust
