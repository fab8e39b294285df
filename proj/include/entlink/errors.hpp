#pragma once

#include <stdexcept>
#include <string>

namespace entlink {

// A mode name was requested that the layout does not contain.
struct UnknownMode : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Two states (or a state and an operator) live on different mode layouts.
struct LayoutMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A ladder operator tried to push population past the truncation cap.
struct TruncationOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A truncated evolution lost more norm than the caller allowed.
struct LeakageExceeded : std::runtime_error {
    LeakageExceeded(double leaked, double tolerance, int n_max)
        : std::runtime_error("truncated evolution leaked " + std::to_string(leaked) +
                             " of the squared norm (tolerance " + std::to_string(tolerance) +
                             ", n_max " + std::to_string(n_max) +
                             "); raise the truncation or loosen the tolerance"),
          leaked(leaked),
          tolerance(tolerance),
          n_max(n_max) {}

    double leaked;
    double tolerance;
    int n_max;
};

// A polarization measurement was asked of a beam that does not carry exactly
// one photon on the measured side.
struct NotSingularlyOccupied : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A confusion matrix row contained no events, so conditionals are undefined.
struct DegenerateMatrix : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A transition matrix row is not a probability vector.
struct NonStochasticRows : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace entlink
