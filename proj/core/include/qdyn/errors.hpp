#pragma once

#include <stdexcept>

namespace qdyn {

/// Incompatible matrix/vector dimensions.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument value outside its legal domain (non-finite entries, bad index, ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative routine failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computed quantity violated a guaranteed invariant (trace drift,
/// hermiticity loss, non-finite state). Usually means the step size is
/// too large for the problem.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An object was used in an illegal state (e.g. stepping a finished episode).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace qdyn
