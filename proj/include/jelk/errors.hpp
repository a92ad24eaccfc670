#pragma once

#include <stdexcept>
#include <string>

namespace jelk {

// Bad input data or parameters (CLI exit code 2).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver failed to converge (CLI exit code 3).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace jelk
