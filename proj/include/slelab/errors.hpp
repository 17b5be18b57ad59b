#pragma once

#include <stdexcept>
#include <string>

namespace slelab {

// Error taxonomy shared by all modules. The CLI maps invalid_input to exit
// code 2 and numeric_failure to exit code 3.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_input : error {
    using error::error;
};

// Numeric routine failed to converge or produced non-finite values. The
// message carries diagnostics (step index, residual, ...).
struct numeric_failure : error {
    using error::error;
};

struct not_found : error {
    using error::error;
};

// Grid resolution or delta too coarse for the requested construction.
struct resolution_error : error {
    using error::error;
};

struct not_simple : error {
    using error::error;
};

struct sampling_failure : error {
    using error::error;
};

struct no_radial_limit : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

} // namespace slelab
