#pragma once

#include <stdexcept>
#include <string>

namespace vaereg {

// Shape or size mismatch between tensors/layers.
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Violation of a model constraint (e.g. zero-norm latent direction).
struct ConstraintError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite losses/gradients or an invalid optimization request.
struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data: missing files, malformed CSV cells, degenerate columns.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or unknown configuration keys/values.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace vaereg
