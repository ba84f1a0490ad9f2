#pragma once

#include <stdexcept>
#include <string>

namespace sst {

// Bad user input: malformed files, out-of-range probabilities, invalid
// partitions handed to an evaluator.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Instance is structurally fine but too large for a desk-scale exact routine.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// An oracle or solver broke its declared contract (empty batch, uncovered
// residual, stalled progress). Always a bug in the oracle, never in the input.
struct ContractViolation : std::runtime_error {
    explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sst
