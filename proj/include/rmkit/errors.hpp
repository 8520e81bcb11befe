#pragma once

#include <stdexcept>
#include <string>

namespace rmkit {

// Thrown when a request exceeds the configured dense-simulation limits
// (e.g. too many qubits for an exact representation). The CLI maps this
// to exit code 3.
class resource_limit_error : public std::runtime_error {
public:
    explicit resource_limit_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when gradient-based training produces a non-finite loss.
class training_error : public std::runtime_error {
public:
    training_error(const std::string& what, int epoch)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

}  // namespace rmkit
