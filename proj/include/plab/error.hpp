#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace plab {

// Every recoverable failure in the library is reported as a plab::Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised by open-ended Monte-Carlo loops that exceed their step budget.
class StepCapExceeded : public Error {
public:
    StepCapExceeded(const std::string& what, std::uint64_t cap)
        : Error(what + " (cap " + std::to_string(cap) + ")"), cap_(cap) {}
    std::uint64_t cap() const noexcept { return cap_; }

private:
    std::uint64_t cap_;
};

}  // namespace plab
