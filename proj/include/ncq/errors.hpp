#pragma once

#include <stdexcept>
#include <string>

namespace ncq {

/// Input violates a documented precondition (bad parameter, wrong shape).
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A configured size cap would be exceeded. Never silently truncated.
class CapError : public std::length_error {
  public:
    using std::length_error::length_error;
};

/// A numerical routine failed (non-finite output, no convergence).
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace ncq
