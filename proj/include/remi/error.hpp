#pragma once

#include <stdexcept>
#include <string>

namespace remi {

/// Rejected network or session configuration (zero neurons, bad density, ...).
class InvalidConfig : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside an operation's domain (too-short input, steps = 0, ...).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Caller broke a precondition: dimension mismatch, non-finite input, out-of-range index.
class ContractError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// More held notes than the arpeggiator has output rows.
class CapacityError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The reservoir produced a non-finite value; the owning session must be reset.
class EngineFault : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace remi
