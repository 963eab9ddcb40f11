#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iridlab {

// All recoverable failures are typed exceptions deriving from Error, so
// callers can catch the library root or an exact condition.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed argument (wrong length, out-of-range field, bad enum value).
class InputError : public Error {
public:
    using Error::Error;
};

// A text line failed the documented grammar. `offset` is the byte position
// of the first offending character.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Value parsed fine but lies outside its physical band.
class RangeError : public Error {
public:
    using Error::Error;
};

// SIM authentication counter exhausted; card refuses further queries.
class CardLocked : public Error {
public:
    using Error::Error;
};

// External card reader not configured / not reachable.
class TransportError : public Error {
public:
    using Error::Error;
};

// Oracle query budget exhausted during collision search.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

// Residual key-candidate space too large for the offline brute-force stage.
class AmbiguityUnresolved : public Error {
public:
    using Error::Error;
};

// Frame bits do not decode (uncorrectable block, truncated body, bad CRC).
class CodecError : public Error {
public:
    using Error::Error;
};

// Two different bursts claim the same TDMA slot of a lane.
class DuplicateSlot : public Error {
public:
    using Error::Error;
};

// Decoded position vector is not near the Earth's surface.
class ImplausiblePosition : public Error {
public:
    using Error::Error;
};

// Bad runtime configuration (sample rates, solver targets, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace iridlab
