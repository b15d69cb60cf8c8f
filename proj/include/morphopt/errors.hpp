#pragma once

#include <stdexcept>
#include <string>

namespace morphopt {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shoulder-to-base reference distance too small to normalize by.
struct DegenerateScale : Error {
    using Error::Error;
};

// More joints in an anatomical group than the slot layout allows.
struct CapacityExceeded : Error {
    using Error::Error;
};

// Malformed input file; carries a line number when known.
struct ParseError : Error {
    int line = 0;
    ParseError(const std::string& msg, int line_)
        : Error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// MOTION frame width does not match the declared channel count.
struct ChannelMismatch : Error {
    using Error::Error;
};

// A required joint-of-interest name could not be resolved.
struct MissingJoi : Error {
    using Error::Error;
};

// Joint angle vector does not match the chain's active joint count.
struct ConfigMismatch : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Decoder Jacobian has vanishing trace; the iso loss is undefined.
struct ZeroJacobian : Error {
    using Error::Error;
};

// Point cloud cannot anchor a similarity alignment (zero spread).
struct DegenerateGeometry : Error {
    using Error::Error;
};

// Training loss became NaN/inf; carries the offending epoch.
struct NonFiniteLoss : Error {
    int epoch = 0;
    NonFiniteLoss(const std::string& msg, int epoch_)
        : Error(msg + " (epoch " + std::to_string(epoch_) + ")"), epoch(epoch_) {}
};

// Robot record is missing or mistypes a required field.
struct SchemaError : Error {
    using Error::Error;
};

struct KTooLarge : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace morphopt
