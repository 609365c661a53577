#pragma once

#include <stdexcept>

namespace qbtc {

// Base class for all qbtc exceptions. Expected outcomes (verification
// rejections, append failures, mint retries) are reported through status
// returns instead; exceptions are reserved for contract violations.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};
struct CapacityError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct KeyReuseError : Error {
    using Error::Error;
};
struct CustodyError : Error {
    using Error::Error;
};

} // namespace qbtc
