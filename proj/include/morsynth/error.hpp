#pragma once

#include <stdexcept>
#include <string>

namespace morsynth {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raster shapes disagree, or a raster has zero area.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Values outside the domain of their type (NaN depth, mask value 7, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// File missing, unreadable, unwritable or not decodable.
class IoError : public Error {
public:
    using Error::Error;
};

/// Parameter record violates its invariants.
class ConfigError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require_config(bool ok, const std::string& what)
{
    if (!ok)
        throw ConfigError(what);
}

} // namespace detail
} // namespace morsynth
