#pragma once

#include <stdexcept>
#include <string>

namespace hmotor {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model or configuration parameter violates its invariant.
class ParameterError : public Error {
public:
    ParameterError(std::string key, const std::string& what)
        : Error(key + ": " + what), key_(std::move(key)) {}
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Flux vector of the wrong size for the model it is evaluated on.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Integration produced a non-finite state, or an identification problem is ill-posed.
class NumericalError : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& key, const std::string& what) {
    if (!cond) throw ParameterError(key, what);
}

}  // namespace hmotor
