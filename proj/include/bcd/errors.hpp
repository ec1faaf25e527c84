#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bcd {

// Root of every error the library throws. Callers that only care about
// "something in the framework failed" catch this one.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidSetError : public Error { public: using Error::Error; };
class SizeMismatchError : public Error { public: using Error::Error; };
class NotPositiveDefiniteError : public Error { public: using Error::Error; };
class EnumerationTooLargeError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class ClassParameterError : public Error { public: using Error::Error; };
class NoGuaranteeError : public Error { public: using Error::Error; };
class UnverifiableError : public Error { public: using Error::Error; };

// Non-convergence of an eigen iteration, NaN/inf in f or its gradient, etc.
class NumericError : public Error
{
public:
    using Error::Error;

    NumericError(const std::string& what, Eigen::VectorXd iterate) :
        Error(what), iterate_(std::move(iterate)) {}

    const Eigen::VectorXd& iterate() const noexcept { return iterate_; }

private:
    Eigen::VectorXd iterate_;
};

// Raised by the forcing function when the gap is numerically zero.
class AtOptimumError : public Error { public: using Error::Error; };

} // namespace bcd
