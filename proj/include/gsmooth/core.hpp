#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gsmooth
{
    using Vector = Eigen::VectorXd;
    using Matrix = Eigen::MatrixXd;

    /// Base of every error thrown by the library.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Invalid or incomplete configuration (bad names, missing fields, violated preconditions).
    class ConfigError : public Error
    {
    public:
        using Error::Error;
    };

    /// An objective returned NaN or an infinity.
    class NonFiniteError : public Error
    {
    public:
        NonFiniteError() : Error("objective returned non-finite") {}
    };

    /// Operation is undefined for the given arguments (e.g. an estimator at sigma = 0).
    class DomainError : public Error
    {
    public:
        using Error::Error;
    };

    inline bool all_finite(const Vector &v)
    {
        return v.allFinite();
    }
}
