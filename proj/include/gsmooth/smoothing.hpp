#pragma once

#include "gsmooth/core.hpp"
#include "gsmooth/random.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace gsmooth
{
    /// Anything that maps a point to a value. Noisy objectives are captured by reference.
    using ScalarFn = std::function<double(const Vector &)>;

    enum class EstimatorKind
    {
        direct_mc,
        fd_forward_mc,
        fd_central_mc,
        quadrature,
        closed_form,
        dgs
    };

    enum class FdScheme
    {
        forward,
        central
    };

    std::string to_string(EstimatorKind kind);
    EstimatorKind estimator_from_string(const std::string &name);

    /// An estimate of grad f_sigma(x).
    struct GradientEstimate
    {
        Vector vector;
        double sigma = 0;
        EstimatorKind estimator = EstimatorKind::fd_central_mc;
        int n_samples = 0;
        std::int64_t f_evals_used = 0;
        /// Per-component standard error of the sample mean; empty for deterministic estimators.
        Vector std_error;
    };

    /// An estimate of a scalar expectation with its standard error.
    struct ValueEstimate
    {
        double value = 0;
        double std_error = 0;
        int n_samples = 0;
        std::int64_t f_evals_used = 0;
    };

    // All estimators use the same sampling convention: v ~ N(0, I/2), so that
    // f_sigma(x) = E[f(x + sigma v)] and grad f_sigma(x) = (2 / sigma) E[v f(x + sigma v)].

    /// (1/n) sum f(x + sigma v_i).
    ValueEstimate mc_value(const ScalarFn &f, const Vector &x, double sigma, int n, GaussianSampler &sampler);

    /// (2/sigma)(1/n) sum v_i f(x + sigma v_i); uses n evaluations.
    GradientEstimate mc_grad_direct(const ScalarFn &f, const Vector &x, double sigma, int n,
                                    GaussianSampler &sampler);

    /// Finite difference along u: forward (f(x+su) - f(x)) / (s/2), central (f(x+su) - f(x-su)) / s.
    double fd_delta(const ScalarFn &f, const Vector &x, const Vector &u, double sigma, FdScheme scheme);
    /// Forward difference reusing a cached f(x).
    double fd_delta_forward(const ScalarFn &f, const Vector &x, double fx, const Vector &u, double sigma);

    /// (1/N) sum delta(x; u_i) u_i. Uses N + 1 evaluations (forward) or 2N (central).
    GradientEstimate mc_grad_fd(const ScalarFn &f, const Vector &x, double sigma, int n, FdScheme scheme,
                                GaussianSampler &sampler);

    /// d f_sigma(x) / d sigma via (1/n) sum f(x + sigma v_i) (2|v_i|^2 - d) / sigma.
    ValueEstimate dsigma(const ScalarFn &f, const Vector &x, double sigma, int n, GaussianSampler &sampler);

    /// Tensor Gauss-Hermite evaluation of f_sigma, its x-gradient and its sigma-derivative.
    struct QuadratureResult
    {
        double value = 0;
        Vector grad;
        double dsigma = 0;
        std::int64_t f_evals_used = 0;
    };

    /// Restricted to d <= 3.
    QuadratureResult quad_smoothing(const ScalarFn &f, const Vector &x, double sigma, int points_per_dim);
    double quad_value(const ScalarFn &f, const Vector &x, double sigma, int points_per_dim);
    Vector quad_grad(const ScalarFn &f, const Vector &x, double sigma, int points_per_dim);
    double quad_dsigma(const ScalarFn &f, const Vector &x, double sigma, int points_per_dim);

    constexpr int max_quadrature_dim = 3;
}
