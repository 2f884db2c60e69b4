#pragma once

// Reference integrators used as independent oracles. They share no code with the library's
// Gauss-Hermite rule.

#include <boost/math/quadrature/sinh_sinh.hpp>

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle
{
    /// E[g(v)] for v ~ N(0, 1/2), i.e. (1/sqrt(pi)) int g(v) exp(-v^2) dv, by sinh-sinh quadrature.
    inline double gauss_expect(const std::function<double(double)> &g)
    {
        boost::math::quadrature::sinh_sinh<double> integrator;
        auto integrand = [&](double v) {
            const double w = std::exp(-v * v);
            return w == 0 ? 0.0 : g(v) * w;
        };
        return integrator.integrate(integrand) / std::sqrt(std::numbers::pi);
    }

    /// E[g(v1, v2)] for independent v_i ~ N(0, 1/2), by nested sinh-sinh quadrature.
    inline double gauss_expect2(const std::function<double(double, double)> &g)
    {
        return gauss_expect([&](double a) { return gauss_expect([&](double b) { return g(a, b); }); });
    }

    /// Central finite difference derivative.
    inline double central_diff(const std::function<double(double)> &f, double x, double h)
    {
        return (f(x + h) - f(x - h)) / (2 * h);
    }
}
