#include "gsmooth/smoothing.hpp"

#include "gsmooth/quadrature.hpp"

#include <array>
#include <cmath>

namespace gsmooth
{
    namespace
    {
        double checked(const ScalarFn &f, const Vector &x)
        {
            const double v = f(x);
            if (!std::isfinite(v))
                throw NonFiniteError();
            return v;
        }

        void require_samples(int n)
        {
            if (n < 1)
                throw ConfigError("sample count must be >= 1");
        }

        void require_positive_sigma(double sigma, const char *what)
        {
            if (!(sigma > 0))
                throw DomainError(std::string(what) + " undefined at sigma=0");
        }

        /// Running mean and variance (Welford) for vectors.
        struct VectorMoments
        {
            explicit VectorMoments(Eigen::Index d) : mean(Vector::Zero(d)), m2(Vector::Zero(d)) {}

            void add(const Vector &v)
            {
                ++count;
                const Vector delta = v - mean;
                mean += delta / static_cast<double>(count);
                m2 += delta.cwiseProduct(v - mean);
            }

            Vector std_error() const
            {
                if (count < 2)
                    return Vector::Zero(mean.size());
                const double c = static_cast<double>(count);
                return (m2 / (c - 1) / c).cwiseSqrt();
            }

            std::int64_t count = 0;
            Vector mean;
            Vector m2;
        };

        struct ScalarMoments
        {
            void add(double v)
            {
                ++count;
                const double delta = v - mean;
                mean += delta / static_cast<double>(count);
                m2 += delta * (v - mean);
            }

            double std_error() const
            {
                if (count < 2)
                    return 0.0;
                const double c = static_cast<double>(count);
                return std::sqrt(m2 / (c - 1) / c);
            }

            std::int64_t count = 0;
            double mean = 0;
            double m2 = 0;
        };
    }

    std::string to_string(EstimatorKind kind)
    {
        switch (kind)
        {
        case EstimatorKind::direct_mc:
            return "direct_mc";
        case EstimatorKind::fd_forward_mc:
            return "fd_forward_mc";
        case EstimatorKind::fd_central_mc:
            return "fd_central_mc";
        case EstimatorKind::quadrature:
            return "quadrature";
        case EstimatorKind::closed_form:
            return "closed_form";
        case EstimatorKind::dgs:
            return "dgs";
        }
        return "unknown";
    }

    EstimatorKind estimator_from_string(const std::string &name)
    {
        for (auto kind : {EstimatorKind::direct_mc, EstimatorKind::fd_forward_mc, EstimatorKind::fd_central_mc,
                          EstimatorKind::quadrature, EstimatorKind::closed_form, EstimatorKind::dgs})
            if (to_string(kind) == name)
                return kind;
        throw ConfigError("unknown estimator '" + name + "'");
    }

    ValueEstimate mc_value(const ScalarFn &f, const Vector &x, double sigma, int n, GaussianSampler &sampler)
    {
        require_samples(n);
        require_positive_sigma(sigma, "smoothed value estimator");
        ScalarMoments m;
        Vector v, y;
        for (int i = 0; i < n; ++i)
        {
            sampler.draw(v);
            y = x + sigma * v;
            m.add(checked(f, y));
        }
        return {m.mean, m.std_error(), n, n};
    }

    GradientEstimate mc_grad_direct(const ScalarFn &f, const Vector &x, double sigma, int n,
                                    GaussianSampler &sampler)
    {
        require_samples(n);
        require_positive_sigma(sigma, "direct estimator");
        VectorMoments m(x.size());
        Vector v, y;
        for (int i = 0; i < n; ++i)
        {
            sampler.draw(v);
            y = x + sigma * v;
            m.add((2.0 / sigma) * checked(f, y) * v);
        }
        return {m.mean, sigma, EstimatorKind::direct_mc, n, n, m.std_error()};
    }

    double fd_delta(const ScalarFn &f, const Vector &x, const Vector &u, double sigma, FdScheme scheme)
    {
        require_positive_sigma(sigma, "finite difference");
        if (scheme == FdScheme::forward)
            return fd_delta_forward(f, x, checked(f, x), u, sigma);
        return (checked(f, x + sigma * u) - checked(f, x - sigma * u)) / sigma;
    }

    double fd_delta_forward(const ScalarFn &f, const Vector &x, double fx, const Vector &u, double sigma)
    {
        require_positive_sigma(sigma, "finite difference");
        return (checked(f, x + sigma * u) - fx) / (sigma / 2);
    }

    GradientEstimate mc_grad_fd(const ScalarFn &f, const Vector &x, double sigma, int n, FdScheme scheme,
                                GaussianSampler &sampler)
    {
        require_samples(n);
        require_positive_sigma(sigma, "finite difference estimator");
        VectorMoments m(x.size());
        Vector u;
        std::int64_t evals = 0;
        double fx = 0;
        if (scheme == FdScheme::forward)
        {
            fx = checked(f, x);
            evals = 1;
        }
        for (int i = 0; i < n; ++i)
        {
            sampler.draw(u);
            double delta;
            if (scheme == FdScheme::forward)
            {
                delta = fd_delta_forward(f, x, fx, u, sigma);
                evals += 1;
            }
            else
            {
                delta = (checked(f, x + sigma * u) - checked(f, x - sigma * u)) / sigma;
                evals += 2;
            }
            m.add(delta * u);
        }
        const auto kind = scheme == FdScheme::forward ? EstimatorKind::fd_forward_mc : EstimatorKind::fd_central_mc;
        return {m.mean, sigma, kind, n, evals, m.std_error()};
    }

    ValueEstimate dsigma(const ScalarFn &f, const Vector &x, double sigma, int n, GaussianSampler &sampler)
    {
        require_samples(n);
        require_positive_sigma(sigma, "derivative estimator");
        const double d = static_cast<double>(x.size());
        ScalarMoments m;
        Vector v, y;
        for (int i = 0; i < n; ++i)
        {
            sampler.draw(v);
            y = x + sigma * v;
            m.add(checked(f, y) * (2 * v.squaredNorm() - d) / sigma);
        }
        return {m.mean, m.std_error(), n, n};
    }

    QuadratureResult quad_smoothing(const ScalarFn &f, const Vector &x, double sigma, int points_per_dim)
    {
        const auto dim = x.size();
        if (dim < 1 || dim > max_quadrature_dim)
            throw DomainError("quadrature oracle restricted to d <= 3");
        if (points_per_dim < 2)
            throw ConfigError("quadrature needs at least 2 points per dimension");
        if (sigma < 0)
            throw DomainError("sigma must be non-negative");

        QuadratureResult out;
        out.grad = Vector::Zero(dim);
        const double fx = checked(f, x);
        if (sigma == 0)
        {
            out.value = fx;
            out.f_evals_used = 1;
            return out;
        }

        const auto &rule = gauss_hermite(points_per_dim);
        const auto &z = rule.nodes();
        const auto &p = rule.probability_weights();
        const int n = rule.size();
        const double d = static_cast<double>(dim);

        std::array<int, max_quadrature_dim> idx{};
        Vector node(dim), y(dim);
        double value = 0, ds = 0;
        Vector grad = Vector::Zero(dim);
        std::int64_t evals = 1;
        for (;;)
        {
            double w = 1;
            for (Eigen::Index k = 0; k < dim; ++k)
            {
                node[k] = z[idx[k]];
                w *= p[idx[k]];
            }
            y = x + sigma * node;
            const double fy = checked(f, y);
            ++evals;
            value += w * fy;
            // weights are symmetric, so subtracting f(x) leaves the moments unchanged and
            // removes cancellation when sigma is small
            grad += (w * (fy - fx)) * node;
            ds += w * (fy - fx) * (2 * node.squaredNorm() - d);

            Eigen::Index k = 0;
            while (k < dim && ++idx[k] == n)
                idx[k++] = 0;
            if (k == dim)
                break;
        }
        out.value = value;
        out.grad = (2.0 / sigma) * grad;
        out.dsigma = ds / sigma;
        out.f_evals_used = evals;
        return out;
    }

    double quad_value(const ScalarFn &f, const Vector &x, double sigma, int points_per_dim)
    {
        return quad_smoothing(f, x, sigma, points_per_dim).value;
    }

    Vector quad_grad(const ScalarFn &f, const Vector &x, double sigma, int points_per_dim)
    {
        require_positive_sigma(sigma, "quadrature gradient");
        return quad_smoothing(f, x, sigma, points_per_dim).grad;
    }

    double quad_dsigma(const ScalarFn &f, const Vector &x, double sigma, int points_per_dim)
    {
        require_positive_sigma(sigma, "quadrature sigma-derivative");
        return quad_smoothing(f, x, sigma, points_per_dim).dsigma;
    }
}
