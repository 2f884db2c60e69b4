#pragma once

#include "gsmooth/core.hpp"
#include "gsmooth/random.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gsmooth
{
    /// Axis-aligned box [lo_i, hi_i].
    struct Box
    {
        Vector lo;
        Vector hi;

        static Box uniform(Eigen::Index dim, double lo, double hi)
        {
            return {Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
        }

        bool contains(const Vector &x) const
        {
            return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
        }
    };

    /// A test function f: R^d -> R together with whatever analytic structure is known about it.
    /// Instances are immutable after construction and safe to share between threads.
    struct ObjectiveFunction
    {
        std::string name;
        Eigen::Index dim = 0;

        std::function<double(const Vector &)> eval;
        std::function<Vector(const Vector &)> grad;
        /// Closed-form Gaussian smoothing f_sigma(x) and its x-gradient, when elementary.
        std::function<double(const Vector &, double)> smoothed_eval;
        std::function<Vector(const Vector &, double)> smoothed_grad;

        Box domain;
        std::optional<double> f_star;
        std::optional<Vector> x_star;
        /// Gradient Lipschitz constant (L-smoothness) and function Lipschitz constant.
        std::optional<double> lipschitz_L;
        std::optional<double> lipschitz_M;
        bool convex = false;

        double operator()(const Vector &x) const { return eval(x); }

        bool has_grad() const { return static_cast<bool>(grad); }
        bool has_closed_form() const { return static_cast<bool>(smoothed_eval); }
    };

    /// Names of the six benchmark functions, in catalog order.
    const std::vector<std::string> &catalog_names();

    ObjectiveFunction make_ackley(Eigen::Index dim);
    ObjectiveFunction make_levy(Eigen::Index dim);
    /// Steepness m = 10.
    ObjectiveFunction make_michalewicz(Eigen::Index dim);
    ObjectiveFunction make_rastrigin(Eigen::Index dim);
    ObjectiveFunction make_rosenbrock(Eigen::Index dim);
    /// |418.9829 d - sum x_i sin(sqrt|x_i|)| on [-500, 500]^d.
    ObjectiveFunction make_schwefel_abs(Eigen::Index dim);

    /// f(x) = |x - center|^2; center defaults to the origin.
    ObjectiveFunction make_quadratic(Eigen::Index dim, std::optional<Vector> center = std::nullopt);
    /// The one-dimensional double well x^4 - 2x^2 + cos(2 pi x) on [-2, 2].
    ObjectiveFunction make_figure1();

    /// The six benchmark functions at the given dimension.
    std::vector<ObjectiveFunction> make_catalog(Eigen::Index dim);

    /// Resolves a catalog name ("ackley", ..., "schwefel_abs") or one of the auxiliary
    /// names "quadratic" and "figure1". Throws ConfigError for unknown names.
    ObjectiveFunction make_objective(const std::string &name, Eigen::Index dim);
    bool is_known_objective(const std::string &name);

    /// f_sigma(x) from the closed form; throws DomainError when f has none.
    double eval_smoothed_closed_form(const ObjectiveFunction &f, const Vector &x, double sigma);
    Vector grad_smoothed_closed_form(const ObjectiveFunction &f, const Vector &x, double sigma);

    /// f(x)(1 + rho xi) with xi ~ U[-1, 1] drawn fresh on every call. Owns its random stream,
    /// so an instance must be confined to one thread.
    class NoisyObjective
    {
    public:
        NoisyObjective(ObjectiveFunction base, double rho, std::uint64_t seed);

        double operator()(const Vector &x);
        /// Analytic gradient with an independent relative perturbation on each component.
        Vector gradient(const Vector &x);

        const ObjectiveFunction &base() const { return base_; }
        double rho() const { return rho_; }

    private:
        ObjectiveFunction base_;
        double rho_;
        Rng rng_;
    };

    NoisyObjective wrap_noise(const ObjectiveFunction &f, double rho, std::uint64_t seed);

    /// Uniform points in f.domain. The sequence depends only on (f.name, f.dim, count, seed).
    std::vector<Vector> sample_initial_points(const ObjectiveFunction &f, int count, std::uint64_t seed);
}
