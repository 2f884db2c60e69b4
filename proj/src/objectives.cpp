#include "gsmooth/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gsmooth
{
    namespace
    {
        constexpr double pi = std::numbers::pi;

        void require_dim(Eigen::Index dim)
        {
            if (dim < 1)
                throw ConfigError("dimension must be >= 1");
        }

        double sign(double v) { return (v > 0) - (v < 0); }
    }

    const std::vector<std::string> &catalog_names()
    {
        static const std::vector<std::string> names{
            "ackley", "levy", "michalewicz", "rastrigin", "rosenbrock", "schwefel_abs"};
        return names;
    }

    ObjectiveFunction make_ackley(Eigen::Index dim)
    {
        require_dim(dim);
        constexpr double a = 20.0, b = 0.2, c = 2.0 * pi;
        const double d = static_cast<double>(dim);

        ObjectiveFunction f;
        f.name = "ackley";
        f.dim = dim;
        f.eval = [=](const Vector &x) {
            const double r = std::sqrt(x.squaredNorm() / d);
            const double cs = (c * x.array()).cos().sum() / d;
            return -a * std::exp(-b * r) - std::exp(cs) + a + std::numbers::e;
        };
        f.grad = [=](const Vector &x) {
            const double r = std::sqrt(x.squaredNorm() / d);
            const double cs = (c * x.array()).cos().sum() / d;
            Vector g = (std::exp(cs) * c / d) * (c * x.array()).sin().matrix();
            // the radial term is a cone at the origin; use the zero subgradient there
            if (r > 0)
                g += (a * b * std::exp(-b * r) / (d * r)) * x;
            return g;
        };
        f.domain = Box::uniform(dim, -32.768, 32.768);
        f.f_star = 0.0;
        f.x_star = Vector::Zero(dim);
        return f;
    }

    ObjectiveFunction make_levy(Eigen::Index dim)
    {
        require_dim(dim);
        ObjectiveFunction f;
        f.name = "levy";
        f.dim = dim;
        f.eval = [](const Vector &x) {
            const Eigen::Index n = x.size();
            auto w = [&](Eigen::Index i) { return 1.0 + (x[i] - 1.0) / 4.0; };
            const double w0 = w(0), wn = w(n - 1);
            double s = std::pow(std::sin(pi * w0), 2);
            for (Eigen::Index i = 0; i + 1 < n; ++i)
            {
                const double wi = w(i);
                s += (wi - 1) * (wi - 1) * (1 + 10 * std::pow(std::sin(pi * wi + 1), 2));
            }
            s += (wn - 1) * (wn - 1) * (1 + std::pow(std::sin(2 * pi * wn), 2));
            return s;
        };
        f.grad = [](const Vector &x) {
            const Eigen::Index n = x.size();
            Vector g = Vector::Zero(n);
            auto w = [&](Eigen::Index i) { return 1.0 + (x[i] - 1.0) / 4.0; };
            // derivatives with respect to w, scaled by dw/dx = 1/4 at the end
            g[0] += pi * std::sin(2 * pi * w(0));
            for (Eigen::Index i = 0; i + 1 < n; ++i)
            {
                const double wi = w(i);
                const double s = std::sin(pi * wi + 1);
                g[i] += 2 * (wi - 1) * (1 + 10 * s * s) + (wi - 1) * (wi - 1) * 10 * pi * std::sin(2 * (pi * wi + 1));
            }
            const double wn = w(n - 1);
            const double s = std::sin(2 * pi * wn);
            g[n - 1] += 2 * (wn - 1) * (1 + s * s) + (wn - 1) * (wn - 1) * 2 * pi * std::sin(4 * pi * wn);
            return Vector(g / 4.0);
        };
        f.domain = Box::uniform(dim, -10.0, 10.0);
        f.f_star = 0.0;
        f.x_star = Vector::Ones(dim);
        return f;
    }

    ObjectiveFunction make_michalewicz(Eigen::Index dim)
    {
        require_dim(dim);
        constexpr int m = 10;
        ObjectiveFunction f;
        f.name = "michalewicz";
        f.dim = dim;
        f.eval = [](const Vector &x) {
            double s = 0;
            for (Eigen::Index i = 0; i < x.size(); ++i)
            {
                const double k = static_cast<double>(i + 1);
                s -= std::sin(x[i]) * std::pow(std::sin(k * x[i] * x[i] / pi), 2 * m);
            }
            return s;
        };
        f.grad = [](const Vector &x) {
            Vector g(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i)
            {
                const double k = static_cast<double>(i + 1);
                const double arg = k * x[i] * x[i] / pi;
                const double s = std::sin(arg);
                g[i] = -(std::cos(x[i]) * std::pow(s, 2 * m) +
                         std::sin(x[i]) * 2 * m * std::pow(s, 2 * m - 1) * std::cos(arg) * (2 * k * x[i] / pi));
            }
            return g;
        };
        f.domain = Box::uniform(dim, 0.0, pi);
        return f;
    }

    ObjectiveFunction make_rastrigin(Eigen::Index dim)
    {
        require_dim(dim);
        const double d = static_cast<double>(dim);
        ObjectiveFunction f;
        f.name = "rastrigin";
        f.dim = dim;
        f.eval = [=](const Vector &x) {
            return 10 * d + (x.array().square() - 10 * (2 * pi * x.array()).cos()).sum();
        };
        f.grad = [](const Vector &x) {
            return Vector(2 * x.array() + 20 * pi * (2 * pi * x.array()).sin());
        };
        // E[(x+v)^2] = x^2 + s^2/2 and E[cos(2 pi (x+v))] = cos(2 pi x) exp(-pi^2 s^2), v ~ N(0, s^2/2)
        f.smoothed_eval = [=, eval = f.eval](const Vector &x, double s) {
            if (s == 0)
                return eval(x);
            const double damp = std::exp(-pi * pi * s * s);
            return 10 * d + (x.array().square() + s * s / 2 - 10 * damp * (2 * pi * x.array()).cos()).sum();
        };
        f.smoothed_grad = [grad = f.grad](const Vector &x, double s) {
            if (s == 0)
                return grad(x);
            const double damp = std::exp(-pi * pi * s * s);
            return Vector(2 * x.array() + 20 * pi * damp * (2 * pi * x.array()).sin());
        };
        f.domain = Box::uniform(dim, -5.12, 5.12);
        f.f_star = 0.0;
        f.x_star = Vector::Zero(dim);
        f.lipschitz_L = 2 + 40 * pi * pi;
        return f;
    }

    ObjectiveFunction make_rosenbrock(Eigen::Index dim)
    {
        require_dim(dim);
        ObjectiveFunction f;
        f.name = "rosenbrock";
        f.dim = dim;
        f.eval = [](const Vector &x) {
            double s = 0;
            for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
            {
                const double a = x[i + 1] - x[i] * x[i];
                const double b = x[i] - 1;
                s += 100 * a * a + b * b;
            }
            return s;
        };
        f.grad = [](const Vector &x) {
            Vector g = Vector::Zero(x.size());
            for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
            {
                const double a = x[i + 1] - x[i] * x[i];
                g[i] += -400 * a * x[i] + 2 * (x[i] - 1);
                g[i + 1] += 200 * a;
            }
            return g;
        };
        f.domain = Box::uniform(dim, -5.0, 10.0);
        f.f_star = 0.0;
        f.x_star = Vector::Ones(dim);
        return f;
    }

    ObjectiveFunction make_schwefel_abs(Eigen::Index dim)
    {
        require_dim(dim);
        const double d = static_cast<double>(dim);
        ObjectiveFunction f;
        f.name = "schwefel_abs";
        f.dim = dim;
        auto inner = [=](const Vector &x) {
            return 418.9829 * d - (x.array() * x.array().abs().sqrt().sin()).sum();
        };
        f.eval = [=](const Vector &x) { return std::abs(inner(x)); };
        f.grad = [=](const Vector &x) {
            const Eigen::ArrayXd r = x.array().abs().sqrt();
            const Eigen::ArrayXd dg = -(r.sin() + 0.5 * r * r.cos());
            return Vector(sign(inner(x)) * dg);
        };
        f.domain = Box::uniform(dim, -500.0, 500.0);
        return f;
    }

    ObjectiveFunction make_quadratic(Eigen::Index dim, std::optional<Vector> center)
    {
        require_dim(dim);
        const Vector c = center.value_or(Vector::Zero(dim));
        if (c.size() != dim)
            throw ConfigError("quadratic center has wrong dimension");
        const double d = static_cast<double>(dim);

        ObjectiveFunction f;
        f.name = "quadratic";
        f.dim = dim;
        f.eval = [c](const Vector &x) { return (x - c).squaredNorm(); };
        f.grad = [c](const Vector &x) { return Vector(2 * (x - c)); };
        // f_sigma = f + sigma^2 L d / 4 with L = 2
        f.smoothed_eval = [c, d](const Vector &x, double s) {
            if (s == 0)
                return (x - c).squaredNorm();
            return (x - c).squaredNorm() + s * s * d / 2;
        };
        f.smoothed_grad = [c](const Vector &x, double) { return Vector(2 * (x - c)); };
        f.domain = Box{c.array() - 5.0, c.array() + 5.0};
        f.f_star = 0.0;
        f.x_star = c;
        f.lipschitz_L = 2.0;
        f.convex = true;
        return f;
    }

    ObjectiveFunction make_figure1()
    {
        auto value = [](double x) { return x * x * x * x - 2 * x * x + std::cos(2 * pi * x); };
        auto deriv = [](double x) { return 4 * x * x * x - 4 * x - 2 * pi * std::sin(2 * pi * x); };
        auto second = [](double x) { return 12 * x * x - 4 - 4 * pi * pi * std::cos(2 * pi * x); };

        ObjectiveFunction f;
        f.name = "figure1";
        f.dim = 1;
        f.eval = [=](const Vector &x) { return value(x[0]); };
        f.grad = [=](const Vector &x) { return Vector::Constant(1, deriv(x[0])); };
        // f_sigma = x^4 + (3 s^2 - 2) x^2 + 3 s^4 / 4 - s^2 + cos(2 pi x) exp(-pi^2 s^2)
        f.smoothed_eval = [=](const Vector &x, double s) {
            if (s == 0)
                return value(x[0]);
            const double t = x[0], s2 = s * s;
            return t * t * t * t + (3 * s2 - 2) * t * t + 0.75 * s2 * s2 - s2 +
                   std::cos(2 * pi * t) * std::exp(-pi * pi * s2);
        };
        f.smoothed_grad = [=](const Vector &x, double s) {
            const double t = x[0], s2 = s * s;
            return Vector::Constant(1, 4 * t * t * t + 2 * (3 * s2 - 2) * t -
                                           2 * pi * std::sin(2 * pi * t) * std::exp(-pi * pi * s2));
        };
        f.domain = Box::uniform(1, -2.0, 2.0);

        // minimizer by grid then Newton on f'; the function is even, the positive root is reported
        constexpr int n = 40001;
        double best = 0, best_val = value(0);
        double max_curv = 0;
        for (int i = 0; i < n; ++i)
        {
            const double x = -2.0 + 4.0 * i / (n - 1);
            if (value(x) < best_val)
            {
                best_val = value(x);
                best = x;
            }
            max_curv = std::max(max_curv, std::abs(second(x)));
        }
        best = std::abs(best);
        for (int it = 0; it < 50; ++it)
        {
            const double step = deriv(best) / second(best);
            best -= step;
            if (std::abs(step) < 1e-16)
                break;
        }
        f.x_star = Vector::Constant(1, best);
        f.f_star = value(best);
        f.lipschitz_L = max_curv;
        return f;
    }

    std::vector<ObjectiveFunction> make_catalog(Eigen::Index dim)
    {
        return {make_ackley(dim), make_levy(dim), make_michalewicz(dim),
                make_rastrigin(dim), make_rosenbrock(dim), make_schwefel_abs(dim)};
    }

    bool is_known_objective(const std::string &name)
    {
        const auto &names = catalog_names();
        return std::find(names.begin(), names.end(), name) != names.end() || name == "quadratic" ||
               name == "figure1";
    }

    ObjectiveFunction make_objective(const std::string &name, Eigen::Index dim)
    {
        if (name == "ackley")
            return make_ackley(dim);
        if (name == "levy")
            return make_levy(dim);
        if (name == "michalewicz")
            return make_michalewicz(dim);
        if (name == "rastrigin")
            return make_rastrigin(dim);
        if (name == "rosenbrock")
            return make_rosenbrock(dim);
        if (name == "schwefel_abs")
            return make_schwefel_abs(dim);
        if (name == "quadratic")
            return make_quadratic(dim);
        if (name == "figure1")
        {
            if (dim != 1)
                throw ConfigError("figure1 is one-dimensional");
            return make_figure1();
        }
        throw ConfigError("unknown function '" + name + "'");
    }

    double eval_smoothed_closed_form(const ObjectiveFunction &f, const Vector &x, double sigma)
    {
        if (!f.smoothed_eval)
            throw DomainError("no closed form smoothing for '" + f.name + "'");
        if (sigma < 0)
            throw DomainError("sigma must be non-negative");
        return f.smoothed_eval(x, sigma);
    }

    Vector grad_smoothed_closed_form(const ObjectiveFunction &f, const Vector &x, double sigma)
    {
        if (!f.smoothed_grad)
            throw DomainError("no closed form smoothing for '" + f.name + "'");
        if (sigma < 0)
            throw DomainError("sigma must be non-negative");
        return f.smoothed_grad(x, sigma);
    }

    NoisyObjective::NoisyObjective(ObjectiveFunction base, double rho, std::uint64_t seed)
        : base_(std::move(base)), rho_(rho), rng_(seed)
    {
        if (!(rho >= 0))
            throw ConfigError("noise level must be non-negative");
    }

    double NoisyObjective::operator()(const Vector &x)
    {
        const double v = base_.eval(x);
        if (rho_ == 0)
            return v;
        return v * (1 + rho_ * rng_.uniform(-1.0, 1.0));
    }

    Vector NoisyObjective::gradient(const Vector &x)
    {
        if (!base_.grad)
            throw ConfigError("'" + base_.name + "' has no analytic gradient");
        Vector g = base_.grad(x);
        if (rho_ == 0)
            return g;
        for (Eigen::Index i = 0; i < g.size(); ++i)
            g[i] *= 1 + rho_ * rng_.uniform(-1.0, 1.0);
        return g;
    }

    NoisyObjective wrap_noise(const ObjectiveFunction &f, double rho, std::uint64_t seed)
    {
        return NoisyObjective(f, rho, seed);
    }

    std::vector<Vector> sample_initial_points(const ObjectiveFunction &f, int count, std::uint64_t seed)
    {
        std::vector<Vector> points;
        if (count <= 0)
            return points;
        Rng rng(derive_seed(derive_seed(seed, f.name), static_cast<std::uint64_t>(f.dim)));
        points.reserve(static_cast<std::size_t>(count));
        for (int k = 0; k < count; ++k)
        {
            Vector x(f.dim);
            for (Eigen::Index i = 0; i < f.dim; ++i)
                x[i] = rng.uniform(f.domain.lo[i], f.domain.hi[i]);
            points.push_back(std::move(x));
        }
        return points;
    }
}
