#include "gsmooth/objectives.hpp"
#include "gsmooth/smoothing.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gsmooth;

namespace
{
    Vector fd_gradient(const ObjectiveFunction &f, const Vector &x)
    {
        Vector g(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
        {
            const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
            Vector a = x, b = x;
            a[i] += h;
            b[i] -= h;
            g[i] = (f.eval(a) - f.eval(b)) / (2 * h);
        }
        return g;
    }
}

TEST(Catalog, SixFunctionsInOrder)
{
    auto fs = make_catalog(4);
    ASSERT_EQ(fs.size(), 6u);
    const char *names[] = {"ackley", "levy", "michalewicz", "rastrigin", "rosenbrock", "schwefel_abs"};
    for (int i = 0; i < 6; ++i)
    {
        EXPECT_EQ(fs[i].name, names[i]);
        EXPECT_EQ(fs[i].dim, 4);
    }
}

TEST(Catalog, SchwefelDomain)
{
    auto f = make_objective("schwefel_abs", 100);
    ASSERT_EQ(f.domain.lo.size(), 100);
    EXPECT_TRUE((f.domain.lo.array() == -500).all());
    EXPECT_TRUE((f.domain.hi.array() == 500).all());
}

TEST(Catalog, KnownMinima)
{
    auto r = make_rastrigin(2);
    EXPECT_EQ(r.eval(Vector::Zero(2)), 0.0);
    ASSERT_TRUE(r.x_star);
    EXPECT_EQ(r.x_star->norm(), 0.0);
    EXPECT_NEAR(make_rosenbrock(5).eval(Vector::Ones(5)), 0.0, 1e-15);
    EXPECT_NEAR(make_ackley(3).eval(Vector::Zero(3)), 0.0, 1e-12);
    EXPECT_NEAR(make_levy(3).eval(Vector::Ones(3)), 0.0, 1e-12);
    // Michalewicz d=2 reference minimum -1.8013 near (2.20, 1.57)
    Vector xm(2);
    xm << 2.20290552, 1.57079633;
    EXPECT_NEAR(make_michalewicz(2).eval(xm), -1.8013, 1e-4);
}

TEST(Catalog, StarsConsistent)
{
    for (int d : {1, 2, 7})
    {
        std::vector<ObjectiveFunction> fs = make_catalog(d);
        fs.push_back(make_quadratic(d));
        if (d == 1)
            fs.push_back(make_figure1());
        for (const auto &f : fs)
            if (f.f_star && f.x_star)
                EXPECT_NEAR(f.eval(*f.x_star), *f.f_star, 1e-10) << f.name;
    }
}

TEST(Catalog, GradientsMatchFiniteDifferences)
{
    for (int d : {1, 3, 10})
    {
        std::vector<ObjectiveFunction> fs = make_catalog(d);
        fs.push_back(make_quadratic(d));
        if (d == 1)
            fs.push_back(make_figure1());
        for (const auto &f : fs)
        {
            ASSERT_TRUE(f.has_grad()) << f.name;
            auto pts = sample_initial_points(f, 100, 11);
            for (const auto &x : pts)
            {
                const Vector g = f.grad(x);
                const Vector fd = fd_gradient(f, x);
                EXPECT_LE((g - fd).norm() / std::max(1.0, g.norm()), 1e-5) << f.name << " d=" << d;
            }
        }
    }
}

TEST(Catalog, UnknownName)
{
    EXPECT_THROW(make_objective("sphere", 2), ConfigError);
    EXPECT_TRUE(is_known_objective("levy"));
    EXPECT_FALSE(is_known_objective("sphere"));
}

TEST(ClosedForm, QuadraticValueGap)
{
    auto f = make_quadratic(3);
    EXPECT_DOUBLE_EQ(eval_smoothed_closed_form(f, Vector::Zero(3), 1.0), 1.5);
}

TEST(ClosedForm, SigmaZeroIsIdentity)
{
    auto f = make_figure1();
    Vector x(1);
    x << 1.0;
    EXPECT_EQ(eval_smoothed_closed_form(f, x, 0.0), f.eval(x));
    EXPECT_NEAR(f.eval(x), 0.0, 1e-15);
    auto r = make_rastrigin(4);
    Vector y = Vector::LinSpaced(4, -1.3, 2.2);
    EXPECT_EQ(eval_smoothed_closed_form(r, y, 0.0), r.eval(y));
    EXPECT_EQ(eval_smoothed_closed_form(make_quadratic(4), y, 0.0), make_quadratic(4).eval(y));
}

TEST(ClosedForm, RastriginMatchesIntegral)
{
    auto f = make_rastrigin(1);
    const double x = 0.3, s = 0.5;
    const double expected = oracle::gauss_expect([&](double v) {
        const double y = x + s * v;
        return y * y - 10 * std::cos(2 * std::numbers::pi * y) + 10;
    });
    Vector xv(1);
    xv << x;
    EXPECT_NEAR(eval_smoothed_closed_form(f, xv, s), expected, 1e-10 * std::abs(expected));
}

TEST(ClosedForm, CosineWellMatchesIntegral)
{
    auto f = make_figure1();
    for (double x : {-1.7, 0.0, 0.3, 1.2})
        for (double s : {0.1, 0.7, 1.5})
        {
            const double expected = oracle::gauss_expect([&](double v) {
                const double y = x + s * v;
                return y * y * y * y - 2 * y * y + std::cos(2 * std::numbers::pi * y);
            });
            Vector xv(1);
            xv << x;
            EXPECT_NEAR(eval_smoothed_closed_form(f, xv, s), expected, 1e-10 * std::max(1.0, std::abs(expected)));
        }
}

TEST(ClosedForm, AgreesWithTensorQuadrature)
{
    for (int d : {1, 2})
    {
        std::vector<ObjectiveFunction> fs = {make_rastrigin(d), make_quadratic(d)};
        if (d == 1)
            fs.push_back(make_figure1());
        for (const auto &f : fs)
            for (const auto &x : sample_initial_points(f, 5, 3))
                for (double s : {0.05, 0.4, 1.3})
                {
                    const double cf = eval_smoothed_closed_form(f, x, s);
                    const double q = quad_value(f.eval, x, s, 64);
                    EXPECT_LE(std::abs(cf - q) / std::max(1.0, std::abs(cf)), 1e-8) << f.name;
                    const Vector gq = quad_grad(f.eval, x, s, 64);
                    const Vector gc = grad_smoothed_closed_form(f, x, s);
                    EXPECT_LE((gc - gq).norm() / std::max(1.0, gc.norm()), 1e-7) << f.name;
                }
    }
}

TEST(ClosedForm, UnsupportedThrows)
{
    EXPECT_THROW(eval_smoothed_closed_form(make_ackley(2), Vector::Zero(2), 0.5), DomainError);
    EXPECT_THROW(grad_smoothed_closed_form(make_levy(2), Vector::Zero(2), 0.5), DomainError);
}

TEST(Noise, ZeroRhoIsBitIdentical)
{
    auto base = make_ackley(5);
    auto noisy = wrap_noise(base, 0.0, 9);
    for (const auto &x : sample_initial_points(base, 20, 1))
    {
        EXPECT_EQ(noisy(x), base.eval(x));
        EXPECT_EQ(noisy.gradient(x), base.grad(x));
    }
}

TEST(Noise, RelativeBound)
{
    auto base = make_quadratic(1);
    auto noisy = wrap_noise(base, 1e-4, 5);
    Vector x(1);
    x << 10.0;
    ASSERT_EQ(base.eval(x), 100.0);
    bool varied = false;
    for (int i = 0; i < 1000; ++i)
    {
        const double v = noisy(x);
        EXPECT_GE(v, 99.99);
        EXPECT_LE(v, 100.01);
        varied |= v != 100.0;
    }
    EXPECT_TRUE(varied);
}

TEST(Noise, SameSeedSameRealization)
{
    auto base = make_rastrigin(3);
    auto a = wrap_noise(base, 1e-2, 42);
    auto b = wrap_noise(base, 1e-2, 42);
    auto c = wrap_noise(base, 1e-2, 43);
    Vector x = Vector::Constant(3, 0.7);
    bool differs = false;
    for (int i = 0; i < 50; ++i)
    {
        const double va = a(x);
        EXPECT_EQ(va, b(x));
        differs |= va != c(x);
    }
    EXPECT_TRUE(differs);
}

TEST(InitialPoints, Deterministic)
{
    auto f = make_levy(6);
    auto a = sample_initial_points(f, 10, 7);
    auto b = sample_initial_points(f, 10, 7);
    ASSERT_EQ(a.size(), 10u);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(a[i], b[i]);
    EXPECT_NE(sample_initial_points(f, 1, 8)[0], a[0]);
}

TEST(InitialPoints, InsideDomain)
{
    auto f = make_schwefel_abs(100);
    for (const auto &x : sample_initial_points(f, 20, 3))
    {
        EXPECT_TRUE((x.array() >= -500).all());
        EXPECT_TRUE((x.array() <= 500).all());
    }
}

TEST(InitialPoints, Empty)
{
    EXPECT_TRUE(sample_initial_points(make_ackley(2), 0, 1).empty());
}
