#include "gsmooth/optimizers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gsmooth;

namespace
{
    Vector vec(std::initializer_list<double> xs)
    {
        Vector v(static_cast<Eigen::Index>(xs.size()));
        Eigen::Index i = 0;
        for (double x : xs)
            v[i++] = x;
        return v;
    }

    ScheduleConfig constant_sigma(double s)
    {
        ScheduleConfig c;
        c.kind = ScheduleKind::constant;
        c.sigma0 = s;
        return c;
    }

    StoppingCriteria iters(std::int64_t n)
    {
        StoppingCriteria s;
        s.max_iters = n;
        return s;
    }

    /// Grid minimizers of g on [lo, hi], keeping every local grid minimum within tol of the best value.
    std::vector<double> grid_global_minimizers(const std::function<double(double)> &g, double lo, double hi,
                                               int n = 400001)
    {
        std::vector<double> xs(n), ys(n);
        double best = INFINITY;
        for (int i = 0; i < n; ++i)
        {
            xs[i] = lo + (hi - lo) * i / (n - 1);
            ys[i] = g(xs[i]);
            best = std::min(best, ys[i]);
        }
        std::vector<double> out;
        for (int i = 1; i + 1 < n; ++i)
            if (ys[i] <= ys[i - 1] && ys[i] <= ys[i + 1] && ys[i] - best < 1e-9)
                out.push_back(xs[i]);
        return out;
    }

    double dist_to_set(double x, const std::vector<double> &set)
    {
        double d = INFINITY;
        for (double s : set)
            d = std::min(d, std::abs(x - s));
        return d;
    }
}

TEST(GSmoothGD, QuadraticStep)
{
    NoisyObjective f(make_quadratic(2), 0, 0);
    OptimizerState st(vec({1, 1}), 0.25, constant_sigma(0.3));
    gsmoothgd_step(st, f, EstimatorKind::closed_form);
    EXPECT_NEAR(st.x[0], 0.5, 1e-15);
    EXPECT_NEAR(st.x[1], 0.5, 1e-15);
    EXPECT_EQ(st.k, 1);
}

TEST(GSmoothGD, RequiresExactGradient)
{
    NoisyObjective f(make_ackley(5), 0, 0);
    OptimizerState st(Vector::Ones(5), 0.1, constant_sigma(0.3));
    try
    {
        gsmoothgd_step(st, f, EstimatorKind::closed_form);
        FAIL();
    }
    catch (const ConfigError &e)
    {
        EXPECT_NE(std::string(e.what()).find("use MC-GSmoothGD"), std::string::npos);
    }
    EXPECT_THROW(gsmoothgd_step(st, f, EstimatorKind::quadrature), ConfigError);
    EXPECT_THROW(gsmoothgd_step(st, f, EstimatorKind::fd_central_mc), ConfigError);
    // quadrature is fine in low dimension
    NoisyObjective g(make_ackley(2), 0, 0);
    OptimizerState st2(Vector::Ones(2), 0.01, constant_sigma(0.3));
    EXPECT_NO_THROW(gsmoothgd_step(st2, g, EstimatorKind::quadrature));
}

TEST(GSmoothGD, CosineWellConvexRegime)
{
    auto fig = make_figure1();
    OptimizerConfig c;
    c.algorithm = Algorithm::gsmoothgd;
    c.estimator = EstimatorKind::closed_form;
    c.learning_rate = 0.01;
    c.sigma = constant_sigma(1.0);
    StoppingCriteria stop;
    stop.max_iters = 20000;
    stop.grad_tol = 1e-10;
    auto tr = run(c, fig, vec({1.5}), stop);
    auto mins = grid_global_minimizers([&](double x) { return fig.smoothed_eval(vec({x}), 1.0); }, -2, 2);
    ASSERT_EQ(mins.size(), 1u);
    EXPECT_LT(dist_to_set(tr.x_final[0], mins), 1e-4);
}

TEST(GSmoothGD, MonotoneDescentOnQuadratic)
{
    auto q = make_quadratic(4, vec({1, -2, 0.5, 3}));
    OptimizerConfig c;
    c.algorithm = Algorithm::gsmoothgd;
    c.estimator = EstimatorKind::closed_form;
    c.learning_rate = 1 / *q.lipschitz_L;
    c.sigma.kind = ScheduleKind::square_summable;
    c.sigma.sigma0 = 2.0;
    auto tr = run(c, q, Vector::Constant(4, 4.0), iters(50), {0, true});
    for (std::size_t k = 1; k < tr.iterates.size(); ++k)
    {
        const double s = tr.records[k].sigma;
        EXPECT_LE(q.smoothed_eval(tr.iterates[k], s), q.smoothed_eval(tr.iterates[k - 1], s) + 1e-12);
    }
}

TEST(McGSmoothGD, ConstantObjectiveDoesNotMove)
{
    ObjectiveFunction c;
    c.name = "const";
    c.dim = 3;
    c.eval = [](const Vector &) { return 4.0; };
    c.domain = {Vector::Constant(3, -1), Vector::Constant(3, 1)};
    NoisyObjective f(c, 0, 0);
    OptimizerState st(vec({0.1, 0.2, 0.3}), 1.0, constant_sigma(0.5));
    GaussianSampler s(3, 1);
    for (int k = 0; k < 10; ++k)
    {
        auto info = mc_gsmoothgd_step(st, f, 20, FdScheme::central, s);
        EXPECT_EQ(info.f_evals, 40);
    }
    EXPECT_EQ(st.x, vec({0.1, 0.2, 0.3}));
    EXPECT_EQ(st.f_evals, 400);
}

TEST(McGSmoothGD, BudgetPerStep)
{
    OptimizerConfig c;
    c.algorithm = Algorithm::mc_gsmoothgd;
    c.n_samples = 1000;
    c.learning_rate = 1;
    c.sigma = constant_sigma(1);
    auto ack = make_ackley(100);
    auto tr = run(c, ack, sample_initial_points(ack, 1, 1)[0], iters(3));
    ASSERT_EQ(tr.records.size(), 4u);
    for (int k = 0; k <= 3; ++k)
        EXPECT_EQ(tr.records[k].f_evals, 2000 * k);
}

TEST(McGSmoothGD, SameSeedBitIdentical)
{
    OptimizerConfig c;
    c.algorithm = Algorithm::mc_gsmoothgd;
    c.n_samples = 30;
    c.learning_rate = 0.1;
    c.sigma = constant_sigma(0.5);
    auto f = make_rastrigin(6);
    const Vector x0 = sample_initial_points(f, 1, 3)[0];
    NoisyObjective a(f, 1e-4, 9), b(f, 1e-4, 9);
    auto t1 = run(c, a, x0, iters(200), {77, true});
    auto t2 = run(c, b, x0, iters(200), {77, true});
    ASSERT_EQ(t1.records.size(), t2.records.size());
    for (std::size_t i = 0; i < t1.records.size(); ++i)
    {
        EXPECT_EQ(t1.records[i].f, t2.records[i].f);
        EXPECT_EQ(t1.iterates[i], t2.iterates[i]);
    }
    NoisyObjective c3(f, 1e-4, 9);
    auto t3 = run(c, c3, x0, iters(200), {78, false});
    EXPECT_NE(t3.final_f(), t1.final_f());
}

TEST(Homotopy, SingleStageEqualsInnerRun)
{
    auto fig = make_figure1();
    NoisyObjective f(fig, 0, 0);
    HomotopyInner in;
    in.learning_rate = 0.01;
    auto tr = homotopy_run(f, {0.7}, vec({1.2}), in);
    // replay plain gradient descent on f_0.7
    Vector x = vec({1.2});
    int k = 0;
    for (; k < in.inner_max_iters; ++k)
    {
        const Vector g = fig.smoothed_grad(x, 0.7);
        if (g.norm() <= in.inner_tol)
            break;
        x -= in.learning_rate * g;
    }
    EXPECT_EQ(tr.x_final, x);
    EXPECT_EQ(tr.iterations(), k);
    EXPECT_EQ(tr.reason, StopReason::completed);
}

TEST(Homotopy, CosineWellReachesGlobalBasin)
{
    auto fig = make_figure1();
    NoisyObjective f(fig, 0, 0);
    HomotopyInner in;
    in.learning_rate = 0.02;
    const std::vector<double> sigmas = {1.0, 0.5, 0.1, 0.01};
    auto tr = homotopy_run(f, sigmas, vec({1.8}), in);
    // oracle: global minimizers of the last smoothed stage and of f itself
    auto last = grid_global_minimizers([&](double x) { return fig.smoothed_eval(vec({x}), 0.01); }, -2, 2);
    auto raw = grid_global_minimizers([&](double x) { return fig.eval(vec({x})); }, -2, 2);
    ASSERT_EQ(raw.size(), 2u);
    EXPECT_LT(dist_to_set(tr.x_final[0], last), 1e-4);
    EXPECT_LT(dist_to_set(tr.x_final[0], raw), 1e-2);
    // stages are tagged in order
    int stage = 0;
    for (const auto &r : tr.records)
    {
        EXPECT_GE(r.stage, stage);
        stage = r.stage;
    }
    EXPECT_EQ(stage, 3);
}

TEST(Homotopy, InvalidSigmaLists)
{
    NoisyObjective f(make_figure1(), 0, 0);
    EXPECT_THROW(homotopy_run(f, {}, vec({1}), {}), ConfigError);
    EXPECT_THROW(homotopy_run(f, {0.1, 0.5}, vec({1}), {}), ConfigError);
    EXPECT_THROW(homotopy_run(f, {0.5, 0.5}, vec({1}), {}), ConfigError);
    EXPECT_THROW(homotopy_run(f, {0.5, -0.1}, vec({1}), {}), ConfigError);
}

TEST(Slgh, GeometricSigma)
{
    NoisyObjective f(make_quadratic(2), 0, 0);
    ScheduleConfig sc;
    sc.kind = ScheduleKind::geometric;
    sc.gamma = 0.9;
    sc.sigma0 = 1;
    OptimizerState st(vec({1, 1}), 0.1, sc);
    GaussianSampler s(2, 3);
    for (int k = 0; k < 10; ++k)
        slgh_step(st, f, SlghVariant::r, 10, s, EstimatorKind::closed_form);
    EXPECT_NEAR(st.schedule->current(), std::pow(0.9, 10), 1e-15);
    EXPECT_NEAR(st.schedule->current(), 0.3487, 1e-4);
}

TEST(Slgh, DerivativeClamp)
{
    // dsigma of the quadratic is sigma * d > 0, so sigma - eta*dsigma < gamma*sigma once eta*d > 1 - gamma
    NoisyObjective f(make_quadratic(5), 0, 0);
    ScheduleConfig sc;
    sc.kind = ScheduleKind::slgh_d;
    sc.gamma = 0.9;
    sc.eta = 1.0;
    sc.eps_floor = 1e-3;
    sc.sigma0 = 1;
    OptimizerState st(Vector::Ones(5), 0.1, sc);
    GaussianSampler s(5, 3);
    slgh_step(st, f, SlghVariant::d, 10, s, EstimatorKind::closed_form);
    // 1 - 1*5 < 0.9, so the floor applies
    EXPECT_EQ(st.schedule->current(), 1e-3);
    EXPECT_THROW(slgh_step(st, f, SlghVariant::r, 10, s, EstimatorKind::closed_form), ConfigError);
}

TEST(Slgh, QuadraticContraction)
{
    auto q = make_quadratic(5);
    for (auto alg : {Algorithm::slgh_r, Algorithm::slgh_d})
    {
        OptimizerConfig c;
        c.algorithm = alg;
        c.estimator = EstimatorKind::closed_form;
        c.learning_rate = 0.1;
        c.sigma.sigma0 = 1;
        c.sigma.gamma = 0.9;
        auto tr = run(c, q, Vector::Constant(5, 3.0), iters(10000));
        EXPECT_LE(tr.x_final.norm(), 1e-3) << to_string(alg);
    }
}

TEST(Lsgd, SigmaZeroIsGradientStep)
{
    OptimizerState a(vec({1, 2, 3}), 0.1), b(vec({1, 2, 3}), 0.1);
    const Vector g = vec({0.3, -0.2, 5});
    lsgd_step(a, g, 0.0);
    baseline_step(b, BaselineKind::gd, g);
    EXPECT_EQ(a.x, b.x);
    EXPECT_THROW(lsgd_step(a, g, -0.1), ConfigError);
}

TEST(Lsgd, ConstantVectorInvariant)
{
    for (int d : {3, 8, 33})
    {
        LaplacianSmoother s(d, 2.5);
        const Vector g = Vector::Constant(d, 1.7);
        EXPECT_LE((s.solve(g) - g).cwiseAbs().maxCoeff(), 1e-12) << d;
    }
}

TEST(Lsgd, MatchesDenseSolve)
{
    LaplacianSmoother s(4, 1.0);
    Matrix a(4, 4);
    a << 3, -1, 0, -1, -1, 3, -1, 0, 0, -1, 3, -1, -1, 0, -1, 3;
    EXPECT_EQ(s.matrix(), a);
    const Vector g = vec({1, 0, 0, 0});
    const Vector ref = a.fullPivLu().solve(g);
    EXPECT_LE((s.solve(g) - ref).cwiseAbs().maxCoeff(), 1e-12);
    // Fourier path against dense factorization
    for (int d : {8, 13, 64})
    {
        LaplacianSmoother big(d, 0.7);
        Vector r = Vector::LinSpaced(d, -1, 2).array().sin();
        const Vector dense = big.matrix().fullPivLu().solve(r);
        EXPECT_LE((big.solve(r) - dense).cwiseAbs().maxCoeff(), 1e-12) << d;
    }
}

TEST(Dgs, QuadraticExact)
{
    auto q = make_quadratic(4);
    const Vector x = vec({1, -2, 0.5, 3});
    auto g = dgs_grad(q.eval, x, 0.8, 5);
    EXPECT_LE((g.vector - 2 * x).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(g.f_evals_used, 20);
    auto g2 = dgs_grad(q.eval, x, 0.8, 2);
    EXPECT_LE((g2.vector - 2 * x).cwiseAbs().maxCoeff(), 1e-12);
    // rotated orthonormal basis
    Matrix b = Eigen::HouseholderQR<Matrix>(Matrix::Random(4, 4)).householderQ();
    auto g3 = dgs_grad(q.eval, x, 0.8, 5, b);
    EXPECT_LE((g3.vector - 2 * x).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Dgs, ConstantIsZero)
{
    auto g = dgs_grad([](const Vector &) { return 3.0; }, Vector::Ones(3), 0.5, 5);
    EXPECT_LE(g.vector.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Dgs, RastriginAgainstQuadrature)
{
    auto r = make_rastrigin(2);
    const Vector x = vec({0.3, -0.8});
    const double s = 0.4;
    const Vector ref = quad_grad(r.eval, x, s, 64);
    const Vector g32 = dgs_grad(r.eval, x, s, 32).vector;
    const Vector g5 = dgs_grad(r.eval, x, s, 5).vector;
    EXPECT_LE((g32 - ref).norm() / ref.norm(), 1e-6);
    RecordProperty("dgs5_relative_error", std::to_string((g5 - ref).norm() / ref.norm()));
}

TEST(Dgs, SeparableMatchesOneDimensional)
{
    auto r = make_rastrigin(3);
    auto r1 = make_rastrigin(1);
    const Vector x = vec({0.1, 1.3, -2.2});
    const Vector g = dgs_grad(r.eval, x, 0.3, 40).vector;
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(g[i], quad_grad(r1.eval, vec({x[i]}), 0.3, 40)[0], 1e-9);
}

TEST(Dgs, BasisChecks)
{
    Matrix b = Matrix::Identity(2, 2);
    b(0, 1) = 1e-6;
    EXPECT_THROW(dgs_grad(make_quadratic(2).eval, Vector::Ones(2), 0.5, 5, b), ConfigError);
    EXPECT_THROW(dgs_grad(make_quadratic(2).eval, Vector::Ones(2), 0.5, 1), ConfigError);
}

TEST(Baselines, GdLinearRate)
{
    auto q = make_quadratic(3);
    const double L = *q.lipschitz_L, t = 0.3;
    OptimizerConfig c;
    c.algorithm = Algorithm::gd;
    c.learning_rate = t;
    auto tr = run(c, q, vec({1, -1, 2}), iters(30));
    const double rate = 1 - t * L * (2 - t * L);
    for (const auto &r : tr.records)
        EXPECT_LE(r.f, std::pow(rate, static_cast<double>(r.k)) * tr.records[0].f * (1 + 1e-12) + 1e-300);
}

TEST(Baselines, AdamZeroGradient)
{
    OptimizerState st(vec({1, 2}), 0.1);
    for (int k = 0; k < 100; ++k)
        baseline_step(st, BaselineKind::adam, Vector::Zero(2));
    EXPECT_EQ(st.x, vec({1, 2}));
}

TEST(Baselines, NagFirstStepIsGd)
{
    auto q = make_quadratic(2);
    OptimizerState a(vec({1, -3}), 0.05), b(vec({1, -3}), 0.05);
    BaselineParams p;
    const Vector qa = baseline_query_point(a, BaselineKind::nag, p);
    EXPECT_EQ(qa, a.x);
    baseline_step(a, BaselineKind::nag, q.grad(qa), p);
    baseline_step(b, BaselineKind::gd, q.grad(b.x), p);
    EXPECT_EQ(a.x, b.x);
    // second step uses the look-ahead point x + 0.5 v
    const Vector look = baseline_query_point(a, BaselineKind::nag, p);
    EXPECT_EQ(look, a.x + 0.5 * a.m);
}

TEST(Baselines, RmspropFirstStep)
{
    OptimizerState st(vec({1}), 0.01);
    baseline_step(st, BaselineKind::rmsprop, vec({2}));
    // v = 0.1 * 4, step = t * 2 / (sqrt(0.4) + eps)
    EXPECT_NEAR(st.x[0], 1 - 0.01 * 2 / (std::sqrt(0.4) + 1e-8), 1e-15);
}

TEST(Run, MaxItersZero)
{
    OptimizerConfig c;
    auto tr = run(c, make_quadratic(2), vec({1, 1}), iters(0));
    ASSERT_EQ(tr.records.size(), 1u);
    EXPECT_EQ(tr.records[0].k, 0);
    EXPECT_EQ(tr.records[0].f, 2.0);
    EXPECT_EQ(tr.reason, StopReason::max_iters);
}

TEST(Run, TargetStops)
{
    OptimizerConfig c;
    c.learning_rate = 0.25;
    StoppingCriteria s;
    s.target_f = 0.01;
    s.max_iters = 100;
    // f(x_k) = 2 * 0.25^k: 2, 0.5, 0.125, 0.03125, 0.0078125
    auto tr = run(c, make_quadratic(2), vec({1, 1}), s);
    EXPECT_EQ(tr.reason, StopReason::target);
    EXPECT_EQ(tr.records.size(), 5u);
}

TEST(Run, NeedsStoppingCriterion)
{
    OptimizerConfig c;
    EXPECT_THROW(run(c, make_quadratic(2), vec({1, 1}), StoppingCriteria{}), ConfigError);
}

TEST(Run, DivergenceIsRecorded)
{
    OptimizerConfig c;
    c.learning_rate = 1e10;
    auto tr = run(c, make_rosenbrock(4), Vector::Constant(4, 3.0), iters(1000));
    EXPECT_TRUE(tr.diverged);
    EXPECT_EQ(tr.reason, StopReason::divergence);
    EXPECT_LT(tr.records.size(), 1001u);
    EXPECT_TRUE(tr.x_final.allFinite());
    for (const auto &r : tr.records)
        EXPECT_TRUE(std::isfinite(r.f));
}

TEST(Run, EvalBudgetAndMonotoneCounts)
{
    OptimizerConfig c;
    c.algorithm = Algorithm::dgs;
    c.learning_rate = 1e-3;
    c.sigma = constant_sigma(0.1);
    StoppingCriteria s;
    s.max_f_evals = 1000;
    auto tr = run(c, make_levy(10), Vector::Constant(10, 2.0), s);
    EXPECT_EQ(tr.reason, StopReason::max_f_evals);
    EXPECT_EQ(tr.records.back().f_evals, 1000);
    for (std::size_t i = 1; i < tr.records.size(); ++i)
        EXPECT_GE(tr.records[i].f_evals, tr.records[i - 1].f_evals);
}

TEST(Run, LsgdSigmaZeroMatchesGd)
{
    auto r = make_rosenbrock(10);
    const Vector x0 = sample_initial_points(r, 1, 4)[0];
    OptimizerConfig gd;
    gd.learning_rate = 1e-5;
    OptimizerConfig ls = gd;
    ls.algorithm = Algorithm::lsgd;
    ls.lsgd_sigma = 0;
    auto a = run(gd, r, x0, iters(1000), {0, true});
    auto b = run(ls, r, x0, iters(1000), {0, true});
    ASSERT_EQ(a.iterates.size(), b.iterates.size());
    for (std::size_t i = 0; i < a.iterates.size(); ++i)
        ASSERT_EQ(a.iterates[i], b.iterates[i]);
}

TEST(Run, AdaptiveRestartUsesContext)
{
    // x^2 - x^4 has a local minimum at 0 where f_sigma(0) = sigma^2/2 - 3 sigma^4/4 < f(0) for sigma^2 > 2/3,
    // and the symmetric quadrature gradient is exactly zero, so the iterate stalls immediately.
    ObjectiveFunction w;
    w.name = "well";
    w.dim = 1;
    w.eval = [](const Vector &x) { return x[0] * x[0] - x[0] * x[0] * x[0] * x[0]; };
    w.domain = {vec({-1}), vec({1})};
    OptimizerConfig c;
    c.algorithm = Algorithm::gsmoothgd;
    c.estimator = EstimatorKind::quadrature;
    c.learning_rate = 1e-2;
    c.sigma.kind = ScheduleKind::adaptive_restart;
    c.sigma.sigma0 = 2.0;
    c.sigma.gamma = 0.9;
    c.sigma.boost = 10;
    c.sigma.max_restarts = 1;
    c.sigma.stall_window = 5;
    auto tr = run(c, w, vec({0.0}), iters(30));
    std::vector<double> sig;
    for (std::size_t i = 1; i < tr.records.size(); ++i)
        sig.push_back(tr.records[i].sigma);
    // decays for the first window, then one boost to 10 * sigma0, then decays again
    EXPECT_EQ(sig[0], 2.0);
    EXPECT_EQ(sig[1], 1.8);
    int jumps = 0;
    for (std::size_t i = 1; i < sig.size(); ++i)
        if (sig[i] > sig[i - 1])
        {
            ++jumps;
            EXPECT_EQ(sig[i], 20.0);
        }
    EXPECT_EQ(jumps, 1);
}

TEST(Names, RoundTrip)
{
    for (auto a : all_algorithms())
        EXPECT_EQ(algorithm_from_string(to_string(a)), a);
    EXPECT_THROW(algorithm_from_string("bfgs"), ConfigError);
}
