#include "gsmooth/verify.hpp"

#include "gsmooth/quadrature.hpp"
#include "gsmooth/random.hpp"
#include "gsmooth/smoothing.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

namespace gsmooth::verify
{
    namespace
    {
        constexpr double golden = 0.61803398874989484820;

        std::string fmt(double v)
        {
            std::ostringstream os;
            os.precision(6);
            os << v;
            return os.str();
        }

        std::string describe(const ObjectiveFunction &f)
        {
            return f.name + " d=" + std::to_string(f.dim);
        }

        double golden_section(const std::function<double(double)> &g, double a, double b, int iters, double &fx)
        {
            double c = b - golden * (b - a), d = a + golden * (b - a);
            double fc = g(c), fd = g(d);
            for (int i = 0; i < iters; ++i)
            {
                if (fc <= fd)
                {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - golden * (b - a);
                    fc = g(c);
                }
                else
                {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + golden * (b - a);
                    fd = g(d);
                }
            }
            if (fc <= fd)
            {
                fx = fc;
                return c;
            }
            fx = fd;
            return d;
        }

        struct Grid1d
        {
            std::vector<double> x, y;
        };

        Grid1d sample_grid(const std::function<double(double)> &g, double lo, double hi, int n)
        {
            if (n < 3 || !(hi > lo))
                throw ConfigError("grid needs at least 3 points on a non-empty interval");
            Grid1d grid{std::vector<double>(n), std::vector<double>(n)};
            for (int i = 0; i < n; ++i)
            {
                grid.x[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
                grid.y[i] = g(grid.x[i]);
            }
            return grid;
        }

        Minimum1d refine_at(const std::function<double(double)> &g, const Grid1d &grid, int i, int refine)
        {
            const int n = static_cast<int>(grid.x.size());
            const double a = grid.x[std::max(0, i - 1)];
            const double b = grid.x[std::min(n - 1, i + 1)];
            Minimum1d m{grid.x[i], grid.y[i], i == 0 || i == n - 1};
            double fr;
            const double xr = golden_section(g, a, b, refine, fr);
            if (fr < m.value)
            {
                m.x = xr;
                m.value = fr;
            }
            return m;
        }

        /// Smoothed value for the oracles: closed form when available, quadrature otherwise.
        std::function<double(double)> smoothed_1d(const ObjectiveFunction &f, double sigma)
        {
            Vector buf(1);
            if (sigma == 0)
                return [&f, buf](double x) mutable {
                    buf[0] = x;
                    return f.eval(buf);
                };
            if (f.has_closed_form())
                return [&f, sigma, buf](double x) mutable {
                    buf[0] = x;
                    return f.smoothed_eval(buf, sigma);
                };
            return [&f, sigma, buf](double x) mutable {
                buf[0] = x;
                return quad_value(f.eval, buf, sigma, 64);
            };
        }

        double smoothed_derivative_1d(const ObjectiveFunction &f, double x, double sigma)
        {
            Vector v(1);
            v[0] = x;
            if (f.has_closed_form())
                return f.smoothed_grad(v, sigma)[0];
            return quad_grad(f.eval, v, sigma, 64)[0];
        }

        double require_L(const ObjectiveFunction &f, const char *what)
        {
            if (!f.lipschitz_L)
                throw ConfigError(std::string(what) + " needs a smoothness constant for '" + f.name + "'");
            return *f.lipschitz_L;
        }

        /// f* from the catalog or by grid search over the domain (d <= 2).
        double optimum_value(const ObjectiveFunction &f)
        {
            if (f.f_star)
                return *f.f_star;
            if (f.dim > 2)
                throw ConfigError("no known minimum for '" + f.name + "'");
            return minimize_box(f.eval, f.domain).value;
        }

        MinimumNd smoothed_minimizer(const ObjectiveFunction &f, double sigma)
        {
            if (f.dim > 2)
                throw ConfigError("grid minimizer oracle restricted to d <= 2");
            auto g = [&f, sigma](const Vector &x) {
                if (sigma == 0)
                    return f.eval(x);
                return f.has_closed_form() ? f.smoothed_eval(x, sigma) : quad_value(f.eval, x, sigma, 64);
            };
            return minimize_box(g, f.domain);
        }

        struct Welford
        {
            void add(double v)
            {
                ++n;
                const double d = v - mean;
                mean += d / static_cast<double>(n);
                m2 += d * (v - mean);
            }
            double se() const
            {
                return n < 2 ? 0.0 : std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
            }
            std::int64_t n = 0;
            double mean = 0, m2 = 0;
        };
    }

    void CheckReport::settle()
    {
        if (kind == CheckKind::identity)
            pass = std::abs(measured - bound) <= tolerance && violations == 0;
        else
            pass = measured <= bound + tolerance && violations == 0;
        if (inconclusive)
            pass = false;
    }

    nlohmann::json to_json(const CheckReport &r)
    {
        return {{"name", r.name},
                {"instance", r.instance},
                {"kind", r.kind == CheckKind::identity ? "identity" : "inequality"},
                {"measured", r.measured},
                {"bound", r.bound},
                {"margin", r.margin()},
                {"tolerance", r.tolerance},
                {"violations", r.violations},
                {"points", r.points},
                {"pass", r.pass},
                {"inconclusive", r.inconclusive},
                {"detail", r.detail}};
    }

    // ------------------------------------------------------------------ oracles

    Minimum1d minimize_1d(const std::function<double(double)> &g, double lo, double hi, int grid, int refine)
    {
        const auto samples = sample_grid(g, lo, hi, grid);
        const auto best = std::min_element(samples.y.begin(), samples.y.end()) - samples.y.begin();
        return refine_at(g, samples, static_cast<int>(best), refine);
    }

    std::vector<Minimum1d> global_minimizers_1d(const std::function<double(double)> &g, double lo, double hi,
                                                double value_tol, int grid, int refine)
    {
        const auto s = sample_grid(g, lo, hi, grid);
        const int n = grid;
        std::vector<Minimum1d> local;
        for (int i = 0; i < n; ++i)
        {
            const bool left = i == 0 || s.y[i] <= s.y[i - 1];
            const bool right = i == n - 1 || s.y[i] <= s.y[i + 1];
            if (left && right)
                local.push_back(refine_at(g, s, i, refine));
        }
        double best = INFINITY;
        for (const auto &m : local)
            best = std::min(best, m.value);
        std::vector<Minimum1d> out;
        const double spacing = (hi - lo) / (n - 1);
        for (const auto &m : local)
        {
            if (m.value - best > value_tol)
                continue;
            if (!out.empty() && std::abs(out.back().x - m.x) <= 2 * spacing)
                continue;
            out.push_back(m);
        }
        return out;
    }

    MinimumNd minimize_box(const std::function<double(const Vector &)> &g, const Box &box, int grid_points,
                           int refine)
    {
        const auto d = box.lo.size();
        if (d == 1)
        {
            Vector buf(1);
            auto g1 = [&](double x) {
                buf[0] = x;
                return g(buf);
            };
            auto m = minimize_1d(g1, box.lo[0], box.hi[0], grid_points, refine);
            Vector x(1);
            x[0] = m.x;
            return {x, m.value, m.on_boundary};
        }
        if (d != 2)
            throw ConfigError("grid minimizer oracle restricted to d <= 2");

        const int side = std::max(3, static_cast<int>(std::sqrt(static_cast<double>(grid_points))));
        const Vector h = (box.hi - box.lo) / (side - 1);
        Vector x(2), best_x(2);
        double best = INFINITY;
        int bi = 0, bj = 0;
        for (int i = 0; i < side; ++i)
            for (int j = 0; j < side; ++j)
            {
                x << box.lo[0] + h[0] * i, box.lo[1] + h[1] * j;
                const double v = g(x);
                if (v < best)
                {
                    best = v;
                    best_x = x;
                    bi = i;
                    bj = j;
                }
            }
        MinimumNd out{best_x, best, bi == 0 || bj == 0 || bi == side - 1 || bj == side - 1};
        // alternating coordinate refinement inside the bracketing cell
        Vector lo = best_x - h, hi = best_x + h;
        lo = lo.cwiseMax(box.lo);
        hi = hi.cwiseMin(box.hi);
        Vector cur = best_x;
        for (int sweep = 0; sweep < 20; ++sweep)
            for (int c = 0; c < 2; ++c)
            {
                Vector trial = cur;
                auto gc = [&](double t) {
                    trial[c] = t;
                    return g(trial);
                };
                double fv;
                const double t = golden_section(gc, lo[c], hi[c], refine, fv);
                if (fv < out.value)
                {
                    cur[c] = t;
                    out.value = fv;
                    out.x = cur;
                }
            }
        return out;
    }

    double smoothed_value(const ObjectiveFunction &f, const Vector &x, double sigma, int points)
    {
        if (sigma == 0)
            return f.eval(x);
        if (x.size() <= max_quadrature_dim)
            return quad_value(f.eval, x, sigma, points);
        if (f.has_closed_form())
            return f.smoothed_eval(x, sigma);
        throw DomainError("no smoothed value oracle for '" + f.name + "' in d=" + std::to_string(x.size()));
    }

    // ------------------------------------------------------------------ lemma checks

    CheckReport check_value_gap(const ObjectiveFunction &f, double sigma, double tau, int points, std::uint64_t seed,
                                bool expect_equality, double equality_tol)
    {
        if (!f.lipschitz_L && !f.lipschitz_M)
            throw ConfigError("value gap check needs a smoothness or Lipschitz constant for '" + f.name + "'");
        if (!(sigma >= 0 && tau >= sigma))
            throw ConfigError("value gap check needs 0 <= sigma <= tau");
        const double d = static_cast<double>(f.dim);
        const double bound = f.lipschitz_L ? (tau * tau - sigma * sigma) * *f.lipschitz_L * d / 4
                                           : *f.lipschitz_M * (tau - sigma) * std::sqrt(d / 2);
        CheckReport r;
        r.name = "value_gap";
        r.instance = describe(f) + " sigma=" + fmt(sigma) + " tau=" + fmt(tau);
        r.bound = bound;
        r.tolerance = 1e-9;
        double worst_eq = 0;
        for (const auto &x : sample_initial_points(f, points, seed))
        {
            const double ft = smoothed_value(f, x, tau), fs = smoothed_value(f, x, sigma);
            const double gap = std::abs(ft - fs);
            const double tol = r.tolerance * std::max(1.0, std::abs(ft));
            r.measured = std::max(r.measured, gap);
            if (gap > bound + tol)
                ++r.violations;
            if (expect_equality)
            {
                worst_eq = std::max(worst_eq, std::abs(gap - bound));
                if (std::abs(gap - bound) > equality_tol)
                    ++r.violations;
            }
            ++r.points;
        }
        if (expect_equality)
            r.detail = "max |gap - bound| = " + fmt(worst_eq) + " (equality tolerance " + fmt(equality_tol) + ")";
        r.settle();
        return r;
    }

    CheckReport check_chain_of_smoothing(const ObjectiveFunction &f, double sigma, double tau,
                                         const std::vector<Vector> &points, double tol, int points_per_dim)
    {
        if (f.dim > 2)
            throw ConfigError("chain of smoothing check restricted to d <= 2");
        CheckReport r;
        r.name = "chain_of_smoothing";
        r.instance = describe(f) + " sigma=" + fmt(sigma) + " tau=" + fmt(tau);
        r.bound = tol;
        r.tolerance = 0;
        const double eta = std::hypot(sigma, tau);
        const ScalarFn inner = [&](const Vector &y) { return quad_value(f.eval, y, sigma, points_per_dim); };
        for (const auto &x : points)
        {
            const double nested = quad_value(inner, x, tau, points_per_dim);
            const double direct = quad_value(f.eval, x, eta, points_per_dim);
            const double rel = std::abs(nested - direct) / std::max(std::abs(direct), 1e-300);
            r.measured = std::max(r.measured, rel);
            if (rel > tol)
                ++r.violations;
            ++r.points;
        }
        r.settle();
        return r;
    }

    CheckReport check_chain_of_smoothing(const ObjectiveFunction &f, int triples, std::uint64_t seed, double tol)
    {
        Rng rng(derive_seed(seed, f.name));
        CheckReport total;
        total.name = "chain_of_smoothing";
        total.instance = describe(f) + " random triples=" + std::to_string(triples);
        total.bound = tol;
        for (int i = 0; i < triples; ++i)
        {
            Vector x(f.dim);
            for (Eigen::Index k = 0; k < f.dim; ++k)
                x[k] = rng.uniform(f.domain.lo[k], f.domain.hi[k]);
            const double sigma = rng.uniform(0.05, 1.0), tau = rng.uniform(0.05, 1.0);
            auto one = check_chain_of_smoothing(f, sigma, tau, {x}, tol);
            total.measured = std::max(total.measured, one.measured);
            total.violations += one.violations;
            total.points += one.points;
        }
        total.settle();
        return total;
    }

    CheckReport check_min_gap(const ObjectiveFunction &f, double sigma, double tol)
    {
        const double L = require_L(f, "min gap check");
        const double fstar = optimum_value(f);
        const auto m = smoothed_minimizer(f, sigma);
        CheckReport r;
        r.name = "min_gap";
        r.instance = describe(f) + " sigma=" + fmt(sigma);
        r.measured = m.value - fstar;
        r.bound = sigma * sigma * L * static_cast<double>(f.dim) / 4;
        r.tolerance = tol;
        r.points = 1;
        if (r.measured < -tol)
            ++r.violations;
        r.inconclusive = m.on_boundary;
        r.detail = "x*_sigma[0]=" + fmt(m.x[0]) + " lower side " + (r.measured >= -tol ? "ok" : "violated");
        if (m.on_boundary)
            r.detail += "; grid minimizer on the box boundary";
        r.settle();
        return r;
    }

    CheckReport check_candidate_region(const ObjectiveFunction &f, double sigma, double tol)
    {
        const double L = require_L(f, "candidate region check");
        const double fstar = optimum_value(f);
        const auto m = smoothed_minimizer(f, sigma);
        CheckReport r;
        r.name = "candidate_region";
        r.instance = describe(f) + " sigma=" + fmt(sigma);
        r.measured = f.eval(m.x) - fstar;
        r.bound = sigma * sigma * L * static_cast<double>(f.dim) / 4;
        r.tolerance = tol;
        r.points = 1;
        r.inconclusive = m.on_boundary;
        r.detail = "x*_sigma[0]=" + fmt(m.x[0]);
        r.settle();
        return r;
    }

    // ------------------------------------------------------------------ convergence bounds

    double convex_bound(double dist0_sq, double t, double L, double d, const std::vector<double> &sigmas,
                        std::int64_t k)
    {
        if (k < 1 || k > static_cast<std::int64_t>(sigmas.size()))
            throw ConfigError("convex bound needs 1 <= k <= number of radii");
        double s1 = 0, s2 = 0;
        for (std::int64_t i = 1; i <= k; ++i)
        {
            const double si = sigmas[i - 1] * sigmas[i - 1];
            s1 += si;
            if (i >= 2)
                s2 += static_cast<double>(i) * std::max(0.0, si - sigmas[i - 2] * sigmas[i - 2]);
        }
        const double kd = static_cast<double>(k);
        return dist0_sq / (2 * t * kd) + L * d / (4 * kd) * (s1 + s2);
    }

    double convex_bound_constant(double dist0_sq, double t, double L, double d, double sigma, std::int64_t k)
    {
        return dist0_sq / (2 * t * static_cast<double>(k)) + L * d * sigma * sigma / 4;
    }

    CheckReport check_convex_bound(const ObjectiveFunction &f, const OptimizerTrace &trace, const Vector &x0,
                                   double t, bool constant_form, double tol)
    {
        if (!f.convex)
            throw ConfigError("convex bound check refused: '" + f.name + "' is not convex");
        if (!f.x_star || !f.f_star)
            throw ConfigError("convex bound check needs x* and f*");
        const double L = require_L(f, "convex bound check");
        if (t > 1 / L * (1 + 1e-12))
            throw ConfigError("convex bound requires t <= 1/L");
        const auto K = static_cast<std::int64_t>(trace.records.size()) - 1;
        if (K < 1)
            throw ConfigError("convex bound check needs at least one step");

        const double d = static_cast<double>(f.dim);
        const double dist0 = (x0 - *f.x_star).squaredNorm();
        std::vector<double> sig(K);
        for (std::int64_t i = 1; i <= K; ++i)
            sig[i - 1] = trace.records[i].sigma;
        if (constant_form)
            for (double s : sig)
                if (s != sig[0])
                    throw ConfigError("constant-radius form needs a constant sigma sequence");

        CheckReport r;
        r.name = constant_form ? "convex_bound_constant" : "convex_bound";
        r.instance = describe(f) + " t=" + fmt(t) + " k=" + std::to_string(K);
        r.tolerance = tol;
        // running sums, recomputed here from the recorded radii
        double s1 = 0, s2 = 0, worst = -INFINITY;
        for (std::int64_t k = 1; k <= K; ++k)
        {
            const double sk = sig[k - 1] * sig[k - 1];
            s1 += sk;
            if (k >= 2)
                s2 += static_cast<double>(k) * std::max(0.0, sk - sig[k - 2] * sig[k - 2]);
            const double kd = static_cast<double>(k);
            const double bound = constant_form ? dist0 / (2 * t * kd) + L * d * sig[0] * sig[0] / 4
                                               : dist0 / (2 * t * kd) + L * d / (4 * kd) * (s1 + s2);
            const double gap = trace.records[k].f - *f.f_star;
            worst = std::max(worst, gap - bound);
            if (gap > bound + tol * std::max(1.0, bound))
                ++r.violations;
            ++r.points;
            if (k == K)
            {
                r.measured = gap;
                r.bound = bound;
            }
        }
        r.detail = "max over k of (gap - bound) = " + fmt(worst);
        for (const auto &x : trace.iterates)
            if (!f.domain.contains(x))
            {
                r.inconclusive = true;
                r.detail += "; iterate left the box on which L holds";
                break;
            }
        r.settle();
        return r;
    }

    CheckReport check_nonconvex_bound(const ObjectiveFunction &f, const OptimizerTrace &trace, double t,
                                      bool constant_form, double tol)
    {
        const double L = require_L(f, "non-convex bound check");
        if (!f.has_grad())
            throw ConfigError("non-convex bound check needs the analytic gradient");
        if (trace.iterates.size() != trace.records.size())
            throw ConfigError("non-convex bound check needs a trace with iterates");
        if (t > 1 / L * (1 + 1e-12))
            throw ConfigError("non-convex bound requires t <= 1/L");
        const auto K = static_cast<std::int64_t>(trace.records.size()) - 1;
        if (K < (constant_form ? 1 : 2))
            throw ConfigError("non-convex bound check needs more steps");

        const double d = static_cast<double>(f.dim);
        const double c3 = L * L * std::pow(6 + d, 3) / 4;
        CheckReport r;
        r.name = constant_form ? "nonconvex_bound_constant" : "nonconvex_bound";
        r.instance = describe(f) + " t=" + fmt(t) + " k=" + std::to_string(K);
        r.tolerance = tol;

        auto sigma = [&](std::int64_t i) { return trace.records[i].sigma; };
        double min_g = INFINITY, worst = -INFINITY;
        if (constant_form)
        {
            const double s = sigma(1);
            for (std::int64_t i = 1; i <= K; ++i)
                if (sigma(i) != s)
                    throw ConfigError("constant-radius form needs a constant sigma sequence");
            const double drop = trace.records[0].f - optimum_value(f);
            for (std::int64_t k = 1; k <= K; ++k)
            {
                min_g = std::min(min_g, f.grad(trace.iterates[k]).squaredNorm());
                const double bound = 4 / (t * static_cast<double>(k)) * drop + c3 * s * s;
                worst = std::max(worst, min_g - bound);
                if (min_g > bound + tol * std::max(1.0, bound))
                    ++r.violations;
                ++r.points;
                if (k == K)
                {
                    r.measured = min_g;
                    r.bound = bound;
                }
            }
        }
        else
        {
            // the bound after k steps involves x_{k+1} and sigma_{k+1}, so k runs to K - 1
            const double f1 = smoothed_value(f, trace.iterates[1], sigma(1));
            double jump = 0, sq = 0;
            for (std::int64_t k = 1; k < K; ++k)
            {
                min_g = std::min(min_g, f.grad(trace.iterates[k]).squaredNorm());
                const double a = sigma(k) * sigma(k), b = sigma(k + 1) * sigma(k + 1);
                jump += std::abs(b - a);
                sq += b;
                const double kd = static_cast<double>(k);
                const double fk1 = smoothed_value(f, trace.iterates[k + 1], sigma(k + 1));
                const double bound = 4 / (t * kd) * (f1 - fk1) + L * d / (2 * t * kd) * jump + c3 / kd * sq;
                worst = std::max(worst, min_g - bound);
                if (min_g > bound + tol * std::max(1.0, bound))
                    ++r.violations;
                ++r.points;
                if (k == K - 1)
                {
                    r.measured = min_g;
                    r.bound = bound;
                }
            }
        }
        r.detail = "max over k of (min |grad|^2 - bound) = " + fmt(worst);
        for (const auto &x : trace.iterates)
            if (!f.domain.contains(x))
            {
                r.inconclusive = true;
                r.detail += "; iterate left the box on which L holds";
                break;
            }
        r.settle();
        return r;
    }

    CheckReport check_mc_bound(const McEnsembleConfig &c)
    {
        if (c.runs < 2 || c.steps < 1 || c.n_samples < 1)
            throw ConfigError("mc bound check needs runs >= 2, steps >= 1, n_samples >= 1");
        const auto q = make_quadratic(c.dim);
        const double L = *q.lipschitz_L;
        const double d = static_cast<double>(c.dim);
        const double N = c.n_samples;
        const double t = c.t_fraction / (2 * L * (d + 4));
        if (!(c.t_fraction > 0 && c.t_fraction < 1))
            throw ConfigError("mc bound requires 0 < t < 1/(2L(d+4))");
        const Vector x0 = sample_initial_points(q, 1, c.seed)[0];

        OptimizerConfig oc;
        oc.algorithm = Algorithm::mc_gsmoothgd;
        oc.learning_rate = t;
        oc.n_samples = c.n_samples;
        oc.sigma.kind = ScheduleKind::square_summable;
        oc.sigma.sigma0 = c.sigma0;
        StoppingCriteria stop;
        stop.max_iters = c.steps;

        const auto K = static_cast<std::size_t>(c.steps);
        std::vector<Welford> grad_sq(K + 1), fsig(K + 1);
        std::vector<double> sig(K + 1, 0);
        for (int run_id = 0; run_id < c.runs; ++run_id)
        {
            auto tr = run(oc, q, x0, stop, {derive_seed(c.seed, static_cast<std::uint64_t>(run_id)), true});
            if (tr.records.size() != K + 1)
                throw Error("mc ensemble run stopped early");
            for (std::size_t i = 0; i <= K; ++i)
            {
                grad_sq[i].add(q.grad(tr.iterates[i]).squaredNorm());
                if (i >= 1)
                {
                    sig[i] = tr.records[i].sigma;
                    fsig[i].add(q.smoothed_eval(tr.iterates[i], sig[i]));
                }
            }
        }

        CheckReport r;
        r.name = "mc_bound";
        r.instance = "quadratic d=" + std::to_string(c.dim) + " N=" + std::to_string(c.n_samples) +
                     " runs=" + std::to_string(c.runs) + " t=" + fmt(t);
        const double factor = N / (N - 2 * L * t * (d + 4));
        const double fx0 = q.eval(x0);
        double min_mean = INFINITY, min_se = 0, sum_sq = 0, worst = -INFINITY;
        for (std::size_t k = 1; k <= K; ++k)
        {
            // LHS: min over i = 0..k-1 of the ensemble mean
            if (grad_sq[k - 1].mean < min_mean)
            {
                min_mean = grad_sq[k - 1].mean;
                min_se = grad_sq[k - 1].se();
            }
            sum_sq += sig[k] * sig[k];
            const double kd = static_cast<double>(k);
            const double bound = factor / kd *
                                 (4 * (fx0 - fsig[k].mean) / t +
                                  (L * L * L * t * std::pow(d + 6, 3) / (4 * N) + 2 * L * d / t) * sum_sq);
            const double bound_se = factor / kd * 4 / t * fsig[k].se();
            const double allowance = 3 * std::hypot(min_se, bound_se);
            worst = std::max(worst, min_mean - bound - allowance);
            if (min_mean > bound + allowance)
                ++r.violations;
            ++r.points;
            if (k == K)
            {
                r.measured = min_mean;
                r.bound = bound;
                r.tolerance = allowance;
            }
        }
        r.detail = "max over k of (lhs - bound - 3se) = " + fmt(worst);
        r.settle();
        return r;
    }

    std::vector<CheckReport> check_variance_identity(const ObjectiveFunction &f, const Vector &x, double sigma,
                                                     const VarianceConfig &c)
    {
        const ScalarFn fn = f.eval;
        double grad_sq;
        if (f.dim <= max_quadrature_dim)
            grad_sq = quad_grad(fn, x, sigma, 64).squaredNorm();
        else if (f.has_closed_form())
            grad_sq = f.smoothed_grad(x, sigma).squaredNorm();
        else
            throw ConfigError("variance identity needs an exact smoothed gradient");

        GaussianSampler moment_sampler(f.dim, derive_seed(c.seed, "moment"));
        Welford moment;
        Vector u;
        for (int i = 0; i < c.moment_samples; ++i)
        {
            moment_sampler.draw(u);
            const double delta = fd_delta(fn, x, u, sigma, c.scheme);
            moment.add(delta * delta * u.squaredNorm());
        }

        std::vector<CheckReport> out;
        for (int n : c.n_values)
        {
            GaussianSampler s(f.dim, derive_seed(c.seed, static_cast<std::uint64_t>(n)));
            Welford second;
            for (int b = 0; b < c.batches; ++b)
                second.add(mc_grad_fd(fn, x, sigma, n, c.scheme, s).vector.squaredNorm());
            const double nd = n;
            CheckReport r;
            r.name = "variance_identity";
            r.kind = CheckKind::identity;
            r.instance = describe(f) + " sigma=" + fmt(sigma) + " N=" + std::to_string(n);
            r.measured = second.mean;
            r.bound = moment.mean / nd + (1 - 1 / nd) * grad_sq;
            r.tolerance = 3 * std::hypot(second.se(), moment.se() / nd);
            r.points = c.batches;
            r.detail = "E(delta^2|u|^2)=" + fmt(moment.mean) + " |grad f_sigma|^2=" + fmt(grad_sq);
            r.settle();
            out.push_back(r);
        }
        return out;
    }

    // ------------------------------------------------------------------ minimizers

    CheckReport check_minimizer_convergence(const ObjectiveFunction &f, int levels, double final_tol,
                                            double mono_tol)
    {
        if (f.dim != 1)
            throw ConfigError("minimizer convergence check is one-dimensional");
        const double lo = f.domain.lo[0], hi = f.domain.hi[0];
        const auto targets = global_minimizers_1d(smoothed_1d(f, 0), lo, hi);
        CheckReport r;
        r.name = "minimizer_convergence";
        r.instance = describe(f) + " sigma=2^-1..2^-" + std::to_string(levels);
        r.bound = final_tol;
        std::ostringstream detail;
        detail << "minimizers of f:";
        for (const auto &m : targets)
            detail << ' ' << fmt(m.x);
        detail << "; distances:";
        double prev = INFINITY;
        for (int n = 1; n <= levels; ++n)
        {
            const double sigma = std::ldexp(1.0, -n);
            const auto m = minimize_1d(smoothed_1d(f, sigma), lo, hi);
            double dist = INFINITY;
            for (const auto &tm : targets)
                dist = std::min(dist, std::abs(m.x - tm.x));
            detail << ' ' << fmt(dist);
            if (dist > prev + mono_tol)
                ++r.violations;
            if (m.on_boundary)
                r.inconclusive = true;
            prev = dist;
            r.measured = dist;
            ++r.points;
        }
        r.detail = detail.str();
        r.settle();
        return r;
    }

    double no_minimizer_log_slope(double x, double sigma)
    {
        if (!(sigma > 0))
            throw DomainError("sigma must be positive");
        // derivative = -(1/sqrt(pi)) int_{a}^{inf} exp(-u^2) du with a = x / sigma; substituting
        // u = |a| + s gives the tail exp(-a^2) I(|a|), I(a) = int_0^inf exp(-2as - s^2) ds.
        const double a = x / sigma;
        const double b = std::abs(a);
        boost::math::quadrature::exp_sinh<double> integrator;
        const double tail_integral = integrator.integrate([b](double s) { return std::exp(-2 * b * s - s * s); });
        const double log_tail = -b * b + std::log(tail_integral) - 0.5 * std::log(std::numbers::pi);
        if (a >= 0)
            return log_tail;
        return std::log1p(-std::exp(log_tail));
    }

    CheckReport check_no_smoothed_minimizer(int probes)
    {
        if (probes < 2)
            throw ConfigError("need at least two probes");
        CheckReport r;
        r.name = "no_smoothed_minimizer";
        r.instance = "f(x)=-x*1{x<0}, x in [-100,100], sigma in {0.1,1,10}";
        r.bound = 0;
        double max_log = -INFINITY, min_log = INFINITY, max_rel = 0;
        for (double sigma : {0.1, 1.0, 10.0})
        {
            double prev = INFINITY;
            for (int i = 0; i < probes; ++i)
            {
                const double x = -100 + 200.0 * i / (probes - 1);
                const double lg = no_minimizer_log_slope(x, sigma);
                ++r.points;
                // strictly negative derivative <=> finite log-magnitude
                if (!std::isfinite(lg))
                    ++r.violations;
                // magnitude decreases as x grows
                if (lg > prev + 1e-12 * std::max(1.0, std::abs(prev)))
                    ++r.violations;
                prev = lg;
                max_log = std::max(max_log, lg);
                min_log = std::min(min_log, lg);
                // second route where double precision can represent the value
                const double ref = 0.5 * std::erfc(x / sigma);
                if (ref > 1e-300)
                {
                    const double rel = std::abs(std::exp(lg) - ref) / ref;
                    max_rel = std::max(max_rel, rel);
                    if (rel > 1e-9)
                        ++r.violations;
                }
            }
        }
        r.measured = static_cast<double>(r.violations);
        r.detail = "log|f_sigma'| in [" + fmt(min_log) + ", " + fmt(max_log) +
                   "]; max relative deviation from erfc route " + fmt(max_rel);
        r.settle();
        return r;
    }

    CheckReport check_smoothed_minimizer_exists(const ObjectiveFunction &f, double eps)
    {
        if (f.dim != 1)
            throw ConfigError("existence check is one-dimensional");
        const double L = require_L(f, "existence check");
        const double fstar = optimum_value(f);
        const double lo = f.domain.lo[0], hi = f.domain.hi[0];
        CheckReport r;
        r.name = "smoothed_minimizer_exists";
        r.instance = describe(f) + " eps=" + fmt(eps);
        // the sublevel set f*(eps) must sit strictly inside the box
        Vector e(1);
        e[0] = lo;
        const double flo = f.eval(e);
        e[0] = hi;
        const double fhi = f.eval(e);
        if (!(flo - fstar > eps && fhi - fstar > eps))
        {
            r.inconclusive = true;
            r.detail = "sublevel set reaches the box boundary";
            r.settle();
            return r;
        }
        const double threshold = std::sqrt(4 * eps / (3 * L * static_cast<double>(f.dim)));
        r.bound = 1e-5;
        std::ostringstream detail;
        detail << "sigma threshold " << fmt(threshold) << ";";
        for (double frac : {0.25, 0.5, 0.75, 0.99})
        {
            const double sigma = frac * threshold;
            const auto m = minimize_1d(smoothed_1d(f, sigma), lo, hi);
            const double slope = std::abs(smoothed_derivative_1d(f, m.x, sigma));
            const double scaled = slope / std::max(1.0, std::abs(m.value));
            detail << " sigma=" << fmt(sigma) << " x*=" << fmt(m.x) << " |f'|=" << fmt(slope);
            if (m.on_boundary || scaled > r.bound)
                ++r.violations;
            r.measured = std::max(r.measured, scaled);
            ++r.points;
        }
        r.detail = detail.str();
        r.settle();
        return r;
    }

    // ------------------------------------------------------------------ suites

    namespace
    {
        using Task = std::function<std::vector<CheckReport>()>;

        Task single(std::function<CheckReport()> fn)
        {
            return [fn] { return std::vector<CheckReport>{fn()}; };
        }

        OptimizerTrace exact_run(const ObjectiveFunction &f, EstimatorKind source, double t, ScheduleKind kind,
                                 double sigma0, int iters, const Vector &x0)
        {
            OptimizerConfig c;
            c.algorithm = Algorithm::gsmoothgd;
            c.estimator = source;
            c.quad_points = 64;
            c.learning_rate = t;
            c.sigma.kind = kind;
            c.sigma.sigma0 = sigma0;
            StoppingCriteria s;
            s.max_iters = iters;
            return run(c, f, x0, s, {0, true});
        }

        std::vector<Task> lemma_tasks()
        {
            return {
                single([] { return check_chain_of_smoothing(make_rastrigin(1), 20, 1); }),
                single([] { return check_chain_of_smoothing(make_quadratic(1), 20, 2); }),
                single([] {
                    auto q = make_quadratic(2);
                    return check_chain_of_smoothing(q, 3, 4, sample_initial_points(q, 5, 3), 1e-10, 6);
                }),
                single([] { return check_value_gap(make_quadratic(1), 0, 1, 100, 4, true); }),
                single([] { return check_value_gap(make_quadratic(2), 0.3, 1.1, 100, 5, true); }),
                single([] { return check_value_gap(make_rastrigin(1), 0.2, 0.5, 100, 6); }),
                single([] { return check_value_gap(make_figure1(), 0.1, 0.4, 100, 7); }),
                single([] { return check_min_gap(make_quadratic(2), 0.5); }),
                single([] { return check_min_gap(make_figure1(), 0.5); }),
                [] {
                    auto q = make_quadratic(5);
                    return check_variance_identity(q, Vector::Ones(5), 0.3);
                },
            };
        }

        std::vector<Task> convex_tasks()
        {
            auto q = std::make_shared<ObjectiveFunction>(make_quadratic(10));
            const double t = 1 / *q->lipschitz_L;
            const Vector x0 = sample_initial_points(*q, 1, 31)[0];
            return {
                single([q, t, x0] {
                    auto tr = exact_run(*q, EstimatorKind::closed_form, t, ScheduleKind::square_summable, 1.0,
                                        1000, x0);
                    return check_convex_bound(*q, tr, x0, t);
                }),
                [q, t, x0] {
                    auto tr =
                        exact_run(*q, EstimatorKind::closed_form, t, ScheduleKind::constant, 0.5, 1000, x0);
                    return std::vector<CheckReport>{check_convex_bound(*q, tr, x0, t),
                                                    check_convex_bound(*q, tr, x0, t, true)};
                },
            };
        }

        std::vector<Task> nonconvex_tasks()
        {
            auto r = std::make_shared<ObjectiveFunction>(make_rastrigin(1));
            const double t = 1 / *r->lipschitz_L;
            const Vector x0 = sample_initial_points(*r, 1, 41)[0];
            return {
                single([r, t, x0] {
                    auto tr =
                        exact_run(*r, EstimatorKind::quadrature, t, ScheduleKind::square_summable, 1.0, 1000, x0);
                    return check_nonconvex_bound(*r, tr, t);
                }),
                [r, t, x0] {
                    auto tr = exact_run(*r, EstimatorKind::quadrature, t, ScheduleKind::constant, 0.5, 1000, x0);
                    return std::vector<CheckReport>{check_nonconvex_bound(*r, tr, t),
                                                    check_nonconvex_bound(*r, tr, t, true)};
                },
            };
        }

        std::vector<Task> mc_tasks()
        {
            return {single([] { return check_mc_bound({}); })};
        }

        std::vector<Task> minimizer_tasks()
        {
            return {
                single([] { return check_minimizer_convergence(make_figure1()); }),
                single([] {
                    Vector c(1);
                    c << 1.25;
                    return check_minimizer_convergence(make_quadratic(1, c));
                }),
                single([] { return check_no_smoothed_minimizer(); }),
                single([] { return check_candidate_region(make_quadratic(1), 0.5); }),
                single([] { return check_candidate_region(make_figure1(), 0.3); }),
                single([] { return check_smoothed_minimizer_exists(make_figure1(), 1.0); }),
            };
        }
    }

    const std::vector<std::string> &suite_names()
    {
        static const std::vector<std::string> names = {"lemmas", "convex", "nonconvex", "mc", "minimizers", "all"};
        return names;
    }

    std::vector<CheckReport> run_suite(const std::string &name)
    {
        std::vector<Task> tasks;
        auto add = [&](std::vector<Task> more) { tasks.insert(tasks.end(), more.begin(), more.end()); };
        if (name == "lemmas" || name == "all")
            add(lemma_tasks());
        if (name == "convex" || name == "all")
            add(convex_tasks());
        if (name == "nonconvex" || name == "all")
            add(nonconvex_tasks());
        if (name == "mc" || name == "all")
            add(mc_tasks());
        if (name == "minimizers" || name == "all")
            add(minimizer_tasks());
        if (tasks.empty())
            throw ConfigError("unknown verify suite '" + name + "'");

        std::vector<std::future<std::vector<CheckReport>>> futures;
        for (auto &task : tasks)
            futures.push_back(std::async(std::launch::async, task));
        std::vector<CheckReport> out;
        for (auto &fut : futures)
            for (auto &r : fut.get())
                out.push_back(std::move(r));
        return out;
    }

    bool all_passed(const std::vector<CheckReport> &reports)
    {
        return !reports.empty() &&
               std::all_of(reports.begin(), reports.end(), [](const CheckReport &r) { return r.pass; });
    }

    nlohmann::json report_json(const std::string &suite, const std::vector<CheckReport> &reports)
    {
        nlohmann::json checks = nlohmann::json::array();
        for (const auto &r : reports)
            checks.push_back(to_json(r));
        return {{"suite", suite}, {"pass", all_passed(reports)}, {"checks", checks}};
    }
}
