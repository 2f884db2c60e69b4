#include "gsmooth/optimizers.hpp"

#include "gsmooth/quadrature.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>

namespace gsmooth
{
    namespace
    {
        ScalarFn as_fn(NoisyObjective &f)
        {
            return [&f](const Vector &x) { return f(x); };
        }

        SigmaSchedule &require_schedule(OptimizerState &state)
        {
            if (!state.schedule)
                throw ConfigError("smoothing step requires a sigma schedule");
            return *state.schedule;
        }

        Vector analytic_gradient(NoisyObjective &f, const Vector &x)
        {
            if (!f.base().has_grad())
                throw ConfigError("gradient-based method needs an analytic gradient for '" + f.base().name + "'");
            Vector g = f.gradient(x);
            if (!g.allFinite())
                throw NonFiniteError();
            return g;
        }

        bool exact_source_available(const NoisyObjective &f, EstimatorKind source)
        {
            if (source == EstimatorKind::closed_form)
                return f.base().has_closed_form();
            if (source == EstimatorKind::quadrature)
                return f.base().dim <= max_quadrature_dim;
            return false;
        }

        /// Feeds the schedule what its kind needs and advances it. x_prev and sigma_used describe the
        /// step just taken; state.x is the new iterate.
        std::int64_t advance_schedule(OptimizerState &state, NoisyObjective &f, const Vector &x_prev,
                                      double sigma_used, EstimatorKind source, int n, int quad_points,
                                      GaussianSampler &sampler)
        {
            auto &schedule = require_schedule(state);
            const bool exact = exact_source_available(f, source);
            const bool quad_ok = f.base().dim <= max_quadrature_dim;
            const auto fn = as_fn(f);
            std::int64_t evals = 0;
            ScheduleContext context;
            if (schedule.needs_dsigma())
            {
                if (exact && quad_ok)
                {
                    auto q = quad_smoothing(fn, x_prev, sigma_used, quad_points);
                    context.dsigma = q.dsigma;
                    evals += q.f_evals_used;
                }
                else
                {
                    auto e = dsigma(fn, x_prev, sigma_used, n, sampler);
                    context.dsigma = e.value;
                    evals += e.f_evals_used;
                }
            }
            if (schedule.needs_stall_check())
            {
                const bool stalled = schedule.stall_detector().observe(state.x);
                context.stalled = stalled;
                if (stalled)
                {
                    const double s = schedule.current();
                    if (source == EstimatorKind::closed_form && f.base().has_closed_form())
                        context.f_sigma = ValueEstimate{f.base().smoothed_eval(state.x, s), 0, 0, 1};
                    else if (source == EstimatorKind::quadrature && quad_ok)
                    {
                        auto q = quad_smoothing(fn, state.x, s, quad_points);
                        context.f_sigma = ValueEstimate{q.value, 0, 0, q.f_evals_used};
                    }
                    else
                        context.f_sigma = mc_value(fn, state.x, s, n, sampler);
                    evals += context.f_sigma->f_evals_used;
                    context.f_x = f(state.x);
                    evals += 1;
                    if (!std::isfinite(*context.f_x))
                        throw NonFiniteError();
                }
            }
            schedule.next_sigma(context);
            state.f_evals += evals;
            return evals;
        }

        void validate_sigmas(const std::vector<double> &sigmas)
        {
            if (sigmas.empty())
                throw ConfigError("homotopy needs a non-empty sigma list");
            for (std::size_t i = 0; i < sigmas.size(); ++i)
            {
                if (!(sigmas[i] > 0))
                    throw ConfigError("homotopy sigmas must be positive");
                if (i > 0 && !(sigmas[i] < sigmas[i - 1]))
                    throw ConfigError("homotopy sigmas must be strictly decreasing");
            }
        }

        /// Collects records and decides when to stop.
        class Tracer
        {
        public:
            Tracer(const ObjectiveFunction &base, const StoppingCriteria &stopping, bool keep_iterates)
                : base_(base), stopping_(stopping), keep_(keep_iterates), start_(std::chrono::steady_clock::now())
            {
            }

            /// Returns false (and marks divergence) when x or f(x) is not finite.
            bool record(const Vector &x, std::int64_t k, double sigma, double grad_norm, std::int64_t evals,
                        int stage = 0)
            {
                if (!x.allFinite())
                    return diverge();
                TraceRecord r;
                r.k = k;
                r.f = base_.eval(x);
                if (!std::isfinite(r.f))
                    return diverge();
                r.x_norm = x.norm();
                r.sigma = sigma;
                r.grad_norm = grad_norm;
                r.f_evals = evals;
                r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
                r.stage = stage;
                trace_.records.push_back(r);
                if (keep_)
                    trace_.iterates.push_back(x);
                last_x_ = x;
                return true;
            }

            bool diverge()
            {
                trace_.diverged = true;
                trace_.reason = StopReason::divergence;
                return false;
            }

            /// Checks the criteria against the latest record.
            bool should_stop()
            {
                const auto &r = trace_.records.back();
                if (stopping_.target_f && r.f <= *stopping_.target_f)
                    trace_.reason = StopReason::target;
                else if (stopping_.grad_tol && r.k > 0 && r.grad_norm <= *stopping_.grad_tol)
                    trace_.reason = StopReason::grad_tol;
                else if (stopping_.max_f_evals && r.f_evals >= *stopping_.max_f_evals)
                    trace_.reason = StopReason::max_f_evals;
                else if (stopping_.max_iters && r.k >= *stopping_.max_iters)
                    trace_.reason = StopReason::max_iters;
                return trace_.reason != StopReason::none;
            }

            OptimizerTrace finish(StopReason fallback = StopReason::none)
            {
                if (trace_.reason == StopReason::none)
                    trace_.reason = fallback;
                trace_.x_final = last_x_;
                return std::move(trace_);
            }

        private:
            const ObjectiveFunction &base_;
            StoppingCriteria stopping_;
            bool keep_;
            std::chrono::steady_clock::time_point start_;
            OptimizerTrace trace_;
            Vector last_x_;
        };

        void check_start(const ObjectiveFunction &base, const Vector &x0, double learning_rate)
        {
            if (x0.size() != base.dim)
                throw ConfigError("x0 has dimension " + std::to_string(x0.size()) + ", objective expects " +
                                  std::to_string(base.dim));
            if (!x0.allFinite())
                throw ConfigError("x0 must be finite");
            if (!(learning_rate > 0))
                throw ConfigError("learning_rate must be positive");
        }
    }

    std::string to_string(Algorithm algorithm)
    {
        switch (algorithm)
        {
        case Algorithm::gsmoothgd:
            return "gsmoothgd";
        case Algorithm::mc_gsmoothgd:
            return "mc_gsmoothgd";
        case Algorithm::homotopy:
            return "homotopy";
        case Algorithm::slgh_r:
            return "slgh_r";
        case Algorithm::slgh_d:
            return "slgh_d";
        case Algorithm::lsgd:
            return "lsgd";
        case Algorithm::dgs:
            return "dgs";
        case Algorithm::gd:
            return "gd";
        case Algorithm::nag:
            return "nag";
        case Algorithm::adam:
            return "adam";
        case Algorithm::rmsprop:
            return "rmsprop";
        }
        return "unknown";
    }

    const std::vector<Algorithm> &all_algorithms()
    {
        static const std::vector<Algorithm> all = {
            Algorithm::gsmoothgd, Algorithm::mc_gsmoothgd, Algorithm::homotopy, Algorithm::slgh_r,
            Algorithm::slgh_d,    Algorithm::lsgd,         Algorithm::dgs,      Algorithm::gd,
            Algorithm::nag,       Algorithm::adam,         Algorithm::rmsprop};
        return all;
    }

    Algorithm algorithm_from_string(const std::string &name)
    {
        for (auto a : all_algorithms())
            if (to_string(a) == name)
                return a;
        throw ConfigError("unknown algorithm '" + name + "'");
    }

    bool uses_smoothing(Algorithm algorithm)
    {
        switch (algorithm)
        {
        case Algorithm::gsmoothgd:
        case Algorithm::mc_gsmoothgd:
        case Algorithm::homotopy:
        case Algorithm::slgh_r:
        case Algorithm::slgh_d:
        case Algorithm::lsgd:
        case Algorithm::dgs:
            return true;
        default:
            return false;
        }
    }

    std::string to_string(StopReason reason)
    {
        switch (reason)
        {
        case StopReason::none:
            return "none";
        case StopReason::completed:
            return "completed";
        case StopReason::max_iters:
            return "max_iters";
        case StopReason::max_f_evals:
            return "max_f_evals";
        case StopReason::grad_tol:
            return "grad_tol";
        case StopReason::target:
            return "target";
        case StopReason::divergence:
            return "divergence";
        }
        return "unknown";
    }

    // ---------------------------------------------------------------- Laplacian smoothing

    LaplacianSmoother::LaplacianSmoother(Eigen::Index dim, double sigma) : dim_(dim), sigma_(sigma)
    {
        if (dim < 1)
            throw ConfigError("dimension must be >= 1");
        if (!(sigma >= 0))
            throw ConfigError("lsgd sigma must be non-negative");
        if (sigma == 0)
            return;
        if (dim < 8)
        {
            dense_.compute(matrix());
            return;
        }
        eigenvalues_.resize(dim);
        const double d = static_cast<double>(dim);
        for (Eigen::Index k = 0; k < dim; ++k)
            eigenvalues_[k] = 1 + 2 * sigma * (1 - std::cos(2 * std::numbers::pi * static_cast<double>(k) / d));
    }

    Matrix LaplacianSmoother::matrix() const
    {
        Matrix a = Matrix::Identity(dim_, dim_);
        for (Eigen::Index i = 0; i < dim_; ++i)
        {
            a(i, i) += 2 * sigma_;
            a(i, (i + 1) % dim_) -= sigma_;
            a(i, (i + dim_ - 1) % dim_) -= sigma_;
        }
        return a;
    }

    Vector LaplacianSmoother::solve(const Vector &g) const
    {
        if (g.size() != dim_)
            throw ConfigError("gradient dimension does not match smoother");
        if (sigma_ == 0)
            return g;
        if (dim_ < 8)
            return dense_.solve(g);
        std::vector<double> in(g.data(), g.data() + g.size());
        std::vector<std::complex<double>> spectrum;
        fft_.fwd(spectrum, in);
        for (Eigen::Index k = 0; k < dim_; ++k)
            spectrum[k] /= eigenvalues_[k];
        std::vector<double> out;
        fft_.inv(out, spectrum);
        return Eigen::Map<const Vector>(out.data(), dim_);
    }

    // ---------------------------------------------------------------- steps

    OptimizerState::OptimizerState(Vector x0, double learning_rate, std::optional<ScheduleConfig> schedule)
        : x(std::move(x0)), t(learning_rate)
    {
        if (schedule)
            this->schedule.emplace(*schedule);
        m = Vector::Zero(x.size());
        v = Vector::Zero(x.size());
    }

    GradientEstimate smoothed_gradient(NoisyObjective &f, const Vector &x, double sigma, EstimatorKind source,
                                       int n_samples, int quad_points, GaussianSampler &sampler)
    {
        const auto fn = as_fn(f);
        switch (source)
        {
        case EstimatorKind::closed_form:
        {
            if (!f.base().has_closed_form())
                throw DomainError("no closed form smoothing for '" + f.base().name + "'");
            Vector g = f.base().smoothed_grad(x, sigma);
            if (!g.allFinite())
                throw NonFiniteError();
            return {g, sigma, source, 0, 1, {}};
        }
        case EstimatorKind::quadrature:
        {
            auto q = quad_smoothing(fn, x, sigma, quad_points);
            return {q.grad, sigma, source, 0, q.f_evals_used, {}};
        }
        case EstimatorKind::direct_mc:
            return mc_grad_direct(fn, x, sigma, n_samples, sampler);
        case EstimatorKind::fd_forward_mc:
            return mc_grad_fd(fn, x, sigma, n_samples, FdScheme::forward, sampler);
        case EstimatorKind::fd_central_mc:
            return mc_grad_fd(fn, x, sigma, n_samples, FdScheme::central, sampler);
        case EstimatorKind::dgs:
            return dgs_grad(fn, x, sigma);
        }
        throw ConfigError("unknown estimator");
    }

    StepInfo gsmoothgd_step(OptimizerState &state, NoisyObjective &f, EstimatorKind source, int quad_points)
    {
        if (!exact_source_available(f, source))
            throw ConfigError("GSmoothGD requires closed-form or quadrature \xE2\x88\x87"
                              "f_\xCF\x83; use MC-GSmoothGD");
        const double sigma = require_schedule(state).current();
        GaussianSampler unused(state.x.size(), 0);
        auto g = smoothed_gradient(f, state.x, sigma, source, 1, quad_points, unused);
        state.x -= state.t * g.vector;
        ++state.k;
        state.f_evals += g.f_evals_used;
        return {sigma, g.vector.norm(), g.f_evals_used};
    }

    StepInfo mc_gsmoothgd_step(OptimizerState &state, NoisyObjective &f, int n, FdScheme scheme,
                               GaussianSampler &sampler)
    {
        const double sigma = require_schedule(state).current();
        auto g = mc_grad_fd(as_fn(f), state.x, sigma, n, scheme, sampler);
        state.x -= state.t * g.vector;
        ++state.k;
        state.f_evals += g.f_evals_used;
        return {sigma, g.vector.norm(), g.f_evals_used};
    }

    StepInfo slgh_step(OptimizerState &state, NoisyObjective &f, SlghVariant variant, int n,
                       GaussianSampler &sampler, EstimatorKind source, int quad_points)
    {
        auto &schedule = require_schedule(state);
        const auto wanted = variant == SlghVariant::r ? ScheduleKind::geometric : ScheduleKind::slgh_d;
        if (schedule.config().kind != wanted)
            throw ConfigError("slgh variant requires a '" + to_string(wanted) + "' sigma schedule");
        const double sigma = schedule.current();
        const Vector x_prev = state.x;
        auto g = smoothed_gradient(f, state.x, sigma, source, n, quad_points, sampler);
        state.x -= state.t * g.vector;
        ++state.k;
        state.f_evals += g.f_evals_used;
        const auto extra = advance_schedule(state, f, x_prev, sigma, source, n, quad_points, sampler);
        return {sigma, g.vector.norm(), g.f_evals_used + extra};
    }

    void lsgd_step(OptimizerState &state, const Vector &grad, const LaplacianSmoother &smoother)
    {
        state.x -= state.t * smoother.solve(grad);
        ++state.k;
    }

    void lsgd_step(OptimizerState &state, const Vector &grad, double sigma_ls)
    {
        lsgd_step(state, grad, LaplacianSmoother(state.x.size(), sigma_ls));
    }

    GradientEstimate dgs_grad(const ScalarFn &f, const Vector &x, double sigma, int gh_points,
                              const std::optional<Matrix> &basis)
    {
        const auto d = x.size();
        if (gh_points < 2)
            throw ConfigError("dgs needs at least 2 Gauss-Hermite points");
        if (!(sigma > 0))
            throw DomainError("dgs undefined at sigma=0");
        if (basis)
        {
            if (basis->rows() != d || basis->cols() != d)
                throw ConfigError("dgs basis must be d x d");
            const double dev = ((basis->transpose() * *basis) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
            if (dev > 1e-8)
                throw ConfigError("dgs basis is not orthonormal");
        }
        const auto &rule = gauss_hermite(gh_points);
        const auto &z = rule.nodes();
        const auto &p = rule.probability_weights();

        Vector comp = Vector::Zero(d);
        Vector y(d);
        for (Eigen::Index i = 0; i < d; ++i)
        {
            double acc = 0;
            for (int m = 0; m < rule.size(); ++m)
            {
                y = x;
                if (basis)
                    y += (sigma * z[m]) * basis->col(i);
                else
                    y[i] += sigma * z[m];
                const double fy = f(y);
                if (!std::isfinite(fy))
                    throw NonFiniteError();
                acc += p[m] * z[m] * fy;
            }
            comp[i] = (2.0 / sigma) * acc;
        }
        GradientEstimate out;
        out.vector = basis ? Vector(*basis * comp) : comp;
        out.sigma = sigma;
        out.estimator = EstimatorKind::dgs;
        out.n_samples = gh_points;
        out.f_evals_used = static_cast<std::int64_t>(gh_points) * d;
        return out;
    }

    StepInfo dgs_step(OptimizerState &state, NoisyObjective &f, int gh_points)
    {
        const double sigma = require_schedule(state).current();
        auto g = dgs_grad(as_fn(f), state.x, sigma, gh_points);
        state.x -= state.t * g.vector;
        ++state.k;
        state.f_evals += g.f_evals_used;
        return {sigma, g.vector.norm(), g.f_evals_used};
    }

    Vector baseline_query_point(const OptimizerState &state, BaselineKind kind, const BaselineParams &params)
    {
        if (kind == BaselineKind::nag)
            return state.x + params.momentum * state.m;
        return state.x;
    }

    void baseline_step(OptimizerState &state, BaselineKind kind, const Vector &grad, const BaselineParams &params)
    {
        switch (kind)
        {
        case BaselineKind::gd:
            state.x -= state.t * grad;
            break;
        case BaselineKind::nag:
            // m holds the velocity; grad was taken at x + momentum * m
            state.m = params.momentum * state.m - state.t * grad;
            state.x += state.m;
            break;
        case BaselineKind::adam:
        {
            state.m = params.beta1 * state.m + (1 - params.beta1) * grad;
            state.v = params.beta2 * state.v + (1 - params.beta2) * grad.cwiseAbs2();
            const double step = static_cast<double>(state.k + 1);
            const double c1 = 1 - std::pow(params.beta1, step);
            const double c2 = 1 - std::pow(params.beta2, step);
            state.x.array() -=
                state.t * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + params.adam_eps);
            break;
        }
        case BaselineKind::rmsprop:
            state.v = params.rms_decay * state.v + (1 - params.rms_decay) * grad.cwiseAbs2();
            state.x.array() -= state.t * grad.array() / (state.v.array().sqrt() + params.rms_eps);
            break;
        }
        ++state.k;
    }

    // ---------------------------------------------------------------- drivers

    OptimizerTrace homotopy_run(NoisyObjective &f, const std::vector<double> &sigmas, const Vector &x0,
                                const HomotopyInner &inner, const StoppingCriteria &stopping,
                                const RunOptions &options)
    {
        validate_sigmas(sigmas);
        check_start(f.base(), x0, inner.learning_rate);
        if (inner.inner_max_iters < 1)
            throw ConfigError("homotopy inner iteration cap must be >= 1");

        Tracer tracer(f.base(), stopping, options.keep_iterates);
        GaussianSampler sampler(x0.size(), derive_seed(options.seed, "estimator"));
        if (!tracer.record(x0, 0, 0, 0, 0))
            return tracer.finish();
        if (tracer.should_stop())
            return tracer.finish();

        Vector x = x0;
        std::int64_t k = 0, evals = 0;
        try
        {
            for (std::size_t s = 0; s < sigmas.size(); ++s)
            {
                for (int it = 0; it < inner.inner_max_iters; ++it)
                {
                    auto g = smoothed_gradient(f, x, sigmas[s], inner.estimator, inner.n_samples, inner.quad_points,
                                               sampler);
                    evals += g.f_evals_used;
                    const double gnorm = g.vector.norm();
                    if (gnorm <= inner.inner_tol)
                        break;
                    x -= inner.learning_rate * g.vector;
                    ++k;
                    if (!tracer.record(x, k, sigmas[s], gnorm, evals, static_cast<int>(s)))
                        return tracer.finish();
                    if (tracer.should_stop())
                        return tracer.finish();
                }
            }
        }
        catch (const NonFiniteError &)
        {
            tracer.diverge();
        }
        return tracer.finish(StopReason::completed);
    }

    OptimizerTrace run(const OptimizerConfig &config, NoisyObjective &f, const Vector &x0,
                       const StoppingCriteria &stopping, const RunOptions &options)
    {
        if (config.algorithm == Algorithm::homotopy)
        {
            HomotopyInner inner;
            inner.learning_rate = config.learning_rate;
            inner.estimator = config.estimator;
            inner.n_samples = config.n_samples;
            inner.quad_points = config.quad_points;
            inner.inner_tol = config.homotopy_inner_tol;
            inner.inner_max_iters = config.homotopy_inner_iters;
            return homotopy_run(f, config.homotopy_sigmas, x0, inner, stopping, options);
        }
        if (!stopping.any())
            throw ConfigError("at least one stopping criterion is required");
        check_start(f.base(), x0, config.learning_rate);

        const auto alg = config.algorithm;
        std::optional<ScheduleConfig> schedule;
        if (uses_smoothing(alg) && alg != Algorithm::lsgd)
        {
            schedule = config.sigma;
            if (alg == Algorithm::slgh_r)
                schedule->kind = ScheduleKind::geometric;
            else if (alg == Algorithm::slgh_d)
                schedule->kind = ScheduleKind::slgh_d;
        }
        if (alg == Algorithm::gsmoothgd && !exact_source_available(f, config.estimator))
            throw ConfigError("GSmoothGD requires closed-form or quadrature \xE2\x88\x87"
                              "f_\xCF\x83; use MC-GSmoothGD");

        OptimizerState state(x0, config.learning_rate, schedule);
        GaussianSampler sampler(x0.size(), derive_seed(options.seed, "estimator"));
        std::optional<LaplacianSmoother> smoother;
        if (alg == Algorithm::lsgd)
            smoother.emplace(x0.size(), config.lsgd_sigma);

        Tracer tracer(f.base(), stopping, options.keep_iterates);
        if (!tracer.record(x0, 0, 0, 0, 0) || tracer.should_stop())
            return tracer.finish();

        for (;;)
        {
            StepInfo info;
            try
            {
                const Vector x_prev = state.x;
                switch (alg)
                {
                case Algorithm::gsmoothgd:
                    info = gsmoothgd_step(state, f, config.estimator, config.quad_points);
                    info.f_evals += advance_schedule(state, f, x_prev, info.sigma, config.estimator,
                                                     config.n_samples, config.quad_points, sampler);
                    break;
                case Algorithm::mc_gsmoothgd:
                {
                    info = mc_gsmoothgd_step(state, f, config.n_samples, config.scheme, sampler);
                    const auto src = config.scheme == FdScheme::forward ? EstimatorKind::fd_forward_mc
                                                                         : EstimatorKind::fd_central_mc;
                    info.f_evals += advance_schedule(state, f, x_prev, info.sigma, src, config.n_samples,
                                                     config.quad_points, sampler);
                    break;
                }
                case Algorithm::slgh_r:
                case Algorithm::slgh_d:
                    info = slgh_step(state, f, alg == Algorithm::slgh_r ? SlghVariant::r : SlghVariant::d,
                                     config.n_samples, sampler, config.estimator, config.quad_points);
                    break;
                case Algorithm::dgs:
                    info = dgs_step(state, f, config.gh_points);
                    info.f_evals += advance_schedule(state, f, x_prev, info.sigma, EstimatorKind::dgs,
                                                     config.n_samples, config.quad_points, sampler);
                    break;
                case Algorithm::lsgd:
                {
                    const Vector g = analytic_gradient(f, state.x);
                    lsgd_step(state, g, *smoother);
                    state.f_evals += 1;
                    info = {config.lsgd_sigma, g.norm(), 1};
                    break;
                }
                case Algorithm::gd:
                case Algorithm::nag:
                case Algorithm::adam:
                case Algorithm::rmsprop:
                {
                    const auto kind = alg == Algorithm::gd    ? BaselineKind::gd
                                      : alg == Algorithm::nag ? BaselineKind::nag
                                      : alg == Algorithm::adam ? BaselineKind::adam
                                                               : BaselineKind::rmsprop;
                    const Vector g = analytic_gradient(f, baseline_query_point(state, kind, config.baseline));
                    baseline_step(state, kind, g, config.baseline);
                    state.f_evals += 1;
                    info = {0, g.norm(), 1};
                    break;
                }
                case Algorithm::homotopy:
                    break;
                }
            }
            catch (const NonFiniteError &)
            {
                tracer.diverge();
                break;
            }
            if (!tracer.record(state.x, state.k, info.sigma, info.grad_norm, state.f_evals))
                break;
            if (tracer.should_stop())
                break;
        }
        return tracer.finish();
    }

    OptimizerTrace run(const OptimizerConfig &config, const ObjectiveFunction &f, const Vector &x0,
                       const StoppingCriteria &stopping, const RunOptions &options)
    {
        NoisyObjective exact(f, 0.0, 0);
        return run(config, exact, x0, stopping, options);
    }
}
