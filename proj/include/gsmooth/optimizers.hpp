#pragma once

#include "gsmooth/core.hpp"
#include "gsmooth/objectives.hpp"
#include "gsmooth/schedules.hpp"
#include "gsmooth/smoothing.hpp"

#include <unsupported/Eigen/FFT>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gsmooth
{
    enum class Algorithm
    {
        gsmoothgd,
        mc_gsmoothgd,
        homotopy,
        slgh_r,
        slgh_d,
        lsgd,
        dgs,
        gd,
        nag,
        adam,
        rmsprop
    };

    std::string to_string(Algorithm algorithm);
    Algorithm algorithm_from_string(const std::string &name);
    const std::vector<Algorithm> &all_algorithms();
    /// True for algorithms that carry a smoothing radius hyperparameter.
    bool uses_smoothing(Algorithm algorithm);

    struct BaselineParams
    {
        double momentum = 0.5;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double adam_eps = 1e-8;
        double rms_decay = 0.9;
        double rms_eps = 1e-8;
    };

    struct OptimizerConfig
    {
        Algorithm algorithm = Algorithm::gd;
        /// Step size t (the learning rate lambda of the benchmark tables).
        double learning_rate = 1e-3;
        ScheduleConfig sigma;
        /// Gradient source for the smoothing methods: closed_form or quadrature for gsmoothgd,
        /// any estimator for slgh and homotopy. mc_gsmoothgd always uses finite differences.
        EstimatorKind estimator = EstimatorKind::fd_central_mc;
        int n_samples = 1000;
        FdScheme scheme = FdScheme::central;
        int quad_points = 32;
        int gh_points = 5;
        /// Laplacian smoothing strength for lsgd.
        double lsgd_sigma = 1.0;
        BaselineParams baseline;
        /// Strictly decreasing radii for homotopy continuation.
        std::vector<double> homotopy_sigmas;
        double homotopy_inner_tol = 1e-6;
        int homotopy_inner_iters = 500;
    };

    struct StoppingCriteria
    {
        std::optional<std::int64_t> max_iters;
        std::optional<std::int64_t> max_f_evals;
        std::optional<double> grad_tol;
        std::optional<double> target_f;

        bool any() const { return max_iters || max_f_evals || grad_tol || target_f; }
    };

    enum class StopReason
    {
        none,
        /// Every homotopy stage finished.
        completed,
        max_iters,
        max_f_evals,
        grad_tol,
        target,
        divergence
    };

    std::string to_string(StopReason reason);

    struct TraceRecord
    {
        std::int64_t k = 0;
        /// Noiseless f(x_k).
        double f = 0;
        double x_norm = 0;
        /// Radius used by the step that produced x_k (0 for k = 0 and for non-smoothing methods).
        double sigma = 0;
        double grad_norm = 0;
        std::int64_t f_evals = 0;
        double wall_time = 0;
        /// Homotopy stage index, 0 otherwise.
        int stage = 0;
    };

    struct OptimizerTrace
    {
        std::vector<TraceRecord> records;
        /// Full iterates, filled only when RunOptions::keep_iterates is set.
        std::vector<Vector> iterates;
        Vector x_final;
        StopReason reason = StopReason::none;
        bool diverged = false;

        std::int64_t iterations() const { return records.empty() ? 0 : records.back().k; }
        double final_f() const { return records.back().f; }
    };

    struct RunOptions
    {
        std::uint64_t seed = 0;
        bool keep_iterates = false;
    };

    /// (I - sigma * circ(1, -2, 1)) z = g with periodic boundary. Solved through the discrete Fourier
    /// diagonalization, or a dense factorization below 8 unknowns. sigma = 0 is the identity.
    class LaplacianSmoother
    {
    public:
        LaplacianSmoother(Eigen::Index dim, double sigma);

        Vector solve(const Vector &g) const;
        /// The dense matrix A_sigma.
        Matrix matrix() const;

        double sigma() const { return sigma_; }

    private:
        Eigen::Index dim_;
        double sigma_;
        Vector eigenvalues_;
        Eigen::LDLT<Matrix> dense_;
        mutable Eigen::FFT<double> fft_;
    };

    /// Mutable per-run optimizer state.
    struct OptimizerState
    {
        OptimizerState(Vector x0, double learning_rate, std::optional<ScheduleConfig> schedule = std::nullopt);

        Vector x;
        std::int64_t k = 0;
        double t;
        std::optional<SigmaSchedule> schedule;
        /// Momentum / first-moment and second-moment buffers for the baselines.
        Vector m;
        Vector v;
        std::int64_t f_evals = 0;
    };

    /// What a single step used and produced.
    struct StepInfo
    {
        double sigma = 0;
        double grad_norm = 0;
        std::int64_t f_evals = 0;
    };

    /// Smoothed gradient at (x, sigma) from the requested source.
    GradientEstimate smoothed_gradient(NoisyObjective &f, const Vector &x, double sigma, EstimatorKind source,
                                       int n_samples, int quad_points, GaussianSampler &sampler);

    /// x_{k+1} = x_k - t grad f_{sigma_{k+1}}(x_k) with an exact gradient (closed form or quadrature).
    /// Does not advance the schedule.
    StepInfo gsmoothgd_step(OptimizerState &state, NoisyObjective &f, EstimatorKind source, int quad_points = 32);

    /// x_{k+1} = x_k - t g with g the N-sample finite-difference estimate. Does not advance the schedule.
    StepInfo mc_gsmoothgd_step(OptimizerState &state, NoisyObjective &f, int n, FdScheme scheme,
                               GaussianSampler &sampler);

    enum class SlghVariant
    {
        r,
        d
    };

    /// One single-loop homotopy step: x update followed by the sigma update of the chosen variant
    /// (geometric for r, derivative-driven and clamped for d).
    StepInfo slgh_step(OptimizerState &state, NoisyObjective &f, SlghVariant variant, int n,
                       GaussianSampler &sampler, EstimatorKind source = EstimatorKind::fd_central_mc,
                       int quad_points = 32);

    /// x_k = x_{k-1} - t A_sigma^{-1} grad.
    void lsgd_step(OptimizerState &state, const Vector &grad, const LaplacianSmoother &smoother);
    void lsgd_step(OptimizerState &state, const Vector &grad, double sigma_ls);

    /// Directional smoothed gradient: along each basis column xi_i, the 1-d Gauss-Hermite estimate
    /// (2/sigma) sum_m p_m z_m f(x + sigma z_m xi_i), assembled back in the standard basis.
    GradientEstimate dgs_grad(const ScalarFn &f, const Vector &x, double sigma, int gh_points = 5,
                              const std::optional<Matrix> &basis = std::nullopt);
    StepInfo dgs_step(OptimizerState &state, NoisyObjective &f, int gh_points = 5);

    enum class BaselineKind
    {
        gd,
        nag,
        adam,
        rmsprop
    };

    /// Where the gradient for the next baseline step must be evaluated (the look-ahead point for NAG).
    Vector baseline_query_point(const OptimizerState &state, BaselineKind kind, const BaselineParams &params = {});
    void baseline_step(OptimizerState &state, BaselineKind kind, const Vector &grad,
                       const BaselineParams &params = {});

    /// Runs until a stopping criterion fires. Divergence truncates the trace instead of throwing.
    OptimizerTrace run(const OptimizerConfig &config, NoisyObjective &f, const Vector &x0,
                       const StoppingCriteria &stopping, const RunOptions &options = {});
    OptimizerTrace run(const OptimizerConfig &config, const ObjectiveFunction &f, const Vector &x0,
                       const StoppingCriteria &stopping, const RunOptions &options = {});

    struct HomotopyInner
    {
        double learning_rate = 1e-2;
        EstimatorKind estimator = EstimatorKind::closed_form;
        int n_samples = 100;
        int quad_points = 32;
        double inner_tol = 1e-6;
        int inner_max_iters = 500;
    };

    /// Gradient descent on f_{sigma_k} for each radius in turn, warm-started at the previous stage's
    /// output. Records carry the stage index.
    OptimizerTrace homotopy_run(NoisyObjective &f, const std::vector<double> &sigmas, const Vector &x0,
                                const HomotopyInner &inner, const StoppingCriteria &stopping = {},
                                const RunOptions &options = {});
}
