#pragma once

#include "gsmooth/core.hpp"
#include "gsmooth/objectives.hpp"
#include "gsmooth/optimizers.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace gsmooth::verify
{
    enum class CheckKind
    {
        inequality,
        identity
    };

    /// Outcome of one numerical check.
    ///
    /// inequality: pass <=> measured <= bound + tolerance (and no per-point violations).
    /// identity:   pass <=> |measured - bound| <= tolerance, with `bound` the expected value.
    struct CheckReport
    {
        std::string name;
        std::string instance;
        CheckKind kind = CheckKind::inequality;
        double measured = 0;
        double bound = 0;
        double tolerance = 0;
        /// Points (iterations, probes, ...) at which the inequality failed.
        std::int64_t violations = 0;
        std::int64_t points = 0;
        bool pass = false;
        /// The oracle could not certify its own input (e.g. a grid minimizer on the box boundary).
        bool inconclusive = false;
        std::string detail;

        double margin() const { return bound - measured; }
        /// Sets pass from measured/bound/tolerance/violations.
        void settle();
    };

    nlohmann::json to_json(const CheckReport &report);

    // ------------------------------------------------------------------ brute-force oracles

    struct Minimum1d
    {
        double x = 0;
        double value = 0;
        /// The best grid point touched the interval end.
        bool on_boundary = false;
    };

    /// Uniform grid of `grid` points followed by `refine` golden-section iterations on the bracketing cell.
    Minimum1d minimize_1d(const std::function<double(double)> &g, double lo, double hi, int grid = 100000,
                          int refine = 100);

    /// All grid local minima whose refined value lies within value_tol of the global one.
    std::vector<Minimum1d> global_minimizers_1d(const std::function<double(double)> &g, double lo, double hi,
                                                double value_tol = 1e-9, int grid = 100000, int refine = 100);

    /// Grid-and-refine minimizer for d <= 2 (alternating golden-section sweeps in d = 2).
    struct MinimumNd
    {
        Vector x;
        double value = 0;
        bool on_boundary = false;
    };
    MinimumNd minimize_box(const std::function<double(const Vector &)> &g, const Box &box, int grid_points = 100000,
                           int refine = 100);

    /// Smoothed value by tensor quadrature (64 points per dimension), f itself at sigma = 0.
    double smoothed_value(const ObjectiveFunction &f, const Vector &x, double sigma, int points = 64);

    // ------------------------------------------------------------------ lemma checks

    /// |f_tau - f_sigma| <= (tau^2 - sigma^2) L d / 4 (smooth case) or M |tau - sigma| sqrt(d/2) (Lipschitz
    /// case), at `points` sample points of the domain. With expect_equality the smooth-case gap must also
    /// meet the bound to within equality_tol at every point.
    CheckReport check_value_gap(const ObjectiveFunction &f, double sigma, double tau, int points,
                                std::uint64_t seed = 0, bool expect_equality = false, double equality_tol = 1e-10);

    /// (f_sigma)_tau = f_eta with eta = sqrt(sigma^2 + tau^2), by nested quadrature; max relative error at
    /// the given points.
    CheckReport check_chain_of_smoothing(const ObjectiveFunction &f, double sigma, double tau,
                                         const std::vector<Vector> &points, double tol = 1e-6,
                                         int points_per_dim = 64);
    /// Random (x, sigma, tau) triples.
    CheckReport check_chain_of_smoothing(const ObjectiveFunction &f, int triples, std::uint64_t seed,
                                         double tol = 1e-6);

    /// 0 <= f_sigma(x*_sigma) - f(x*) <= sigma^2 L d / 4 with x*_sigma located by grid search.
    CheckReport check_min_gap(const ObjectiveFunction &f, double sigma, double tol = 1e-9);

    /// The located minimizer of f_sigma lies in {x : f(x) - f* <= sigma^2 L d / 4}.
    CheckReport check_candidate_region(const ObjectiveFunction &f, double sigma, double tol = 1e-9);

    // ------------------------------------------------------------------ convergence bounds

    /// Right side of the convex bound after k steps: |x0 - x*|^2/(2tk) + (Ld/4k)(sum sigma_i^2 +
    /// sum_{i>=2} i max(0, sigma_i^2 - sigma_{i-1}^2)). sigmas[i-1] is sigma_i.
    double convex_bound(double dist0_sq, double t, double L, double d, const std::vector<double> &sigmas,
                        std::int64_t k);
    /// Constant-radius form: |x0 - x*|^2/(2tk) + L d sigma^2 / 4.
    double convex_bound_constant(double dist0_sq, double t, double L, double d, double sigma, std::int64_t k);

    /// Checks f(x_k) - f* against the convex bound for every k of a trace produced by gsmoothgd.
    /// With constant_form the constant-radius form is used instead (all recorded sigmas must be equal).
    CheckReport check_convex_bound(const ObjectiveFunction &f, const OptimizerTrace &trace, const Vector &x0,
                                   double t, bool constant_form = false, double tol = 1e-12);

    /// Checks min_{i<=k} |grad f(x_i)|^2 against the three-term non-convex bound for every k, with the
    /// smoothed values f_{sigma_1}(x_1) and f_{sigma_{k+1}}(x_{k+1}) evaluated by quadrature. The trace
    /// must carry iterates. With constant_form, checks the constant-radius form using f(x0) - f*.
    CheckReport check_nonconvex_bound(const ObjectiveFunction &f, const OptimizerTrace &trace, double t,
                                      bool constant_form = false, double tol = 1e-12);

    struct McEnsembleConfig
    {
        Eigen::Index dim = 5;
        int runs = 50;
        int steps = 2000;
        int n_samples = 100;
        /// Fraction of the step-size threshold 1/(2L(d+4)).
        double t_fraction = 0.5;
        double sigma0 = 0.1;
        std::uint64_t seed = 2024;
    };

    /// Ensemble of MC-GSmoothGD runs on the quadratic; min_i of the ensemble mean of |grad f(x_i)|^2
    /// against the stochastic bound, for every k, with a 3-standard-error allowance.
    CheckReport check_mc_bound(const McEnsembleConfig &config);

    struct VarianceConfig
    {
        std::vector<int> n_values = {1, 2, 10};
        int batches = 10000;
        /// Independent draws used to estimate E(delta^2 |u|^2).
        int moment_samples = 200000;
        FdScheme scheme = FdScheme::central;
        std::uint64_t seed = 99;
    };

    /// E|g(x;N)|^2 = (1/N) E(delta^2 |u|^2) + (1 - 1/N) |grad f_sigma|^2, one report per N, with
    /// |grad f_sigma|^2 from quadrature (d <= 3) or the closed form.
    std::vector<CheckReport> check_variance_identity(const ObjectiveFunction &f, const Vector &x, double sigma,
                                                     const VarianceConfig &config = {});

    // ------------------------------------------------------------------ minimizers

    /// Grid minimizers of f_{2^-n}, n = 1..levels, approach the minimizer set of f: distance must be
    /// non-increasing within mono_tol and below final_tol at the last level. d = 1 only.
    CheckReport check_minimizer_convergence(const ObjectiveFunction &f, int levels = 10, double final_tol = 1e-3,
                                            double mono_tol = 1e-6);

    /// Log-magnitude of the smoothed derivative of f(x) = -x 1{x<0}, computed by quadrature of its
    /// integral representation. The derivative itself is -exp(result).
    double no_minimizer_log_slope(double x, double sigma);

    /// The smoothed derivative of -x 1{x<0} is strictly negative (no smoothed minimizer) at probes in
    /// [-100, 100] for sigma in {0.1, 1, 10}.
    CheckReport check_no_smoothed_minimizer(int probes = 2001);

    /// Below the radius sqrt(4 eps / (3 L d)) a minimizer of f_sigma exists: located constructively in 1-d as
    /// an interior, stationary grid minimizer, for several sigmas under the threshold.
    CheckReport check_smoothed_minimizer_exists(const ObjectiveFunction &f, double eps);

    // ------------------------------------------------------------------ suites

    const std::vector<std::string> &suite_names();
    /// Runs one suite ("lemmas", "convex", "nonconvex", "mc", "minimizers" or "all"); checks run concurrently.
    std::vector<CheckReport> run_suite(const std::string &name);
    bool all_passed(const std::vector<CheckReport> &reports);
    nlohmann::json report_json(const std::string &suite, const std::vector<CheckReport> &reports);
}
