#pragma once

#include "gsmooth/core.hpp"
#include "gsmooth/objectives.hpp"
#include "gsmooth/optimizers.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gsmooth::harness
{
    /// Budget applied when a config names no stopping criterion.
    inline constexpr std::int64_t default_eval_budget = 1000000;
    /// Points on the shared evaluation and iteration grids.
    inline constexpr int curve_points = 256;

    struct ExperimentConfig
    {
        std::string function;
        Eigen::Index dim = 0;
        OptimizerConfig optimizer;
        double rho = 0;
        std::vector<std::int64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        std::uint64_t root_seed = 0;
        StoppingCriteria stopping;
        /// Output stem; empty means "<function>_<algorithm>_d<dim>_rho<rho>".
        std::string output;

        void validate() const;
        std::string default_stem() const;
    };

    /// Learning rate and smoothing radius tuned for the 100-dimensional benchmark.
    struct Preset
    {
        double learning_rate;
        std::optional<double> sigma;
    };

    /// Preset for "<algorithm>/<function>" ("slgh" covers both slgh variants); nullopt when untabulated.
    std::optional<Preset> table_preset(Algorithm algorithm, const std::string &function);

    /// Parses a JSON config object. Unknown keys are rejected, defaults filled, the result validated.
    /// A "preset" key supplies algorithm, function, learning rate and sigma0, each overridable.
    ExperimentConfig config_from_json(const nlohmann::json &j);
    nlohmann::json config_to_json(const ExperimentConfig &config);
    /// A file holding one config object or an array of them.
    std::vector<ExperimentConfig> load_configs(const std::filesystem::path &path);
    ExperimentConfig load_config(const std::filesystem::path &path);

    /// GSMOOTH_SEED, when set, replaces the root seed.
    std::uint64_t effective_root_seed(std::uint64_t configured);

    /// Initial point of a seed; depends only on (function, dim, root seed, seed).
    Vector initial_point(const ObjectiveFunction &f, std::uint64_t root_seed, std::int64_t seed);

    struct SeedSummary
    {
        std::int64_t seed = 0;
        double final_f = 0;
        std::int64_t iterations = 0;
        std::int64_t f_evals = 0;
        std::string reason;
        bool diverged = false;
        /// f on the evaluation grid and the iteration grid (last value held past the end of the run).
        std::vector<double> curve;
        std::vector<double> iter_curve;
    };

    struct PercentileCurves
    {
        std::vector<double> median;
        std::vector<double> p25;
        std::vector<double> p75;
    };

    struct ExperimentRecord
    {
        ExperimentConfig config;
        std::vector<double> eval_grid;
        std::vector<double> iter_grid;
        std::vector<SeedSummary> runs;
        PercentileCurves curves;
        PercentileCurves iter_curves;
        /// Not persisted: the record on disk is a function of the config alone.
        double wall_time = 0;

        double median_final_f() const;
    };

    /// curve_points log-spaced values on [1, upper].
    std::vector<double> log_grid(double upper, int points = curve_points);
    /// f of the last trace record with counter <= g, for each grid value g.
    std::vector<double> resample(const OptimizerTrace &trace, const std::vector<double> &grid, bool by_evals);
    /// Linear-interpolation percentile (q in [0, 100]).
    double percentile(std::vector<double> values, double q);
    PercentileCurves aggregate(const std::vector<std::vector<double>> &curves);

    /// Runs each index in [0, jobs) on up to `workers` threads; results come back in index order.
    /// The first exception thrown by a job is rethrown after all workers stop.
    template <typename R>
    std::vector<R> parallel_map(std::size_t jobs, int workers, const std::function<R(std::size_t)> &job);

    ExperimentRecord run_experiment(const ExperimentConfig &config, int workers = 1);

    struct GridCell
    {
        double learning_rate = 0;
        std::optional<double> sigma;
        double median_final_f = 0;
        std::vector<double> finals;
    };

    struct GridResult
    {
        std::string function;
        Eigen::Index dim = 0;
        Algorithm algorithm = Algorithm::gd;
        std::vector<GridCell> cells;
        GridCell best;
    };

    std::vector<double> default_lambda_grid();
    std::vector<double> default_sigma_grid();

    /// Noise-free search over (lambda, sigma), sigma only for smoothing algorithms. The score is the median
    /// final f over seeds, diverged seeds scoring +inf; ties go to smaller lambda, then smaller sigma.
    /// `base` supplies every other setting (its rho is ignored).
    GridResult grid_search(const ExperimentConfig &base, const std::vector<double> &lambda_grid,
                           const std::vector<double> &sigma_grid, int workers = 1);
    nlohmann::json grid_to_json(const GridResult &result);

    enum class Format
    {
        csv,
        json
    };

    nlohmann::json record_to_json(const ExperimentRecord &record);
    ExperimentRecord record_from_json(const nlohmann::json &j);
    /// Writes <stem>.csv or <stem>.json and returns the path.
    std::filesystem::path emit_results(const ExperimentRecord &record, Format format, const std::filesystem::path &stem);
    std::vector<ExperimentRecord> load_records(const std::filesystem::path &dir);

    /// One CSV per (function, noise level): eval_count, then median/p25/p75 per algorithm in algorithm order.
    std::vector<std::filesystem::path> emit_plot_data(const std::vector<ExperimentRecord> &records,
                                                      const std::filesystem::path &out_dir);

    template <typename R>
    std::vector<R> parallel_map(std::size_t jobs, int workers, const std::function<R(std::size_t)> &job)
    {
        std::vector<std::optional<R>> slots(jobs);
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]
        {
            for (std::size_t i; (i = next.fetch_add(1)) < jobs;)
            {
                try
                {
                    slots[i].emplace(job(i));
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next = jobs;
                }
            }
        };
        const auto n = static_cast<std::size_t>(std::max(1, workers));
        if (n == 1 || jobs <= 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < std::min(n, jobs); ++w)
                pool.emplace_back(worker);
            for (auto &t : pool)
                t.join();
        }
        if (error)
            std::rethrow_exception(error);
        std::vector<R> out;
        out.reserve(jobs);
        for (auto &s : slots)
            out.push_back(std::move(*s));
        return out;
    }
}
