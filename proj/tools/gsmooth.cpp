// Command-line front end: benchmark runs, hyperparameter grids, plot data, and the verification suites.

#include "gsmooth/harness.hpp"
#include "gsmooth/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace gsmooth;
namespace fs = std::filesystem;

namespace
{
    int bench_run(const std::string &config_path, int workers, const std::string &out_dir)
    {
        for (const auto &config : harness::load_configs(config_path))
        {
            const auto record = harness::run_experiment(config, workers);
            fs::path stem = config.output.empty() ? fs::path(out_dir) / config.default_stem() : fs::path(config.output);
            const auto json_path = harness::emit_results(record, harness::Format::json, stem);
            const auto csv_path = harness::emit_results(record, harness::Format::csv, stem);
            std::int64_t diverged = 0;
            for (const auto &r : record.runs)
                diverged += r.diverged;
            std::cout << config.default_stem() << ": median final f = " << record.median_final_f() << " over "
                      << record.runs.size() << " seeds (" << diverged << " diverged), " << record.wall_time
                      << " s\n  " << json_path.string() << "\n  " << csv_path.string() << "\n";
        }
        return 0;
    }

    int bench_grid(const std::string &function, const std::string &algorithm, Eigen::Index dim, int seeds,
                   std::int64_t budget, int workers, const std::vector<double> &lambdas,
                   const std::vector<double> &sigmas, const std::string &out)
    {
        nlohmann::json j{{"function", function}, {"algorithm", algorithm}, {"dim", dim}, {"seeds", seeds},
                         {"budget", budget}};
        const auto base = harness::config_from_json(j);
        const auto result = harness::grid_search(base, lambdas, sigmas, workers);
        for (const auto &c : result.cells)
        {
            std::cout << "lambda=" << c.learning_rate;
            if (c.sigma)
                std::cout << " sigma=" << *c.sigma;
            std::cout << " median_final_f=" << c.median_final_f << "\n";
        }
        std::cout << "best: lambda=" << result.best.learning_rate;
        if (result.best.sigma)
            std::cout << " sigma=" << *result.best.sigma;
        std::cout << " (" << result.cells.size() << " cells)\n";
        if (!out.empty())
        {
            if (fs::path(out).has_parent_path())
                fs::create_directories(fs::path(out).parent_path());
            std::ofstream(out) << harness::grid_to_json(result).dump(1) << "\n";
        }
        return 0;
    }

    int bench_plot(const std::string &in, const std::string &out)
    {
        for (const auto &p : harness::emit_plot_data(harness::load_records(in), out))
            std::cout << p.string() << "\n";
        return 0;
    }

    int run_verify(const std::string &suite, const std::string &report)
    {
        const auto reports = verify::run_suite(suite);
        for (const auto &r : reports)
            std::cout << (r.pass ? "PASS " : r.inconclusive ? "INCONCLUSIVE " : "FAIL ") << r.name << " ["
                      << r.instance << "] measured=" << r.measured << " bound=" << r.bound
                      << " violations=" << r.violations << "/" << r.points << "\n";
        if (!report.empty())
        {
            if (fs::path(report).has_parent_path())
                fs::create_directories(fs::path(report).parent_path());
            std::ofstream(report) << verify::report_json(suite, reports).dump(1) << "\n";
        }
        return verify::all_passed(reports) ? 0 : 1;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Gaussian-smoothing optimizers: benchmarks and numerical verification"};
    app.require_subcommand(1);

    auto *bench = app.add_subcommand("bench", "benchmark experiments");
    bench->require_subcommand(1);

    std::string config_path, out_dir = "results";
    int workers = 1;
    auto *run = bench->add_subcommand("run", "run the experiments of a config file");
    run->add_option("--config", config_path, "JSON config (object or array of objects)")->required()->check(CLI::ExistingFile);
    run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    run->add_option("--out-dir", out_dir, "directory for records whose config names no output");

    std::string function, algorithm, grid_out;
    Eigen::Index dim = 100;
    int seeds = 10;
    std::int64_t budget = harness::default_eval_budget;
    std::vector<double> lambdas = harness::default_lambda_grid(), sigmas = harness::default_sigma_grid();
    auto *grid = bench->add_subcommand("grid", "hyperparameter search with exact evaluations");
    grid->add_option("--function", function)->required();
    grid->add_option("--algorithm", algorithm)->required();
    grid->add_option("--dim", dim, "dimension")->capture_default_str();
    grid->add_option("--seeds", seeds, "number of seeds")->capture_default_str();
    grid->add_option("--budget", budget, "evaluation budget per run")->capture_default_str();
    grid->add_option("--lambdas", lambdas, "learning-rate grid");
    grid->add_option("--sigmas", sigmas, "smoothing-radius grid");
    grid->add_option("--workers", workers)->check(CLI::PositiveNumber);
    grid->add_option("--out", grid_out, "write the score table as JSON");

    std::string plot_in, plot_out;
    auto *plot = bench->add_subcommand("plot", "per-function plot data from stored records");
    plot->add_option("--in", plot_in)->required()->check(CLI::ExistingDirectory);
    plot->add_option("--out", plot_out)->required();

    std::string suite = "all", report;
    auto *ver = app.add_subcommand("verify", "numerical verification suites");
    ver->add_option("--suite", suite)->check(CLI::IsMember(verify::suite_names()))->capture_default_str();
    ver->add_option("--report", report, "write a JSON report");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
            return bench_run(config_path, workers, out_dir);
        if (*grid)
            return bench_grid(function, algorithm, dim, seeds, budget, workers, lambdas, sigmas, grid_out);
        if (*plot)
            return bench_plot(plot_in, plot_out);
        return run_verify(suite, report);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
