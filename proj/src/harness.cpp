#include "gsmooth/harness.hpp"

#include "gsmooth/random.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace gsmooth::harness
{
    using nlohmann::json;
    namespace fs = std::filesystem;

    namespace
    {
        std::string fmt(double v)
        {
            char buf[64];
            auto res = std::to_chars(buf, buf + sizeof buf, v);
            return std::string(buf, res.ptr);
        }

        std::string scheme_name(FdScheme s)
        {
            return s == FdScheme::forward ? "forward" : "central";
        }

        FdScheme scheme_from_string(const std::string &s)
        {
            if (s == "forward")
                return FdScheme::forward;
            if (s == "central")
                return FdScheme::central;
            throw ConfigError("unknown finite-difference scheme '" + s + "'");
        }

        void reject_unknown(const json &j, const std::set<std::string> &allowed, const std::string &where)
        {
            if (!j.is_object())
                throw ConfigError(where + " must be an object");
            for (const auto &[key, _] : j.items())
                if (!allowed.count(key))
                    throw ConfigError("unknown key '" + key + "' in " + where);
        }

        template <typename T>
        T read(const json &j, const std::string &key)
        {
            const json &v = j.at(key);
            if constexpr (std::is_same_v<T, std::string>)
            {
                if (!v.is_string())
                    throw ConfigError("key '" + key + "' must be a string");
                return v.get<std::string>();
            }
            else if constexpr (std::is_same_v<T, bool>)
            {
                if (!v.is_boolean())
                    throw ConfigError("key '" + key + "' must be a boolean");
                return v.get<bool>();
            }
            else if constexpr (std::is_integral_v<T>)
            {
                if (!v.is_number_integer())
                    throw ConfigError("key '" + key + "' must be an integer");
                return v.get<T>();
            }
            else
            {
                if (!v.is_number())
                    throw ConfigError("key '" + key + "' must be a number");
                return v.get<T>();
            }
        }

        template <typename T>
        void maybe(const json &j, const std::string &key, T &out)
        {
            if (j.contains(key))
                out = read<T>(j, key);
        }

        template <typename T>
        void maybe(const json &j, const std::string &key, std::optional<T> &out)
        {
            if (j.contains(key))
                out = read<T>(j, key);
        }

        /// The radius a grid or preset sigma is written to.
        void set_sigma(OptimizerConfig &c, double sigma)
        {
            if (c.algorithm == Algorithm::lsgd)
                c.lsgd_sigma = sigma;
            else
                c.sigma.sigma0 = sigma;
        }

        bool sigma_tunable(Algorithm a)
        {
            return uses_smoothing(a) && a != Algorithm::homotopy;
        }

        void write_file(const fs::path &path, const std::string &text)
        {
            if (path.has_parent_path())
                fs::create_directories(path.parent_path());
            std::ofstream out(path, std::ios::binary);
            if (!out)
                throw Error("cannot write '" + path.string() + "'");
            out << text;
            if (!out)
                throw Error("write failed for '" + path.string() + "'");
        }
    }

    // ------------------------------------------------------------------ presets

    std::optional<Preset> table_preset(Algorithm algorithm, const std::string &function)
    {
        static const std::vector<std::string> functions = {"ackley",     "levy",       "michalewicz",
                                                           "rastrigin",  "rosenbrock", "schwefel_abs"};
        struct Row
        {
            std::vector<double> lambda;
            std::vector<double> sigma;
        };
        static const std::map<std::string, Row> rows = {
            {"mc_gsmoothgd", {{1e0, 1e-1, 1e-4, 1e-3, 1e-5, 1e0}, {1e0, 1e-2, 1e-2, 1e0, 1e0, 1e-3}}},
            {"dgs", {{1e-1, 1e-1, 1e-4, 1e-5, 1e-5, 1e-2}, {1e-1, 1e-1, 1e-2, 1e-3, 1e0, 1e-3}}},
            {"lsgd", {{1e-1, 1e-1, 1e-5, 1e-5, 1e-5, 1e-1}, {1e-3, 1e-2, 1e-1, 1e-3, 1e0, 1e0}}},
            {"slgh", {{1e0, 1e-3, 1e-6, 1e-4, 1e-5, 1e-2}, {1e0, 1e-1, 1e-3, 1e-2, 1e0, 1e-3}}},
            {"nag", {{1e-3, 1e-4, 1e-5, 1e-5, 1e-5, 1e-3}, {}}},
            {"adam", {{1e-4, 1e-3, 1e-4, 1e-4, 1e-1, 1e-1}, {}}},
            {"rmsprop", {{1e-4, 1e-3, 1e-4, 1e-4, 1e-2, 1e-1}, {}}},
        };
        std::string row = to_string(algorithm);
        if (algorithm == Algorithm::slgh_r || algorithm == Algorithm::slgh_d)
            row = "slgh";
        const std::string fn = function == "schwefel" ? "schwefel_abs" : function;
        auto r = rows.find(row);
        auto c = std::find(functions.begin(), functions.end(), fn);
        if (r == rows.end() || c == functions.end())
            return std::nullopt;
        const auto i = static_cast<std::size_t>(c - functions.begin());
        Preset p{r->second.lambda[i], std::nullopt};
        if (!r->second.sigma.empty())
            p.sigma = r->second.sigma[i];
        return p;
    }

    // ------------------------------------------------------------------ configs

    void ExperimentConfig::validate() const
    {
        if (!is_known_objective(function))
            throw ConfigError("unknown objective '" + function + "'");
        if (dim < 1)
            throw ConfigError("dim must be at least 1");
        if (function == "figure1" && dim != 1)
            throw ConfigError("figure1 is one-dimensional");
        if (seeds.empty())
            throw ConfigError("seeds must be non-empty");
        if (std::set<std::int64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
            throw ConfigError("seeds must be distinct");
        if (!(rho >= 0) || !std::isfinite(rho))
            throw ConfigError("rho must be a finite non-negative number");
        if (!(optimizer.learning_rate > 0) || !std::isfinite(optimizer.learning_rate))
            throw ConfigError("learning_rate must be positive");
        if (optimizer.n_samples < 1)
            throw ConfigError("n_samples must be at least 1");
        if (optimizer.gh_points < 1 || optimizer.quad_points < 1)
            throw ConfigError("quadrature point counts must be at least 1");
        if (!(optimizer.lsgd_sigma >= 0))
            throw ConfigError("lsgd_sigma must be non-negative");
        if (optimizer.algorithm != Algorithm::homotopy)
            optimizer.sigma.validate();
        else if (optimizer.homotopy_sigmas.empty())
            throw ConfigError("homotopy requires homotopy_sigmas");
        if (!stopping.max_f_evals || *stopping.max_f_evals < 1)
            throw ConfigError("budget must be a positive evaluation count");
        if (stopping.max_iters && *stopping.max_iters < 0)
            throw ConfigError("stopping.max_iters must be non-negative");
    }

    std::string ExperimentConfig::default_stem() const
    {
        return function + "_" + to_string(optimizer.algorithm) + "_d" + std::to_string(dim) + "_rho" + fmt(rho);
    }

    ExperimentConfig config_from_json(const json &j)
    {
        static const std::set<std::string> top = {
            "preset",         "function",   "dim",        "algorithm",     "rho",
            "seeds",          "root_seed",  "budget",     "stopping",      "output",
            "learning_rate",  "sigma",      "estimator",  "n_samples",     "scheme",
            "quad_points",    "gh_points",  "lsgd_sigma", "baseline",      "homotopy_sigmas",
            "homotopy_inner_tol", "homotopy_inner_iters"};
        reject_unknown(j, top, "config");

        ExperimentConfig c;
        auto &o = c.optimizer;
        std::optional<Preset> preset;
        if (j.contains("preset"))
        {
            const auto name = read<std::string>(j, "preset");
            const auto slash = name.find('/');
            if (slash == std::string::npos)
                throw ConfigError("preset must read '<algorithm>/<function>'");
            o.algorithm = algorithm_from_string(name.substr(0, slash));
            c.function = name.substr(slash + 1);
            if (c.function == "schwefel")
                c.function = "schwefel_abs";
            preset = table_preset(o.algorithm, c.function);
            if (!preset)
                throw ConfigError("no tabulated preset '" + name + "'");
        }
        if (j.contains("function"))
            c.function = read<std::string>(j, "function");
        if (c.function.empty())
            throw ConfigError("config requires 'function'");
        if (!is_known_objective(c.function))
            throw ConfigError("unknown objective '" + c.function + "'");
        if (j.contains("algorithm"))
            o.algorithm = algorithm_from_string(read<std::string>(j, "algorithm"));
        else if (!preset)
            throw ConfigError("config requires 'algorithm'");
        if (!j.contains("dim"))
            throw ConfigError("config requires 'dim'");
        c.dim = read<Eigen::Index>(j, "dim");

        if (o.algorithm == Algorithm::gsmoothgd)
            o.estimator = EstimatorKind::closed_form;
        if (preset)
        {
            o.learning_rate = preset->learning_rate;
            if (preset->sigma)
                set_sigma(o, *preset->sigma);
        }

        maybe(j, "rho", c.rho);
        if (j.contains("seeds"))
        {
            const auto &s = j.at("seeds");
            if (s.is_number_integer())
            {
                c.seeds.clear();
                for (std::int64_t i = 0; i < s.get<std::int64_t>(); ++i)
                    c.seeds.push_back(i);
            }
            else if (s.is_array())
            {
                c.seeds.clear();
                for (const auto &v : s)
                {
                    if (!v.is_number_integer())
                        throw ConfigError("key 'seeds' must hold integers");
                    c.seeds.push_back(v.get<std::int64_t>());
                }
            }
            else
                throw ConfigError("key 'seeds' must be a count or a list of integers");
        }
        maybe(j, "root_seed", c.root_seed);
        std::int64_t budget = default_eval_budget;
        maybe(j, "budget", budget);
        c.stopping.max_f_evals = budget;
        if (j.contains("stopping"))
        {
            const auto &s = j.at("stopping");
            reject_unknown(s, {"max_iters", "grad_tol", "target_f"}, "stopping");
            maybe(s, "max_iters", c.stopping.max_iters);
            maybe(s, "grad_tol", c.stopping.grad_tol);
            maybe(s, "target_f", c.stopping.target_f);
        }
        maybe(j, "output", c.output);

        maybe(j, "learning_rate", o.learning_rate);
        if (j.contains("sigma"))
        {
            const auto &s = j.at("sigma");
            if (s.is_number())
                set_sigma(o, s.get<double>());
            else
            {
                reject_unknown(s,
                               {"kind", "sigma0", "gamma", "eta", "eps_floor", "boost", "max_restarts",
                                "stall_window", "stall_tol"},
                               "sigma");
                if (s.contains("kind"))
                    o.sigma.kind = schedule_from_string(read<std::string>(s, "kind"));
                maybe(s, "sigma0", o.sigma.sigma0);
                maybe(s, "gamma", o.sigma.gamma);
                maybe(s, "eta", o.sigma.eta);
                maybe(s, "eps_floor", o.sigma.eps_floor);
                maybe(s, "boost", o.sigma.boost);
                maybe(s, "max_restarts", o.sigma.max_restarts);
                maybe(s, "stall_window", o.sigma.stall_window);
                maybe(s, "stall_tol", o.sigma.stall_tol);
            }
        }
        if (j.contains("estimator"))
            o.estimator = estimator_from_string(read<std::string>(j, "estimator"));
        maybe(j, "n_samples", o.n_samples);
        if (j.contains("scheme"))
            o.scheme = scheme_from_string(read<std::string>(j, "scheme"));
        maybe(j, "quad_points", o.quad_points);
        maybe(j, "gh_points", o.gh_points);
        maybe(j, "lsgd_sigma", o.lsgd_sigma);
        if (j.contains("baseline"))
        {
            const auto &b = j.at("baseline");
            reject_unknown(b, {"momentum", "beta1", "beta2", "adam_eps", "rms_decay", "rms_eps"}, "baseline");
            maybe(b, "momentum", o.baseline.momentum);
            maybe(b, "beta1", o.baseline.beta1);
            maybe(b, "beta2", o.baseline.beta2);
            maybe(b, "adam_eps", o.baseline.adam_eps);
            maybe(b, "rms_decay", o.baseline.rms_decay);
            maybe(b, "rms_eps", o.baseline.rms_eps);
        }
        if (j.contains("homotopy_sigmas"))
        {
            const auto &h = j.at("homotopy_sigmas");
            if (!h.is_array())
                throw ConfigError("key 'homotopy_sigmas' must be a list of numbers");
            for (const auto &v : h)
            {
                if (!v.is_number())
                    throw ConfigError("key 'homotopy_sigmas' must be a list of numbers");
                o.homotopy_sigmas.push_back(v.get<double>());
            }
        }
        maybe(j, "homotopy_inner_tol", o.homotopy_inner_tol);
        maybe(j, "homotopy_inner_iters", o.homotopy_inner_iters);

        c.validate();
        return c;
    }

    json config_to_json(const ExperimentConfig &c)
    {
        const auto &o = c.optimizer;
        json j;
        j["function"] = c.function;
        j["dim"] = c.dim;
        j["algorithm"] = to_string(o.algorithm);
        j["rho"] = c.rho;
        j["seeds"] = c.seeds;
        j["root_seed"] = c.root_seed;
        j["budget"] = *c.stopping.max_f_evals;
        json stop = json::object();
        if (c.stopping.max_iters)
            stop["max_iters"] = *c.stopping.max_iters;
        if (c.stopping.grad_tol)
            stop["grad_tol"] = *c.stopping.grad_tol;
        if (c.stopping.target_f)
            stop["target_f"] = *c.stopping.target_f;
        j["stopping"] = stop;
        j["output"] = c.output;
        j["learning_rate"] = o.learning_rate;
        j["sigma"] = {{"kind", to_string(o.sigma.kind)}, {"sigma0", o.sigma.sigma0},
                      {"gamma", o.sigma.gamma},          {"eta", o.sigma.eta},
                      {"eps_floor", o.sigma.eps_floor},  {"boost", o.sigma.boost},
                      {"max_restarts", o.sigma.max_restarts}, {"stall_window", o.sigma.stall_window},
                      {"stall_tol", o.sigma.stall_tol}};
        j["estimator"] = to_string(o.estimator);
        j["n_samples"] = o.n_samples;
        j["scheme"] = scheme_name(o.scheme);
        j["quad_points"] = o.quad_points;
        j["gh_points"] = o.gh_points;
        j["lsgd_sigma"] = o.lsgd_sigma;
        j["baseline"] = {{"momentum", o.baseline.momentum}, {"beta1", o.baseline.beta1},
                         {"beta2", o.baseline.beta2},       {"adam_eps", o.baseline.adam_eps},
                         {"rms_decay", o.baseline.rms_decay}, {"rms_eps", o.baseline.rms_eps}};
        j["homotopy_sigmas"] = o.homotopy_sigmas;
        j["homotopy_inner_tol"] = o.homotopy_inner_tol;
        j["homotopy_inner_iters"] = o.homotopy_inner_iters;
        return j;
    }

    std::vector<ExperimentConfig> load_configs(const fs::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config '" + path.string() + "'");
        json j;
        try
        {
            j = json::parse(in);
        }
        catch (const json::parse_error &e)
        {
            throw ConfigError("config '" + path.string() + "' does not parse: " + e.what());
        }
        std::vector<ExperimentConfig> out;
        if (j.is_array())
            for (const auto &item : j)
                out.push_back(config_from_json(item));
        else
            out.push_back(config_from_json(j));
        if (out.empty())
            throw ConfigError("config '" + path.string() + "' holds no experiments");
        return out;
    }

    ExperimentConfig load_config(const fs::path &path)
    {
        auto all = load_configs(path);
        if (all.size() != 1)
            throw ConfigError("config '" + path.string() + "' holds more than one experiment");
        return all.front();
    }

    std::uint64_t effective_root_seed(std::uint64_t configured)
    {
        const char *env = std::getenv("GSMOOTH_SEED");
        if (!env || !*env)
            return configured;
        std::uint64_t v = 0;
        const char *end = env + std::char_traits<char>::length(env);
        auto res = std::from_chars(env, end, v);
        if (res.ec != std::errc() || res.ptr != end)
            throw ConfigError(std::string("GSMOOTH_SEED is not an unsigned integer: '") + env + "'");
        return v;
    }

    Vector initial_point(const ObjectiveFunction &f, std::uint64_t root_seed, std::int64_t seed)
    {
        return sample_initial_points(f, 1, derive_seed(root_seed, static_cast<std::uint64_t>(seed))).front();
    }

    // ------------------------------------------------------------------ aggregation

    std::vector<double> log_grid(double upper, int points)
    {
        if (!(upper >= 1) || points < 2)
            throw ConfigError("log grid needs upper >= 1 and at least 2 points");
        std::vector<double> g(static_cast<std::size_t>(points));
        const double lu = std::log(upper);
        for (int i = 0; i < points; ++i)
            g[static_cast<std::size_t>(i)] = std::exp(lu * i / (points - 1));
        g.front() = 1;
        g.back() = upper;
        return g;
    }

    std::vector<double> resample(const OptimizerTrace &trace, const std::vector<double> &grid, bool by_evals)
    {
        if (trace.records.empty())
            throw Error("cannot resample an empty trace");
        std::vector<double> out(grid.size());
        std::size_t r = 0;
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            auto counter = [&](std::size_t k)
            {
                return by_evals ? static_cast<double>(trace.records[k].f_evals)
                                : static_cast<double>(trace.records[k].k);
            };
            while (r + 1 < trace.records.size() && counter(r + 1) <= grid[i])
                ++r;
            out[i] = trace.records[r].f;
        }
        return out;
    }

    double percentile(std::vector<double> values, double q)
    {
        if (values.empty())
            throw Error("percentile of an empty set");
        std::sort(values.begin(), values.end());
        const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        const double w = pos - static_cast<double>(lo);
        if (w == 0)
            return values[lo];
        return values[lo] + w * (values[hi] - values[lo]);
    }

    PercentileCurves aggregate(const std::vector<std::vector<double>> &curves)
    {
        PercentileCurves out;
        if (curves.empty())
            return out;
        const auto n = curves.front().size();
        std::vector<double> column(curves.size());
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t s = 0; s < curves.size(); ++s)
                column[s] = curves[s].at(i);
            out.p25.push_back(percentile(column, 25));
            out.median.push_back(percentile(column, 50));
            out.p75.push_back(percentile(column, 75));
        }
        return out;
    }

    double ExperimentRecord::median_final_f() const
    {
        std::vector<double> finals;
        for (const auto &r : runs)
            finals.push_back(r.final_f);
        return percentile(finals, 50);
    }

    // ------------------------------------------------------------------ experiments

    namespace
    {
        OptimizerTrace run_seed(const ExperimentConfig &c, const ObjectiveFunction &f, std::uint64_t root,
                                std::int64_t seed, double rho)
        {
            const std::uint64_t key = derive_seed(root, static_cast<std::uint64_t>(seed));
            NoisyObjective noisy(f, rho, derive_seed(key, "noise"));
            RunOptions opts;
            opts.seed = key;
            return run(c.optimizer, noisy, initial_point(f, root, seed), c.stopping, opts);
        }
    }

    ExperimentRecord run_experiment(const ExperimentConfig &config, int workers)
    {
        config.validate();
        const auto start = std::chrono::steady_clock::now();
        ExperimentRecord rec;
        rec.config = config;
        rec.config.root_seed = effective_root_seed(config.root_seed);
        const auto f = make_objective(config.function, config.dim);
        const auto budget = static_cast<double>(*config.stopping.max_f_evals);
        rec.eval_grid = log_grid(budget);
        rec.iter_grid = log_grid(config.stopping.max_iters ? std::max<double>(1, *config.stopping.max_iters) : budget);

        const auto &c = rec.config;
        rec.runs = parallel_map<SeedSummary>(c.seeds.size(), workers, [&](std::size_t i)
        {
            const auto seed = c.seeds[i];
            auto trace = run_seed(c, f, c.root_seed, seed, c.rho);
            SeedSummary s;
            s.seed = seed;
            s.final_f = trace.final_f();
            s.iterations = trace.iterations();
            s.f_evals = trace.records.back().f_evals;
            s.reason = to_string(trace.reason);
            s.diverged = trace.diverged;
            s.curve = resample(trace, rec.eval_grid, true);
            s.iter_curve = resample(trace, rec.iter_grid, false);
            return s;
        });

        std::vector<std::vector<double>> curves, iter_curves;
        for (const auto &r : rec.runs)
        {
            curves.push_back(r.curve);
            iter_curves.push_back(r.iter_curve);
        }
        rec.curves = aggregate(curves);
        rec.iter_curves = aggregate(iter_curves);
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return rec;
    }

    // ------------------------------------------------------------------ grid search

    std::vector<double> default_lambda_grid()
    {
        return {1, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    }

    std::vector<double> default_sigma_grid()
    {
        return {1, 1e-1, 1e-2, 1e-3};
    }

    GridResult grid_search(const ExperimentConfig &base, const std::vector<double> &lambda_grid,
                           const std::vector<double> &sigma_grid, int workers)
    {
        if (lambda_grid.empty())
            throw ConfigError("lambda grid must be non-empty");
        const Algorithm alg = base.optimizer.algorithm;
        const bool tune_sigma = sigma_tunable(alg);
        if (tune_sigma && sigma_grid.empty())
            throw ConfigError("sigma grid must be non-empty");
        base.validate();

        GridResult result;
        result.function = base.function;
        result.dim = base.dim;
        result.algorithm = alg;
        for (double l : lambda_grid)
        {
            if (!tune_sigma)
                result.cells.push_back({l, std::nullopt, 0, {}});
            else
                for (double s : sigma_grid)
                    result.cells.push_back({l, s, 0, {}});
        }

        const auto f = make_objective(base.function, base.dim);
        const auto root = effective_root_seed(base.root_seed);
        const std::size_t n_seeds = base.seeds.size();
        const auto finals = parallel_map<double>(result.cells.size() * n_seeds, workers, [&](std::size_t job)
        {
            const auto &cell = result.cells[job / n_seeds];
            ExperimentConfig c = base;
            c.optimizer.learning_rate = cell.learning_rate;
            if (cell.sigma)
                set_sigma(c.optimizer, *cell.sigma);
            c.validate();
            // exact evaluations during the search
            auto trace = run_seed(c, f, root, base.seeds[job % n_seeds], 0.0);
            return trace.diverged ? std::numeric_limits<double>::infinity() : trace.final_f();
        });

        for (std::size_t i = 0; i < result.cells.size(); ++i)
        {
            auto &cell = result.cells[i];
            cell.finals.assign(finals.begin() + static_cast<std::ptrdiff_t>(i * n_seeds),
                               finals.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_seeds));
            cell.median_final_f = percentile(cell.finals, 50);
            if (std::isnan(cell.median_final_f))
                cell.median_final_f = std::numeric_limits<double>::infinity();
        }
        auto key = [](const GridCell &c) { return std::make_tuple(c.median_final_f, c.learning_rate, c.sigma.value_or(0)); };
        result.best = *std::min_element(result.cells.begin(), result.cells.end(),
                                        [&](const GridCell &a, const GridCell &b) { return key(a) < key(b); });
        return result;
    }

    json grid_to_json(const GridResult &r)
    {
        auto num = [](double v) { return std::isfinite(v) ? json(v) : json("inf"); };
        auto cell = [&](const GridCell &c)
        {
            json j{{"learning_rate", c.learning_rate}, {"median_final_f", num(c.median_final_f)}};
            j["sigma"] = c.sigma ? json(*c.sigma) : json(nullptr);
            json finals = json::array();
            for (double v : c.finals)
                finals.push_back(num(v));
            j["finals"] = finals;
            return j;
        };
        json j{{"function", r.function}, {"dim", r.dim}, {"algorithm", to_string(r.algorithm)}};
        j["best"] = cell(r.best);
        j["cells"] = json::array();
        for (const auto &c : r.cells)
            j["cells"].push_back(cell(c));
        return j;
    }

    // ------------------------------------------------------------------ persistence

    namespace
    {
        json curves_json(const PercentileCurves &c)
        {
            return {{"median", c.median}, {"p25", c.p25}, {"p75", c.p75}};
        }

        PercentileCurves curves_from(const json &j)
        {
            return {j.at("median").get<std::vector<double>>(), j.at("p25").get<std::vector<double>>(),
                    j.at("p75").get<std::vector<double>>()};
        }
    }

    json record_to_json(const ExperimentRecord &r)
    {
        json j;
        j["config"] = config_to_json(r.config);
        j["eval_grid"] = r.eval_grid;
        j["iter_grid"] = r.iter_grid;
        j["runs"] = json::array();
        for (const auto &s : r.runs)
            j["runs"].push_back({{"seed", s.seed},
                                 {"final_f", s.final_f},
                                 {"iterations", s.iterations},
                                 {"f_evals", s.f_evals},
                                 {"reason", s.reason},
                                 {"diverged", s.diverged},
                                 {"curve", s.curve},
                                 {"iter_curve", s.iter_curve}});
        j["curves"] = curves_json(r.curves);
        j["iter_curves"] = curves_json(r.iter_curves);
        return j;
    }

    ExperimentRecord record_from_json(const json &j)
    {
        try
        {
            ExperimentRecord r;
            r.config = config_from_json(j.at("config"));
            r.eval_grid = j.at("eval_grid").get<std::vector<double>>();
            r.iter_grid = j.at("iter_grid").get<std::vector<double>>();
            for (const auto &s : j.at("runs"))
            {
                SeedSummary x;
                x.seed = s.at("seed").get<std::int64_t>();
                x.final_f = s.at("final_f").get<double>();
                x.iterations = s.at("iterations").get<std::int64_t>();
                x.f_evals = s.at("f_evals").get<std::int64_t>();
                x.reason = s.at("reason").get<std::string>();
                x.diverged = s.at("diverged").get<bool>();
                x.curve = s.at("curve").get<std::vector<double>>();
                x.iter_curve = s.at("iter_curve").get<std::vector<double>>();
                r.runs.push_back(std::move(x));
            }
            r.curves = curves_from(j.at("curves"));
            r.iter_curves = curves_from(j.at("iter_curves"));
            return r;
        }
        catch (const json::exception &e)
        {
            throw ConfigError(std::string("malformed experiment record: ") + e.what());
        }
    }

    fs::path emit_results(const ExperimentRecord &record, Format format, const fs::path &stem)
    {
        fs::path path = stem;
        if (format == Format::json)
        {
            path += ".json";
            write_file(path, record_to_json(record).dump(1) + "\n");
            return path;
        }
        path += ".csv";
        std::ostringstream out;
        out << "eval_count,median,p25,p75";
        for (const auto &s : record.runs)
            out << ",seed_" << s.seed;
        out << "\n";
        for (std::size_t i = 0; i < record.eval_grid.size(); ++i)
        {
            out << fmt(record.eval_grid[i]) << ',' << fmt(record.curves.median[i]) << ','
                << fmt(record.curves.p25[i]) << ',' << fmt(record.curves.p75[i]);
            for (const auto &s : record.runs)
                out << ',' << fmt(s.curve[i]);
            out << "\n";
        }
        write_file(path, out.str());
        return path;
    }

    std::vector<ExperimentRecord> load_records(const fs::path &dir)
    {
        if (!fs::is_directory(dir))
            throw ConfigError("'" + dir.string() + "' is not a directory");
        std::vector<fs::path> files;
        for (const auto &e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".json")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        std::vector<ExperimentRecord> out;
        for (const auto &p : files)
        {
            std::ifstream in(p);
            json j = json::parse(in, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("runs") || !j.contains("eval_grid"))
                continue;
            out.push_back(record_from_json(j));
        }
        return out;
    }

    std::vector<fs::path> emit_plot_data(const std::vector<ExperimentRecord> &records, const fs::path &out_dir)
    {
        if (records.empty())
            throw ConfigError("nothing to plot");
        std::map<std::string, Eigen::Index> dims;
        std::map<std::pair<std::string, double>, std::vector<const ExperimentRecord *>> groups;
        for (const auto &r : records)
        {
            auto [it, fresh] = dims.emplace(r.config.function, r.config.dim);
            if (!fresh && it->second != r.config.dim)
                throw ConfigError("mixed dims for '" + r.config.function + "'");
            groups[{r.config.function, r.config.rho}].push_back(&r);
        }
        const auto &order = all_algorithms();
        auto rank = [&](Algorithm a) { return std::find(order.begin(), order.end(), a) - order.begin(); };

        std::vector<fs::path> written;
        for (auto &[key, group] : groups)
        {
            std::sort(group.begin(), group.end(), [&](auto *a, auto *b)
                      { return rank(a->config.optimizer.algorithm) < rank(b->config.optimizer.algorithm); });
            for (std::size_t i = 0; i < group.size(); ++i)
            {
                if (group[i]->eval_grid != group.front()->eval_grid)
                    throw ConfigError("records for '" + key.first + "' use different evaluation grids");
                if (i > 0 && group[i]->config.optimizer.algorithm == group[i - 1]->config.optimizer.algorithm)
                    throw ConfigError("duplicate algorithm '" + to_string(group[i]->config.optimizer.algorithm) +
                                      "' for '" + key.first + "' at rho " + fmt(key.second));
            }
            std::ostringstream out;
            out << "eval_count";
            for (auto *r : group)
            {
                const auto a = to_string(r->config.optimizer.algorithm);
                out << ',' << a << "_median," << a << "_p25," << a << "_p75";
            }
            out << "\n";
            const auto &grid = group.front()->eval_grid;
            for (std::size_t i = 0; i < grid.size(); ++i)
            {
                out << fmt(grid[i]);
                for (auto *r : group)
                    out << ',' << fmt(r->curves.median[i]) << ',' << fmt(r->curves.p25[i]) << ','
                        << fmt(r->curves.p75[i]);
                out << "\n";
            }
            const auto path = out_dir / (key.first + "_d" + std::to_string(dims[key.first]) + "_rho" +
                                         fmt(key.second) + ".csv");
            write_file(path, out.str());
            written.push_back(path);
        }
        return written;
    }
}
