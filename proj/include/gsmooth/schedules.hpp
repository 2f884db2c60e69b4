#pragma once

#include "gsmooth/core.hpp"
#include "gsmooth/smoothing.hpp"

#include <deque>
#include <optional>
#include <string>

namespace gsmooth
{
    enum class ScheduleKind
    {
        constant,
        geometric,
        square_summable,
        slgh_d,
        adaptive_restart
    };

    std::string to_string(ScheduleKind kind);
    ScheduleKind schedule_from_string(const std::string &name);

    struct ScheduleConfig
    {
        ScheduleKind kind = ScheduleKind::constant;
        double sigma0 = 1.0;
        /// Decay factor for geometric, slgh_d and adaptive_restart.
        double gamma = 0.9;
        /// Step size on sigma for slgh_d.
        double eta = 0.1;
        /// Lower bound on every emitted sigma.
        double eps_floor = 1e-8;
        /// Restart multiplier on sigma0 and restart cap for adaptive_restart.
        double boost = 10.0;
        int max_restarts = 3;
        int stall_window = 20;
        double stall_tol = 1e-6;

        void validate() const;
    };

    /// Reports a stall once |x_k - x_{k-w}| < tol (1 + |x_k|).
    class StallDetector
    {
    public:
        StallDetector(int window, double tol) : window_(window), tol_(tol) {}

        bool observe(const Vector &x);
        void reset() { history_.clear(); }

    private:
        int window_;
        double tol_;
        std::deque<Vector> history_;
    };

    /// Per-step information the schedules may need. Which fields are required depends on the kind.
    struct ScheduleContext
    {
        /// Estimate of d f_sigma / d sigma at (x_k, sigma_k); slgh_d.
        std::optional<double> dsigma;
        /// adaptive_restart: stall flag, and when stalled, f_sigma(x_k) and f(x_k).
        std::optional<bool> stalled;
        std::optional<ValueEstimate> f_sigma;
        std::optional<double> f_x;
    };

    /// Stateful sigma_k generator. current() is the radius for the next step; next_sigma()
    /// advances it. The first step uses sigma0.
    class SigmaSchedule
    {
    public:
        explicit SigmaSchedule(ScheduleConfig config);

        const ScheduleConfig &config() const { return config_; }
        double current() const { return sigma_; }
        int iteration() const { return k_; }
        int restarts() const { return restarts_; }

        /// Kinds that consume context (slgh_d, adaptive_restart) throw ConfigError when a required
        /// field is missing.
        double next_sigma(const ScheduleContext &context = {});

        bool needs_dsigma() const { return config_.kind == ScheduleKind::slgh_d; }
        bool needs_stall_check() const { return config_.kind == ScheduleKind::adaptive_restart; }

        /// Stall detector owned by the schedule (adaptive_restart).
        StallDetector &stall_detector() { return detector_; }

    private:
        double floored(double s) const;

        ScheduleConfig config_;
        double sigma_;
        int k_ = 1;
        int restarts_ = 0;
        StallDetector detector_;
    };
}
