#include "gsmooth/schedules.hpp"

#include <algorithm>
#include <cmath>

namespace gsmooth
{
    std::string to_string(ScheduleKind kind)
    {
        switch (kind)
        {
        case ScheduleKind::constant:
            return "constant";
        case ScheduleKind::geometric:
            return "geometric";
        case ScheduleKind::square_summable:
            return "square_summable";
        case ScheduleKind::slgh_d:
            return "slgh_d";
        case ScheduleKind::adaptive_restart:
            return "adaptive_restart";
        }
        return "unknown";
    }

    ScheduleKind schedule_from_string(const std::string &name)
    {
        for (auto kind : {ScheduleKind::constant, ScheduleKind::geometric, ScheduleKind::square_summable,
                          ScheduleKind::slgh_d, ScheduleKind::adaptive_restart})
            if (to_string(kind) == name)
                return kind;
        throw ConfigError("unknown sigma schedule '" + name + "'");
    }

    void ScheduleConfig::validate() const
    {
        if (!(sigma0 > 0))
            throw ConfigError("sigma.sigma0 must be positive");
        if (!(eps_floor > 0))
            throw ConfigError("sigma.eps_floor must be positive");
        if (kind != ScheduleKind::constant && kind != ScheduleKind::square_summable && !(gamma > 0 && gamma < 1))
            throw ConfigError("sigma.gamma must lie in (0, 1)");
        if (kind == ScheduleKind::slgh_d && !(eta > 0))
            throw ConfigError("sigma.eta must be positive");
        if (kind == ScheduleKind::adaptive_restart)
        {
            if (!(boost > 0) || stall_window < 1 || !(stall_tol > 0) || max_restarts < 0)
                throw ConfigError("invalid adaptive restart settings");
        }
    }

    bool StallDetector::observe(const Vector &x)
    {
        history_.push_back(x);
        if (static_cast<int>(history_.size()) > window_ + 1)
            history_.pop_front();
        if (static_cast<int>(history_.size()) < window_ + 1)
            return false;
        return (x - history_.front()).norm() < tol_ * (1 + x.norm());
    }

    SigmaSchedule::SigmaSchedule(ScheduleConfig config)
        : config_(config), sigma_(0), detector_(config.stall_window, config.stall_tol)
    {
        config_.validate();
        sigma_ = floored(config_.sigma0);
    }

    double SigmaSchedule::floored(double s) const
    {
        return std::max(s, config_.eps_floor);
    }

    double SigmaSchedule::next_sigma(const ScheduleContext &context)
    {
        const double s = sigma_;
        double next = s;
        switch (config_.kind)
        {
        case ScheduleKind::constant:
            next = config_.sigma0;
            break;
        case ScheduleKind::geometric:
            next = config_.gamma * s;
            break;
        case ScheduleKind::square_summable:
            next = config_.sigma0 / static_cast<double>(k_ + 1);
            break;
        case ScheduleKind::slgh_d:
            if (!context.dsigma)
                throw ConfigError("slgh_d schedule requires a dsigma estimate");
            next = std::min(s - config_.eta * *context.dsigma, config_.gamma * s);
            break;
        case ScheduleKind::adaptive_restart:
            if (!context.stalled)
                throw ConfigError("adaptive_restart schedule requires a stall flag");
            next = config_.gamma * s;
            if (*context.stalled && restarts_ < config_.max_restarts)
            {
                if (!context.f_sigma || !context.f_x)
                    throw ConfigError("adaptive_restart schedule requires f_sigma(x) and f(x) when stalled");
                // smoothed value below the raw value by more than two standard errors
                if (context.f_sigma->value + 2 * context.f_sigma->std_error < *context.f_x)
                {
                    next = config_.boost * config_.sigma0;
                    ++restarts_;
                    detector_.reset();
                }
            }
            break;
        }
        sigma_ = floored(next);
        ++k_;
        return sigma_;
    }
}
