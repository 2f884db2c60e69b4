#include "gsmooth/schedules.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gsmooth;

namespace
{
    ScheduleConfig cfg(ScheduleKind kind, double sigma0)
    {
        ScheduleConfig c;
        c.kind = kind;
        c.sigma0 = sigma0;
        return c;
    }
}

TEST(Schedule, Constant)
{
    SigmaSchedule s(cfg(ScheduleKind::constant, 0.5));
    EXPECT_EQ(s.current(), 0.5);
    for (int k = 0; k < 20; ++k)
        EXPECT_EQ(s.next_sigma(), 0.5);
}

TEST(Schedule, Geometric)
{
    auto c = cfg(ScheduleKind::geometric, 1.0);
    c.gamma = 0.9;
    SigmaSchedule s(c);
    double prev = s.current();
    for (int k = 1; k <= 3; ++k)
    {
        const double next = s.next_sigma();
        EXPECT_EQ(next, 0.9 * prev);
        prev = next;
    }
    EXPECT_NEAR(s.current(), 0.729, 1e-15);
}

TEST(Schedule, SquareSummable)
{
    SigmaSchedule s(cfg(ScheduleKind::square_summable, 2.0));
    double sum = s.current() * s.current();
    EXPECT_EQ(s.current(), 2.0);
    EXPECT_EQ(s.next_sigma(), 1.0);
    sum += 1.0;
    double prev = 1.0;
    for (int k = 3; k <= 1000000; ++k)
    {
        const double v = s.next_sigma();
        ASSERT_LE(v, prev);
        prev = v;
        sum += v * v;
    }
    EXPECT_NEAR(prev, 2.0 / 1000000, 1e-18);
    EXPECT_LT(sum, 4.0 * (1 + std::numbers::pi * std::numbers::pi / 6));
}

TEST(Schedule, SlghD)
{
    auto c = cfg(ScheduleKind::slgh_d, 1.0);
    c.gamma = 0.5;
    c.eps_floor = 1e-3;
    SigmaSchedule s(c);
    ScheduleContext ctx;
    ctx.dsigma = 0.0;
    EXPECT_EQ(s.next_sigma(ctx), 0.5);
    // large positive derivative drives the update to the floor
    ctx.dsigma = 1e6;
    EXPECT_EQ(s.next_sigma(ctx), 1e-3);
    // negative derivative: the gamma cap wins
    ctx.dsigma = -10;
    EXPECT_EQ(s.next_sigma(ctx), 5e-4 > 1e-3 ? 5e-4 : 1e-3);
    EXPECT_THROW(s.next_sigma({}), ConfigError);
}

TEST(Schedule, FloorAlwaysHolds)
{
    auto c = cfg(ScheduleKind::geometric, 1.0);
    c.gamma = 0.1;
    c.eps_floor = 1e-6;
    SigmaSchedule s(c);
    for (int k = 0; k < 100; ++k)
        EXPECT_GE(s.next_sigma(), 1e-6);
    EXPECT_EQ(s.current(), 1e-6);
}

TEST(Schedule, AdaptiveRestart)
{
    auto c = cfg(ScheduleKind::adaptive_restart, 0.2);
    c.gamma = 0.5;
    c.max_restarts = 2;
    SigmaSchedule s(c);
    EXPECT_THROW(s.next_sigma({}), ConfigError);

    ScheduleContext quiet;
    quiet.stalled = false;
    EXPECT_EQ(s.next_sigma(quiet), 0.1);

    ScheduleContext missing;
    missing.stalled = true;
    EXPECT_THROW(s.next_sigma(missing), ConfigError);

    // stalled, but the smoothed value is not clearly below f(x): keep decaying
    ScheduleContext close;
    close.stalled = true;
    close.f_sigma = ValueEstimate{0.99, 0.01, 100, 100};
    close.f_x = 1.0;
    const double before = s.current();
    EXPECT_EQ(s.next_sigma(close), 0.5 * before);
    EXPECT_EQ(s.restarts(), 0);

    ScheduleContext stuck = close;
    stuck.f_sigma = ValueEstimate{0.5, 0.01, 100, 100};
    EXPECT_EQ(s.next_sigma(stuck), 2.0);
    EXPECT_EQ(s.restarts(), 1);
    EXPECT_EQ(s.next_sigma(stuck), 2.0);
    EXPECT_EQ(s.restarts(), 2);
    // cap reached
    EXPECT_EQ(s.next_sigma(stuck), 1.0);
    EXPECT_EQ(s.restarts(), 2);
}

TEST(Schedule, Validation)
{
    EXPECT_THROW(SigmaSchedule(cfg(ScheduleKind::constant, 0.0)), ConfigError);
    auto c = cfg(ScheduleKind::geometric, 1.0);
    c.gamma = 1.0;
    EXPECT_THROW(SigmaSchedule{c}, ConfigError);
    EXPECT_EQ(schedule_from_string("slgh_d"), ScheduleKind::slgh_d);
    EXPECT_THROW(schedule_from_string("cosine"), ConfigError);
}

TEST(StallDetector, Window)
{
    StallDetector d(3, 1e-6);
    Vector x = Vector::Ones(2);
    EXPECT_FALSE(d.observe(x));
    EXPECT_FALSE(d.observe(x));
    EXPECT_FALSE(d.observe(x));
    EXPECT_TRUE(d.observe(x));
    Vector y = x;
    y[0] += 1;
    EXPECT_FALSE(d.observe(y));
    d.reset();
    EXPECT_FALSE(d.observe(y));
}
