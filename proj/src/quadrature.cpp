#include "gsmooth/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

namespace gsmooth
{
    GaussHermiteRule::GaussHermiteRule(int points)
    {
        if (points < 1)
            throw ConfigError("Gauss-Hermite rule needs at least one point");
        const int n = points;
        constexpr double pim4 = 0.7511255444649425; // pi^(-1/4)
        nodes_.assign(n, 0.0);
        weights_.assign(n, 0.0);

        const int half = (n + 1) / 2;
        double z = 0;
        for (int i = 0; i < half; ++i)
        {
            // asymptotic initial guesses for the largest roots, then extrapolation from previous roots
            if (i == 0)
                z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -0.16667);
            else if (i == 1)
                z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
            else if (i == 2)
                z = 1.86 * z - 0.86 * nodes_[0];
            else if (i == 3)
                z = 1.91 * z - 0.91 * nodes_[1];
            else
                z = 2.0 * z - nodes_[i - 2];

            double pp = 0;
            for (int it = 0; it < 100; ++it)
            {
                double p1 = pim4, p2 = 0;
                for (int j = 1; j <= n; ++j)
                {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
                }
                pp = std::sqrt(2.0 * n) * p2;
                const double step = p1 / pp;
                z -= step;
                if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z)))
                    break;
            }
            nodes_[i] = z;
            nodes_[n - 1 - i] = -z;
            weights_[i] = weights_[n - 1 - i] = 2.0 / (pp * pp);
        }
        if (n % 2 == 1)
            nodes_[half - 1] = 0.0;

        const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
        prob_weights_.resize(n);
        for (int i = 0; i < n; ++i)
            prob_weights_[i] = weights_[i] / total;
    }

    const GaussHermiteRule &gauss_hermite(int points)
    {
        static std::mutex mutex;
        static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
        std::lock_guard lock(mutex);
        auto &slot = cache[points];
        if (!slot)
            slot = std::make_unique<GaussHermiteRule>(points);
        return *slot;
    }
}
