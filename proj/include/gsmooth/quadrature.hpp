#pragma once

#include "gsmooth/core.hpp"

#include <vector>

namespace gsmooth
{
    /// Gauss-Hermite rule for the weight exp(-z^2) on the real line.
    ///
    /// Nodes are found by Newton iteration on the orthonormal Hermite recurrence, which stays
    /// accurate well past 100 points. `weights()` integrate against exp(-z^2) (they sum to
    /// sqrt(pi)); `probability_weights()` are rescaled to sum to one, so that
    /// sum_i p_i g(z_i) approximates E[g(v)] with v ~ N(0, 1/2).
    class GaussHermiteRule
    {
    public:
        explicit GaussHermiteRule(int points);

        int size() const { return static_cast<int>(nodes_.size()); }
        const std::vector<double> &nodes() const { return nodes_; }
        const std::vector<double> &weights() const { return weights_; }
        const std::vector<double> &probability_weights() const { return prob_weights_; }

    private:
        std::vector<double> nodes_;
        std::vector<double> weights_;
        std::vector<double> prob_weights_;
    };

    /// Cached rule; thread-safe.
    const GaussHermiteRule &gauss_hermite(int points);
}
