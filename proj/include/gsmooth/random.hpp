#pragma once

#include "gsmooth/core.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace gsmooth
{
    /// SplitMix64 finalizer; used to derive independent seeds from (root, key) pairs.
    constexpr std::uint64_t mix64(std::uint64_t z)
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// FNV-1a; stable across platforms, unlike std::hash.
    constexpr std::uint64_t hash_name(std::string_view s)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : s)
        {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t key)
    {
        return mix64(root ^ mix64(key));
    }

    constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view key)
    {
        return derive_seed(root, hash_name(key));
    }

    /// Seeded random stream. Substreams obtained with split() are independent of the parent's
    /// consumption, so parallel jobs can be keyed deterministically.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix64(seed)) {}

        std::uint64_t seed() const { return seed_; }

        Rng split(std::uint64_t key) const { return Rng(derive_seed(seed_, key)); }
        Rng split(std::string_view key) const { return Rng(derive_seed(seed_, key)); }

        double uniform(double lo, double hi)
        {
            return std::uniform_real_distribution<double>(lo, hi)(engine_);
        }

        double normal(double stddev = 1.0)
        {
            return std::normal_distribution<double>(0.0, stddev)(engine_);
        }

        std::mt19937_64 &engine() { return engine_; }

    private:
        std::uint64_t seed_;
        std::mt19937_64 engine_;
    };

    /// Draws v ~ N(0, I/2), the density proportional to exp(-|v|^2).
    class GaussianSampler
    {
    public:
        GaussianSampler(Eigen::Index dim, std::uint64_t seed)
            : dim_(dim), rng_(seed), normal_(0.0, 0.70710678118654752440)
        {
        }

        Eigen::Index dim() const { return dim_; }

        void draw(Vector &out)
        {
            out.resize(dim_);
            for (Eigen::Index i = 0; i < dim_; ++i)
                out[i] = normal_(rng_.engine());
        }

        Vector draw()
        {
            Vector v;
            draw(v);
            return v;
        }

        GaussianSampler split(std::uint64_t key) const
        {
            return GaussianSampler(dim_, derive_seed(rng_.seed(), key));
        }

    private:
        Eigen::Index dim_;
        Rng rng_;
        std::normal_distribution<double> normal_;
    };
}
