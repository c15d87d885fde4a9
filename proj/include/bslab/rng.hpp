#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace bslab {

// Seeded stream. (seed, stream) pairs give independent, reproducible
// sequences regardless of how work is scheduled. Boost distributions are
// used because their output is specified, unlike the std ones.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        gen_.seed(seq);
    }

    double uniform(double a = 0.0, double b = 1.0)
    {
        return boost::random::uniform_real_distribution<double>(a, b)(gen_);
    }
    double normal() { return boost::random::normal_distribution<double>()(gen_); }
    std::complex<double> cnormal() { return {normal(), normal()}; }
    int integer(int lo, int hi) // inclusive
    {
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 gen_;
};

} // namespace bslab
