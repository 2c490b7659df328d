#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace taxonet {

/// Deterministic random stream: mt19937_64 with hand-rolled distributions,
/// so sequences are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed), base_(seed) {}

    std::uint64_t bits() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi], inclusive.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return lo + static_cast<std::uint64_t>(uniform() * static_cast<double>(hi - lo + 1));
    }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    /// Child stream with decorrelated seed (splitmix64 of the label).
    Rng fork(std::uint64_t label) const {
        std::uint64_t z = base_ ^ (label + 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return Rng(z ^ (z >> 31));
    }

private:
    std::mt19937_64 gen_;
    std::uint64_t base_;
};

}  // namespace taxonet
