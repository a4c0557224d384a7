#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace diffpath {

// Deterministic random source. All draws go through uniform() so that output
// streams are reproducible for a fixed seed independent of platform.
class rng {
public:
    explicit rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in the open interval (0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    // waiting time with survival exp(-rate * t)
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    // waiting time with survival exp(-rate * t^2 / 2)
    double rayleigh(double rate) { return std::sqrt(-2.0 * std::log(uniform()) / rate); }

    // waiting time with survival (t / delta)^-shape on (delta, inf)
    double pareto(double shape, double delta) {
        return delta * std::pow(uniform(), -1.0 / shape);
    }

    std::mt19937_64& engine() { return gen_; }

    // splitmix64 chain, for deriving independent substream seeds
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
        auto split = [](std::uint64_t x) {
            x += 0x9e3779b97f4a7c15ull;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
            return x ^ (x >> 31);
        };
        return split(split(split(a) ^ b) ^ c);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace diffpath
