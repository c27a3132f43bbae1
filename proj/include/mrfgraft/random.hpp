#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace mrfgraft {

// Seeded generator with distribution code written out by hand. The standard
// <random> distributions are implementation-defined, so using them would make
// generated files differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound). Lemire's nearly-divisionless method.
    std::uint64_t uniform_index(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_index: empty range");
        unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(engine_()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Marsaglia polar method; the spare deviate is cached.
    double normal(double mean = 0.0, double sigma = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sigma * spare_;
        }
        double u = 0.0, v = 0.0, s = 0.0;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        has_spare_ = true;
        return mean + sigma * u * factor;
    }

    // Draw an index from an unnormalized nonnegative weight vector.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double target = uniform01() * total;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            target -= weights[k];
            if (target < 0.0) return k;
        }
        // rounding can leave target at zero; pick the last positive entry
        for (std::size_t k = weights.size(); k-- > 0;)
            if (weights[k] > 0.0) return k;
        return weights.size() - 1;
    }

    template <typename It>
    void shuffle(It first, It last) {
        const auto count = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t k = count; k > 1; --k) {
            const auto j = uniform_index(k);
            std::swap(first[k - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mrfgraft
