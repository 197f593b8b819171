#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace parreg {

// Seeded uniform draws with a fixed mantissa mapping so that outputs are
// bit-identical across platforms and standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    std::uint64_t integer(std::uint64_t n) { return gen_() % n; }

    std::vector<double> uniform_vector(std::size_t count, double lo, double hi) {
        std::vector<double> v(count);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace parreg
