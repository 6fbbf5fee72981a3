#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace codim1 {

// Deterministic normal sampler: explicit Box-Muller on top of mt19937_64 so
// streams do not depend on the standard library's distribution internals.
struct Rng {
    std::mt19937_64 gen;
    bool have_spare = false;
    double spare = 0;

    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double uniform() {  // [0, 1)
        return (double)(gen() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        double u1 = 0, u2 = 0;
        do {
            u1 = uniform();
        } while (u1 <= 0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.28318530717958647692 * u2;
        spare = r * std::sin(a);
        have_spare = true;
        return r * std::cos(a);
    }

    std::complex<double> cnormal() {
        double re = normal();
        double im = normal();
        return {re, im};
    }
};

}  // namespace codim1
