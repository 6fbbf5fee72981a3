#pragma once

#include <vector>

#include "codim1/errors.hpp"

namespace codim1 {

// Uniform staggered grid: n nodes offset half a step from the endpoints.
struct Grid1D {
    int n;
    double lo, hi;

    Grid1D(int n_, double lo_, double hi_) : n(n_), lo(lo_), hi(hi_) {
        if (n < 2 || !(hi > lo)) throw InvalidGrid("grid: need n >= 2 and hi > lo");
    }

    double h() const { return (hi - lo) / n; }
    double node(int j) const { return lo + (j + 0.5) * h(); }

    std::vector<double> nodes() const {
        std::vector<double> v(n);
        for (int j = 0; j < n; ++j) v[j] = node(j);
        return v;
    }
};

}  // namespace codim1
