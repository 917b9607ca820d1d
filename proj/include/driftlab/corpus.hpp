#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "driftlab/grid.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

/// Random band-limited field: sum of Fourier modes |k| <= kmax with
/// normal amplitudes and a mild spectral decay. Deterministic in
/// (seed, stream).
inline ScalarField random_smooth_field(const Grid& g, std::uint64_t seed,
                                       std::uint64_t stream, int kmax = 4) {
    CounterRng rng(seed, stream);
    struct Mode {
        std::array<int, 3> k;
        double amp, phase;
    };
    std::vector<Mode> modes;
    std::array<int, 3> k{0, 0, 0};
    auto push = [&](std::array<int, 3> kk) {
        double k2 = 0.0;
        for (int d = 0; d < g.dim; ++d) k2 += double(kk[d]) * kk[d];
        if (k2 == 0.0) return;
        double amp = rng.normal() / (1.0 + k2);
        double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        modes.push_back({kk, amp, phase});
    };
    for (k[0] = 0; k[0] <= kmax; ++k[0]) {
        if (g.dim == 1) {
            push(k);
            continue;
        }
        for (k[1] = -kmax; k[1] <= kmax; ++k[1]) {
            if (g.dim == 2) {
                push(k);
                continue;
            }
            for (k[2] = -kmax; k[2] <= kmax; ++k[2]) push(k);
        }
    }
    const double w = 2.0 * std::numbers::pi / g.length;
    ScalarField f(g);
    for (std::size_t c = 0; c < f.size(); ++c) {
        auto p = g.position(c);
        double v = 0.0;
        for (const Mode& m : modes) {
            double arg = m.phase;
            for (int d = 0; d < g.dim; ++d) arg += w * m.k[d] * p[d];
            v += m.amp * std::cos(arg);
        }
        f[c] = v;
    }
    return f;
}

/// Same family shifted to be nonnegative (for positive-data experiments).
inline ScalarField random_nonnegative_field(const Grid& g, std::uint64_t seed,
                                            std::uint64_t stream, int kmax = 4) {
    ScalarField f = random_smooth_field(g, seed, stream, kmax);
    double lo = f[0];
    for (double v : f.values) lo = std::min(lo, v);
    for (double& v : f.values) v += (0.1 - lo);
    return f;
}

/// Compactly supported polynomial bump of unit height centered at `center`.
inline ScalarField bump_field(const Grid& g, const std::array<double, 3>& center,
                              double radius) {
    ScalarField f(g);
    for (std::size_t c = 0; c < f.size(); ++c) {
        auto p = g.position(c);
        double r2 = 0.0;
        for (int d = 0; d < g.dim; ++d) {
            double dx = g.signed_displacement(p[d], center[d]);
            r2 += dx * dx;
        }
        double s = r2 / (radius * radius);
        f[c] = s < 1.0 ? (1.0 - s) * (1.0 - s) : 0.0;
    }
    return f;
}

}  // namespace driftlab
