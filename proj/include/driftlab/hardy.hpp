#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "driftlab/bmo.hpp"
#include "driftlab/coefficients.hpp"
#include "driftlab/grid.hpp"

namespace driftlab {

/// Grand-maximal based Hardy norm estimate. Non-decreasing in the scale
/// family; zero iff the field vanishes.
struct HardyEstimate {
    double value = 0.0;
    std::vector<double> scales;
    bool non_hardy = false;  // zero-mean precondition failed
    double mean = 0.0;
};

namespace detail {

struct BumpKernel {
    std::vector<std::array<int, 3>> offsets;
    std::vector<double> weights;  // sum to 1
};

/// Normalized polynomial bump (1 - |x/t|^2)^2 restricted to |x| < t.
inline BumpKernel bump_kernel(const Grid& g, double t) {
    BumpKernel k;
    k.offsets = ball_offsets(g, t * (1.0 - 1e-12));
    k.weights.resize(k.offsets.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < k.offsets.size(); ++i) {
        double r2 = 0.0;
        for (int d = 0; d < g.dim; ++d)
            r2 += double(k.offsets[i][d]) * k.offsets[i][d] * g.spacing * g.spacing;
        double s = 1.0 - r2 / (t * t);
        k.weights[i] = s > 0.0 ? s * s : 0.0;
        sum += k.weights[i];
    }
    for (double& w : k.weights) w /= sum;
    return k;
}

inline ScalarField convolve(const ScalarField& f, const BumpKernel& k) {
    const Grid& g = f.grid;
    const int N = g.cells_per_axis;
    std::vector<int> wrapl(3 * N);
    for (int i = 0; i < 3 * N; ++i) wrapl[i] = (i % N + N) % N;
    const int* wt = wrapl.data() + N;
    ScalarField out(g);
    if (g.dim == 1) {
        for (int i = 0; i < N; ++i) {
            double s = 0.0;
            for (std::size_t q = 0; q < k.offsets.size(); ++q)
                s += k.weights[q] * f[std::size_t(wt[i + k.offsets[q][0]])];
            out[std::size_t(i)] = s;
        }
    } else if (g.dim == 2) {
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) {
                double s = 0.0;
                for (std::size_t q = 0; q < k.offsets.size(); ++q)
                    s += k.weights[q] *
                         f[std::size_t(wt[i + k.offsets[q][0]]) +
                           std::size_t(N) * std::size_t(wt[j + k.offsets[q][1]])];
                out[std::size_t(i) + std::size_t(N) * std::size_t(j)] = s;
            }
    } else {
        for (std::size_t c = 0; c < out.size(); ++c) {
            auto idx = g.tuple(c);
            double s = 0.0;
            for (std::size_t q = 0; q < k.offsets.size(); ++q)
                s += k.weights[q] *
                     f[std::size_t(wt[idx[0] + k.offsets[q][0]]) +
                       std::size_t(N) *
                           (std::size_t(wt[idx[1] + k.offsets[q][1]]) +
                            std::size_t(N) * std::size_t(wt[idx[2] + k.offsets[q][2]]))];
            out[c] = s;
        }
    }
    return out;
}

}  // namespace detail

/// Dyadic scale family [2h, L/4]: below 2h the convolution is unresolved,
/// above L/4 the torus self-overlaps.
inline std::vector<double> maximal_scales(const Grid& g) {
    std::vector<double> scales;
    for (double t = 2.0 * g.spacing; t <= 0.25 * g.length * (1.0 + 1e-12); t *= 2.0)
        scales.push_back(t);
    return scales;
}

/// Pointwise sup over the dyadic scale family of |h_t * g|.
inline ScalarField grand_maximal(const ScalarField& g) {
    if (g.grid.cells_per_axis < 32)
        throw std::invalid_argument("grand_maximal: needs N >= 32");
    ScalarField out(g.grid);
    for (double t : maximal_scales(g.grid)) {
        ScalarField conv = detail::convolve(g, detail::bump_kernel(g.grid, t));
        for (std::size_t c = 0; c < out.size(); ++c)
            out[c] = std::max(out[c], std::abs(conv[c]));
    }
    return out;
}

/// L^1 norm of the grand maximal function. Fields with nonzero mean are
/// flagged (they are not Hardy candidates) but still measured.
inline HardyEstimate hardy_norm(const ScalarField& g) {
    HardyEstimate est;
    est.scales = maximal_scales(g.grid);
    est.mean = integrate(g) / std::pow(g.grid.length, g.grid.dim);
    double sup = linf_norm(g);
    est.non_hardy = std::abs(est.mean) > 1e-8 * (sup > 0.0 ? sup : 1.0);
    est.value = integrate(grand_maximal(g));
    return est;
}

struct PairingReport {
    double pairing = 0.0;
    double bound = 0.0;  // ||b||_BMO ||grad f||_2 ||grad g||_2 with C = 1
    double ratio = 0.0;
    double b_bmo = 0.0;
};

namespace detail {

inline void require_skew(const MatrixFieldFrame& b, const char* where) {
    const Grid& g = b.grid;
    double scale = 0.0, asym = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c)
        for (int i = 0; i < g.dim; ++i)
            for (int j = 0; j < g.dim; ++j) {
                scale = std::max(scale, std::abs(b.at(c, i, j)));
                asym = std::max(asym, std::abs(b.at(c, i, j) + b.at(c, j, i)));
            }
    if (asym > 1e-12 * std::max(scale, 1.0))
        throw std::invalid_argument(std::string(where) + ": frame is not skew");
}

}  // namespace detail

/// Discrete integral of <grad f, b grad g> with cell-centered central
/// gradients. The antisymmetrized cell form makes the two structural
/// cancellations exact: f = g gives zero cell-by-cell, and constant b
/// telescopes to zero through the commuting central differences.
inline PairingReport compensated_pairing(const ScalarField& f,
                                         const ScalarField& g,
                                         const MatrixFieldFrame& b) {
    require_same_grid(f.grid, g.grid, "compensated_pairing");
    require_same_grid(f.grid, b.grid, "compensated_pairing");
    detail::require_skew(b, "compensated_pairing");
    const Grid& grid = f.grid;
    const int n = grid.dim;

    std::vector<ScalarField> df, dg;
    for (int d = 0; d < n; ++d) {
        df.push_back(central_difference(f, d));
        dg.push_back(central_difference(g, d));
    }
    double s = 0.0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                s += b.skew(c, i, j) * (df[i][c] * dg[j][c] - df[j][c] * dg[i][c]);

    PairingReport rep;
    rep.pairing = cell_volume(grid) * s;
    double bmo2 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = bmo_norm(b.skew_component(i, j), 1).value;
            bmo2 += v * v;
        }
    rep.b_bmo = std::sqrt(bmo2);
    double gf = norms(f).h1_seminorm;
    double gg = norms(g).h1_seminorm;
    rep.bound = rep.b_bmo * gf * gg;
    rep.ratio = rep.bound > 0.0 ? std::abs(rep.pairing) / rep.bound : 0.0;
    return rep;
}

struct FgradfReport {
    double lhs = 0.0;  // Hardy norm of f * (xi . grad f)
    double rhs = 0.0;  // |xi| ||grad f||_2 ||f||_2
    double ratio = 0.0;
    bool non_hardy = false;
};

inline FgradfReport fgradf_hardy_check(const ScalarField& f,
                                       const std::array<double, 3>& xi) {
    const Grid& g = f.grid;
    ScalarField q(g);
    for (int d = 0; d < g.dim; ++d) {
        if (xi[d] == 0.0) continue;
        ScalarField dd = central_difference(f, d);
        for (std::size_t c = 0; c < q.size(); ++c) q[c] += xi[d] * f[c] * dd[c];
    }
    FgradfReport rep;
    double xin = 0.0;
    for (int d = 0; d < g.dim; ++d) xin += xi[d] * xi[d];
    xin = std::sqrt(xin);
    FieldNorms nf = norms(f);
    rep.rhs = xin * nf.h1_seminorm * nf.l2;
    HardyEstimate he = hardy_norm(q);
    rep.lhs = he.value;
    rep.non_hardy = he.non_hardy;
    rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
    return rep;
}

struct DivCurlReport {
    HardyEstimate hardy;
    double bound = 0.0;  // ||E||_2 ||B||_2
    double ratio = 0.0;
    double max_divergence = 0.0;
};

/// Hardy norm of E . grad(phi) for a divergence-free E and gradient field
/// B = central gradient of phi (the (p,q) = (2,2) pairing).
inline DivCurlReport div_curl_pairing(const std::vector<ScalarField>& E,
                                      const ScalarField& phi) {
    const Grid& g = phi.grid;
    if (static_cast<int>(E.size()) != g.dim)
        throw std::invalid_argument("div_curl_pairing: E has wrong arity");
    ScalarField div = central_divergence(E);
    DivCurlReport rep;
    rep.max_divergence = linf_norm(div);
    double escale = 0.0;
    for (const auto& e : E) escale = std::max(escale, linf_norm(e));
    if (rep.max_divergence > 1e-8 * std::max(escale / g.spacing, 1.0))
        throw std::invalid_argument("div_curl_pairing: E is not divergence-free");

    ScalarField dot(g);
    double e2 = 0.0, b2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
        ScalarField bd = central_difference(phi, d);
        for (std::size_t c = 0; c < dot.size(); ++c) dot[c] += E[d][c] * bd[c];
        for (std::size_t c = 0; c < dot.size(); ++c) {
            e2 += E[d][c] * E[d][c];
            b2 += bd[c] * bd[c];
        }
    }
    const double hn = cell_volume(g);
    rep.hardy = hardy_norm(dot);
    rep.bound = std::sqrt(hn * e2) * std::sqrt(hn * b2);
    rep.ratio = rep.bound > 0.0 ? rep.hardy.value / rep.bound : 0.0;
    return rep;
}

}  // namespace driftlab
