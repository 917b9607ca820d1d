#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "driftlab/coefficients.hpp"
#include "driftlab/grid.hpp"

namespace driftlab {

/// Discrete surrogate of the BMO sup: maximum over a finite ball family.
/// Non-decreasing as the family grows, zero iff the field is constant.
struct BmoEstimate {
    double value = 0.0;
    int p = 1;
    std::vector<double> radii;
    std::string centers = "all cells";
};

namespace detail {

/// Integer offsets within torus distance <= r of a cell. Valid for
/// r < L/2 so the minimal image is unique.
inline std::vector<std::array<int, 3>> ball_offsets(const Grid& g, double r) {
    const int R = static_cast<int>(std::floor(r / g.spacing + 1e-12));
    std::vector<std::array<int, 3>> out;
    const double r2 = r * r * (1.0 + 1e-14);
    std::array<int, 3> o{0, 0, 0};
    const int lo1 = g.dim > 1 ? -R : 0, hi1 = g.dim > 1 ? R : 0;
    const int lo2 = g.dim > 2 ? -R : 0, hi2 = g.dim > 2 ? R : 0;
    for (o[0] = -R; o[0] <= R; ++o[0])
        for (o[1] = lo1; o[1] <= hi1; ++o[1])
            for (o[2] = lo2; o[2] <= hi2; ++o[2]) {
                double d2 = 0.0;
                for (int d = 0; d < g.dim; ++d)
                    d2 += double(o[d]) * o[d] * g.spacing * g.spacing;
                if (d2 <= r2) out.push_back(o);
            }
    return out;
}

/// Ball average around every center, one radius.
inline std::vector<double> ball_means(const ScalarField& f,
                                      const std::vector<std::array<int, 3>>& offs) {
    const Grid& g = f.grid;
    const int N = g.cells_per_axis;
    std::vector<int> wrapl(3 * N);
    for (int i = 0; i < 3 * N; ++i) wrapl[i] = (i % N + N) % N;
    const int* wt = wrapl.data() + N;

    std::vector<double> mean(f.size(), 0.0);
    const double inv = 1.0 / double(offs.size());
    if (g.dim == 1) {
        for (int i = 0; i < N; ++i) {
            double s = 0.0;
            for (const auto& o : offs) s += f[std::size_t(wt[i + o[0]])];
            mean[std::size_t(i)] = s * inv;
        }
    } else if (g.dim == 2) {
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) {
                double s = 0.0;
                for (const auto& o : offs)
                    s += f[std::size_t(wt[i + o[0]]) +
                           std::size_t(N) * std::size_t(wt[j + o[1]])];
                mean[std::size_t(i) + std::size_t(N) * std::size_t(j)] = s * inv;
            }
    } else {
        for (int k = 0; k < N; ++k)
            for (int j = 0; j < N; ++j)
                for (int i = 0; i < N; ++i) {
                    double s = 0.0;
                    for (const auto& o : offs)
                        s += f[std::size_t(wt[i + o[0]]) +
                               std::size_t(N) *
                                   (std::size_t(wt[j + o[1]]) +
                                    std::size_t(N) * std::size_t(wt[k + o[2]]))];
                    mean[std::size_t(i) +
                         std::size_t(N) * (std::size_t(j) + std::size_t(N) * std::size_t(k))] =
                        s * inv;
                }
    }
    return mean;
}

/// max over centers of the p-oscillation against the given ball means.
inline double max_oscillation(const ScalarField& f,
                              const std::vector<std::array<int, 3>>& offs,
                              const std::vector<double>& mean, int p) {
    const Grid& g = f.grid;
    const int N = g.cells_per_axis;
    std::vector<int> wrapl(3 * N);
    for (int i = 0; i < 3 * N; ++i) wrapl[i] = (i % N + N) % N;
    const int* wt = wrapl.data() + N;
    const double inv = 1.0 / double(offs.size());

    double best = 0.0;
    auto accumulate = [&](std::size_t center, auto&& value_at) {
        double m = mean[center];
        double s = 0.0;
        if (p == 1) {
            for (const auto& o : offs) s += std::abs(value_at(o) - m);
            s *= inv;
        } else {
            for (const auto& o : offs) {
                double d = value_at(o) - m;
                s += d * d;
            }
            s = std::sqrt(s * inv);
        }
        best = std::max(best, s);
    };
    if (g.dim == 1) {
        for (int i = 0; i < N; ++i)
            accumulate(std::size_t(i), [&](const std::array<int, 3>& o) {
                return f[std::size_t(wt[i + o[0]])];
            });
    } else if (g.dim == 2) {
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i)
                accumulate(std::size_t(i) + std::size_t(N) * std::size_t(j),
                           [&](const std::array<int, 3>& o) {
                               return f[std::size_t(wt[i + o[0]]) +
                                        std::size_t(N) * std::size_t(wt[j + o[1]])];
                           });
    } else {
        for (int k = 0; k < N; ++k)
            for (int j = 0; j < N; ++j)
                for (int i = 0; i < N; ++i)
                    accumulate(
                        std::size_t(i) +
                            std::size_t(N) *
                                (std::size_t(j) + std::size_t(N) * std::size_t(k)),
                        [&](const std::array<int, 3>& o) {
                            return f[std::size_t(wt[i + o[0]]) +
                                     std::size_t(N) *
                                         (std::size_t(wt[j + o[1]]) +
                                          std::size_t(N) * std::size_t(wt[k + o[2]]))];
                        });
    }
    return best;
}

}  // namespace detail

/// Dyadic radius family [2h, L/4] used by the estimator.
inline std::vector<double> dyadic_radii(const Grid& g) {
    std::vector<double> radii;
    for (double r = 2.0 * g.spacing; r <= 0.25 * g.length * (1.0 + 1e-12); r *= 2.0)
        radii.push_back(r);
    return radii;
}

/// BMO_p estimate over an explicit radius family (centers = all cells).
inline BmoEstimate bmo_norm_with_radii(const ScalarField& f, int p,
                                       const std::vector<double>& radii) {
    if (p != 1 && p != 2)
        throw std::invalid_argument("bmo_norm: p must be 1 or 2");
    if (radii.empty())
        throw std::invalid_argument("bmo_norm: empty radius family");
    BmoEstimate est;
    est.p = p;
    est.radii = radii;
    for (double r : radii) {
        auto offs = detail::ball_offsets(f.grid, r);
        auto mean = detail::ball_means(f, offs);
        est.value = std::max(est.value, detail::max_oscillation(f, offs, mean, p));
    }
    return est;
}

inline BmoEstimate bmo_norm(const ScalarField& f, int p = 1) {
    if (f.grid.cells_per_axis < 16)
        throw std::invalid_argument(
            "bmo_norm: grid too coarse for the dyadic radius family (N < 16)");
    return bmo_norm_with_radii(f, p, dyadic_radii(f.grid));
}

/// f minus its average over the ball B(0, r) centered at the origin cell.
inline ScalarField normalize_mean(const ScalarField& f, double ball_radius) {
    const Grid& g = f.grid;
    if (!(ball_radius > g.spacing) || !(ball_radius < 0.5 * g.length))
        throw std::invalid_argument("normalize_mean: radius must lie in (h, L/2)");
    auto offs = detail::ball_offsets(g, ball_radius);
    double s = 0.0;
    for (const auto& o : offs) s += f[g.linear({o[0], o[1], o[2]})];
    s /= double(offs.size());
    ScalarField out = f;
    for (double& v : out.values) v -= s;
    return out;
}

/// Scalar fields sampled on a uniform time grid t0 + k*dt.
struct TimeField {
    std::vector<ScalarField> frames;
    double t0 = 0.0;
    double dt = 1.0;
};

namespace detail {

inline std::size_t reflect_index(long k, std::size_t count) {
    if (count == 1) return 0;
    long n = static_cast<long>(count);
    while (k < 0 || k >= n) {
        if (k < 0) k = -k;
        if (k >= n) k = 2 * n - 2 - k;
    }
    return static_cast<std::size_t>(k);
}

}  // namespace detail

/// Space-time convolution against the polynomial bump pair (Phi_eps,
/// eta_eps): periodic in space, reflected at the ends of the time grid.
/// The discrete kernel has exactly unit mass, so constants and integrals
/// are preserved.
inline TimeField mollify(const TimeField& f, double epsilon) {
    if (f.frames.empty()) throw std::invalid_argument("mollify: empty input");
    const Grid& g = f.frames.front().grid;
    if (!(epsilon >= 2.0 * g.spacing) || !(epsilon <= g.length / 8.0))
        throw std::invalid_argument("mollify: epsilon must lie in [2h, L/8]");

    auto offs = detail::ball_offsets(g, epsilon * (1.0 - 1e-12));
    std::vector<double> w(offs.size());
    double wsum = 0.0;
    for (std::size_t k = 0; k < offs.size(); ++k) {
        double r2 = 0.0;
        for (int d = 0; d < g.dim; ++d)
            r2 += double(offs[k][d]) * offs[k][d] * g.spacing * g.spacing;
        double s = 1.0 - r2 / (epsilon * epsilon);
        w[k] = s > 0.0 ? s * s : 0.0;
        wsum += w[k];
    }
    for (double& v : w) v /= wsum;

    // time weights over frame offsets
    std::vector<double> tw;
    long S = 0;
    if (f.frames.size() > 1) {
        S = static_cast<long>(std::floor(epsilon / f.dt - 1e-12));
        tw.resize(2 * S + 1);
        double ts = 0.0;
        for (long s = -S; s <= S; ++s) {
            double x = (s * f.dt) / epsilon;
            double v = 1.0 - x * x;
            tw[std::size_t(s + S)] = v > 0.0 ? v * v : 0.0;
            ts += tw[std::size_t(s + S)];
        }
        for (double& v : tw) v /= ts;
    } else {
        tw = {1.0};
    }

    // spatial pass per frame
    std::vector<ScalarField> spatial;
    spatial.reserve(f.frames.size());
    for (const ScalarField& frame : f.frames) {
        require_same_grid(frame.grid, g, "mollify");
        ScalarField out(g);
        for (std::size_t c = 0; c < out.size(); ++c) {
            auto idx = g.tuple(c);
            double s = 0.0;
            for (std::size_t k = 0; k < offs.size(); ++k) {
                std::array<int, 3> q{idx[0] + offs[k][0], idx[1] + offs[k][1],
                                     idx[2] + offs[k][2]};
                s += w[k] * frame[g.linear(q)];
            }
            out[c] = s;
        }
        spatial.push_back(std::move(out));
    }

    TimeField result;
    result.t0 = f.t0;
    result.dt = f.dt;
    result.frames.assign(f.frames.size(), ScalarField(g));
    for (std::size_t k = 0; k < spatial.size(); ++k) {
        ScalarField& out = result.frames[k];
        for (long s = -S; s <= S; ++s) {
            std::size_t src = detail::reflect_index(long(k) + s, spatial.size());
            double wv = tw[std::size_t(s + S)];
            for (std::size_t c = 0; c < out.size(); ++c)
                out[c] += wv * spatial[src][c];
        }
    }
    return result;
}

inline ScalarField mollify(const ScalarField& f, double epsilon) {
    TimeField tf;
    tf.frames = {f};
    return mollify(tf, epsilon).frames.front();
}

/// The compactly supported log truncations
///   U^(m)(x) = (-eps log|x| + m) ^ m v 0,
///   L^(m)(x) = ( eps log|x| - m) ^ 0 v (-m),
/// with |x| the torus distance to the origin cell. Both vanish for
/// |x| >= e^{m/eps} and their oscillation stays bounded uniformly in m.
inline std::pair<ScalarField, ScalarField> truncate_log(int m, double epsilon,
                                                        const Grid& grid) {
    if (m < 1) throw std::invalid_argument("truncate_log: m must be >= 1");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("truncate_log: epsilon must be positive");
    ScalarField upper(grid), lower(grid);
    const std::array<double, 3> origin{0.0, 0.0, 0.0};
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        double r = 0.0;
        auto p = grid.position(c);
        for (int d = 0; d < grid.dim; ++d) {
            double dx = grid.signed_displacement(p[d], origin[d]);
            r += dx * dx;
        }
        r = std::sqrt(r);
        double lg = std::log(std::max(r, 1e-300));
        upper[c] = std::clamp(-epsilon * lg + m, 0.0, double(m));
        lower[c] = std::clamp(epsilon * lg - m, -double(m), 0.0);
    }
    return {upper, lower};
}

/// Pointwise (min, max); satisfies min + max = f + g exactly.
inline std::pair<ScalarField, ScalarField> lattice_min_max(const ScalarField& f,
                                                           const ScalarField& g) {
    require_same_grid(f.grid, g.grid, "lattice_min_max");
    ScalarField lo(f.grid), hi(f.grid);
    for (std::size_t c = 0; c < f.size(); ++c) {
        lo[c] = std::min(f[c], g[c]);
        hi[c] = std::max(f[c], g[c]);
    }
    return {lo, hi};
}

/// sup over time samples of sqrt(sum_{i<j} ||b^{ij}||_BMO^2).
inline double linf_bmo_norm(const CoefficientField& b) {
    double best = 0.0;
    std::vector<double> times = b.time_grid();
    if (times.empty()) times = {0.0};
    for (double t : times) {
        MatrixFieldFrame frame = b.frame_at(t);
        double s = 0.0;
        for (int i = 0; i < frame.grid.dim; ++i)
            for (int j = i + 1; j < frame.grid.dim; ++j) {
                double v = bmo_norm(frame.skew_component(i, j), 1).value;
                s += v * v;
            }
        best = std::max(best, std::sqrt(s));
        if (b.stationary_field()) break;
    }
    return best;
}

}  // namespace driftlab
