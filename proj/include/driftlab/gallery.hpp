#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "driftlab/coefficients.hpp"
#include "driftlab/grid.hpp"

namespace driftlab {

using GalleryParams = std::map<std::string, double>;

namespace detail {

inline double param_or(const GalleryParams& p, const std::string& key,
                       double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

inline double torus_radius(const Grid& g, const std::array<double, 3>& p,
                           const std::array<double, 3>& center) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
        double dx = g.signed_displacement(p[d], center[d]);
        r2 += dx * dx;
    }
    return std::sqrt(r2);
}

inline std::array<double, 3> center_of(const Grid& g, const GalleryParams& p) {
    double c = 0.5 * g.length;
    return {param_or(p, "x0", c), g.dim > 1 ? param_or(p, "y0", c) : 0.0,
            g.dim > 2 ? param_or(p, "z0", c) : 0.0};
}

}  // namespace detail

/// b^{12}(x) = eps * log(max(|x - x0|, h) / L), the resolution-independent
/// BMO drift: its sup-norm grows like log(1/h) while the oscillation does
/// not. The singularity is cut at one cell.
inline ScalarField log_vortex_component(const Grid& g, double eps,
                                        const std::array<double, 3>& center) {
    ScalarField f(g);
    for (std::size_t c = 0; c < f.size(); ++c) {
        double r = detail::torus_radius(g, g.position(c), center);
        f[c] = eps * std::log(std::max(r, g.spacing) / g.length);
    }
    return f;
}

/// Coefficient families used across the experiments. Every field is
/// uniformly elliptic with the lambda it declares; skew parts are exact
/// by construction.
inline CoefficientField gallery_field(const std::string& name,
                                      const GalleryParams& params,
                                      const Grid& grid,
                                      std::vector<double> time_grid = {}) {
    using detail::param_or;
    const int n = grid.dim;
    const double two_pi = 2.0 * std::numbers::pi;

    auto with_skew12 = [&](const ScalarField& psi) {
        MatrixFieldFrame frame = MatrixFieldFrame::identity(grid);
        for (std::size_t c = 0; c < grid.cell_count(); ++c) {
            frame.at(c, 0, 1) = psi[c];
            frame.at(c, 1, 0) = -psi[c];
        }
        return frame;
    };

    if (name == "identity") {
        return CoefficientField::stationary(MatrixFieldFrame::identity(grid),
                                            1.0, name);
    }

    if (name == "anisotropic") {
        // diagonal a = diag(mu_1, ..., mu_n); lambda = min(mu, 1/mu)
        std::array<double, 3> mu{param_or(params, "mu1", 2.0),
                                 param_or(params, "mu2", 0.5),
                                 param_or(params, "mu3", 1.0)};
        double lambda = 1.0;
        for (int d = 0; d < n; ++d) {
            if (!(mu[d] > 0.0))
                throw std::invalid_argument(
                    "gallery anisotropic: axis multiplier must be positive");
            lambda = std::min({lambda, mu[d], 1.0 / mu[d]});
        }
        MatrixFieldFrame frame(grid);
        for (std::size_t c = 0; c < grid.cell_count(); ++c)
            for (int d = 0; d < n; ++d) frame.at(c, d, d) = mu[d];
        return CoefficientField::stationary(std::move(frame), lambda, name);
    }

    if (name == "smooth_skew") {
        if (n == 1)
            throw std::invalid_argument("gallery smooth_skew: needs n >= 2");
        double amp = param_or(params, "amplitude", 1.0);
        if (n == 2) {
            ScalarField psi = ScalarField::sample(grid, [&](const auto& p) {
                return amp * std::sin(two_pi * p[0] / grid.length) *
                       std::cos(two_pi * p[1] / grid.length);
            });
            return CoefficientField::stationary(with_skew12(psi), 1.0, name);
        }
        // n = 3: Kronecker construction b^{ij} = eps^{ijk} w_k from a smooth
        // vector potential w, so the induced drift is divergence-free.
        MatrixFieldFrame frame = MatrixFieldFrame::identity(grid);
        for (std::size_t c = 0; c < grid.cell_count(); ++c) {
            auto p = grid.position(c);
            double w0 = amp * std::sin(two_pi * p[1] / grid.length);
            double w1 = amp * std::sin(two_pi * p[2] / grid.length);
            double w2 = amp * std::sin(two_pi * p[0] / grid.length);
            frame.at(c, 1, 2) = w0;
            frame.at(c, 2, 1) = -w0;
            frame.at(c, 2, 0) = w1;
            frame.at(c, 0, 2) = -w1;
            frame.at(c, 0, 1) = w2;
            frame.at(c, 1, 0) = -w2;
        }
        return CoefficientField::stationary(std::move(frame), 1.0, name);
    }

    if (name == "log_vortex") {
        if (n == 1)
            throw std::invalid_argument(
                "gallery log_vortex: skew part impossible for n = 1");
        double eps = param_or(params, "eps", 0.5);
        ScalarField b12 =
            log_vortex_component(grid, eps, detail::center_of(grid, params));
        return CoefficientField::stationary(with_skew12(b12), 1.0, name);
    }

    if (name == "stream_function") {
        if (n != 2)
            throw std::invalid_argument("gallery stream_function: needs n = 2");
        double amp = param_or(params, "amplitude", 1.0);
        ScalarField psi = ScalarField::sample(grid, [&](const auto& p) {
            return amp * std::sin(two_pi * p[0] / grid.length) *
                   std::sin(two_pi * p[1] / grid.length);
        });
        return CoefficientField::stationary(with_skew12(psi), 1.0, name);
    }

    if (name == "time_oscillating") {
        if (n == 1)
            throw std::invalid_argument("gallery time_oscillating: needs n >= 2");
        double amp = param_or(params, "amplitude", 1.0);
        double period = param_or(params, "period", 1.0);
        ScalarField psi = ScalarField::sample(grid, [&](const auto& p) {
            return std::sin(two_pi * p[0] / grid.length) *
                   std::cos(two_pi * p[1] / grid.length);
        });
        auto envelope = [amp, period, two_pi](double t) {
            return amp * 0.5 * (1.0 + std::sin(two_pi * t / period));
        };
        if (time_grid.empty()) {
            time_grid.resize(33);
            for (std::size_t k = 0; k < time_grid.size(); ++k)
                time_grid[k] = period * double(k) / double(time_grid.size() - 1);
        }
        auto sampler = [grid, psi, envelope](double t) {
            double a = envelope(t);
            MatrixFieldFrame frame = MatrixFieldFrame::identity(grid);
            for (std::size_t c = 0; c < grid.cell_count(); ++c) {
                frame.at(c, 0, 1) = a * psi[c];
                frame.at(c, 1, 0) = -a * psi[c];
            }
            return frame;
        };
        return CoefficientField::time_dependent(grid, 1.0, sampler,
                                                std::move(time_grid), name);
    }

    throw std::invalid_argument("gallery_field: unknown family '" + name + "'");
}

/// Drift induced by the skew part, u_j = sum_i D_i b^{ij} with central
/// differences; its discrete divergence vanishes identically because the
/// central differences commute and b is skew.
inline std::vector<ScalarField> induced_drift(const MatrixFieldFrame& frame) {
    const Grid& g = frame.grid;
    std::vector<ScalarField> u(g.dim, ScalarField(g));
    for (int j = 0; j < g.dim; ++j) {
        for (int i = 0; i < g.dim; ++i) {
            if (i == j) continue;
            const double inv_2h = 0.5 / g.spacing;
            for (std::size_t c = 0; c < g.cell_count(); ++c) {
                double fwd = frame.skew(g.neighbor(c, i, +1), i, j);
                double bwd = frame.skew(g.neighbor(c, i, -1), i, j);
                u[j][c] += (fwd - bwd) * inv_2h;
            }
        }
    }
    return u;
}

/// Central-difference divergence of a cell-centered vector field.
inline ScalarField central_divergence(const std::vector<ScalarField>& u) {
    const Grid& g = u.at(0).grid;
    ScalarField div(g);
    for (int d = 0; d < g.dim; ++d) {
        ScalarField dd = central_difference(u[d], d);
        for (std::size_t c = 0; c < div.size(); ++c) div[c] += dd[c];
    }
    return div;
}

}  // namespace driftlab
