#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftlab/grid.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

/// Cell-centered n x n coefficient matrix A = a + b at a fixed time,
/// stored row-major per cell. a = (A+A^T)/2, b = (A-A^T)/2.
struct MatrixFieldFrame {
    Grid grid;
    std::vector<double> entries;  // cell * dim*dim + i*dim + j

    MatrixFieldFrame() = default;
    explicit MatrixFieldFrame(const Grid& g)
        : grid(g), entries(g.cell_count() * g.dim * g.dim, 0.0) {}

    double& at(std::size_t cell, int i, int j) {
        return entries[cell * grid.dim * grid.dim + i * grid.dim + j];
    }
    double at(std::size_t cell, int i, int j) const {
        return entries[cell * grid.dim * grid.dim + i * grid.dim + j];
    }

    double sym(std::size_t cell, int i, int j) const {
        return 0.5 * (at(cell, i, j) + at(cell, j, i));
    }
    double skew(std::size_t cell, int i, int j) const {
        return 0.5 * (at(cell, i, j) - at(cell, j, i));
    }

    /// One skew component b^{ij} as a scalar field (i < j).
    ScalarField skew_component(int i, int j) const {
        ScalarField f(grid);
        for (std::size_t c = 0; c < f.size(); ++c) f[c] = skew(c, i, j);
        return f;
    }

    double max_abs_skew() const {
        double m = 0.0;
        for (std::size_t c = 0; c < grid.cell_count(); ++c)
            for (int i = 0; i < grid.dim; ++i)
                for (int j = i + 1; j < grid.dim; ++j)
                    m = std::max(m, std::abs(skew(c, i, j)));
        return m;
    }

    static MatrixFieldFrame identity(const Grid& g) {
        MatrixFieldFrame f(g);
        for (std::size_t c = 0; c < g.cell_count(); ++c)
            for (int i = 0; i < g.dim; ++i) f.at(c, i, i) = 1.0;
        return f;
    }
};

/// Checks lambda |xi|^2 <= xi^T a xi <= |xi|^2 / lambda on the axis basis
/// and a handful of deterministic random probes per cell.
inline void validate_ellipticity(const MatrixFieldFrame& frame, double lambda,
                                 int random_probes = 4) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("ellipticity: lambda must be positive");
    const Grid& g = frame.grid;
    const int n = g.dim;
    CounterRng rng(0x9d5ULL, 0);
    std::vector<std::array<double, 3>> probes;
    for (int i = 0; i < n; ++i) {
        std::array<double, 3> e{0, 0, 0};
        e[i] = 1.0;
        probes.push_back(e);
    }
    for (int p = 0; p < random_probes; ++p) {
        std::array<double, 3> v{0, 0, 0};
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            v[i] = rng.normal();
            s += v[i] * v[i];
        }
        s = std::sqrt(s);
        if (s == 0.0) continue;
        for (int i = 0; i < n; ++i) v[i] /= s;
        probes.push_back(v);
    }
    const double tol = 1e-12;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        for (const auto& xi : probes) {
            double q = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    q += xi[i] * frame.sym(c, i, j) * xi[j];
            if (q < lambda - tol || q > 1.0 / lambda + tol)
                throw std::invalid_argument(
                    "ellipticity: symmetric part violates lambda bounds at cell " +
                    std::to_string(c) + " (q=" + std::to_string(q) + ")");
        }
        if (!std::isfinite(frame.at(c, 0, 0)))
            throw std::invalid_argument("ellipticity: non-finite entry");
    }
}

/// Time-indexed coefficient family A(x,t) with ellipticity constant lambda.
/// Stationary fields hold one frame; time-dependent ones carry a sampler
/// evaluated at whatever times the solver asks for (half-steps).
class CoefficientField {
  public:
    CoefficientField() = default;

    static CoefficientField stationary(MatrixFieldFrame frame, double lambda,
                                       std::string name = "") {
        CoefficientField f;
        f.grid_ = frame.grid;
        f.lambda_ = lambda;
        f.base_ = std::move(frame);
        f.name_ = std::move(name);
        f.time_grid_ = {0.0};
        return f;
    }

    static CoefficientField time_dependent(
        Grid grid, double lambda,
        std::function<MatrixFieldFrame(double)> sampler,
        std::vector<double> time_grid, std::string name = "") {
        CoefficientField f;
        f.grid_ = grid;
        f.lambda_ = lambda;
        f.sampler_ = std::move(sampler);
        f.time_grid_ = std::move(time_grid);
        f.name_ = std::move(name);
        return f;
    }

    bool stationary_field() const { return !sampler_; }
    const Grid& grid() const { return grid_; }
    double lambda() const { return lambda_; }
    const std::string& name() const { return name_; }
    const std::vector<double>& time_grid() const { return time_grid_; }

    MatrixFieldFrame frame_at(double t) const {
        if (!sampler_) return base_;
        return sampler_(t);
    }

    const MatrixFieldFrame& base_frame() const {
        if (sampler_)
            throw std::logic_error("base_frame: field is time-dependent");
        return base_;
    }

  private:
    Grid grid_;
    double lambda_ = 1.0;
    MatrixFieldFrame base_;
    std::function<MatrixFieldFrame(double)> sampler_;
    std::vector<double> time_grid_;
    std::string name_;
};

}  // namespace driftlab
