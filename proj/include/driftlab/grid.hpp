#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace driftlab {

/// Periodic uniform lattice on the torus [0,L)^n. Cell centers sit at
/// x_i = i*h, so index arithmetic wraps and h*N = L exactly.
struct Grid {
    int dim = 1;
    int cells_per_axis = 4;
    double length = 1.0;
    double spacing = 0.25;

    Grid() = default;
    Grid(int dim_, int cells, double length_)
        : dim(dim_), cells_per_axis(cells), length(length_),
          spacing(length_ / cells) {
        if (dim < 1 || dim > 3)
            throw std::invalid_argument("Grid: dim must be 1, 2 or 3");
        if (cells < 4)
            throw std::invalid_argument("Grid: cells_per_axis must be >= 4");
        if (!(length > 0.0))
            throw std::invalid_argument("Grid: length must be positive");
    }

    std::size_t cell_count() const {
        std::size_t n = 1;
        for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(cells_per_axis);
        return n;
    }

    int wrap(int i) const {
        int n = cells_per_axis;
        i %= n;
        return i < 0 ? i + n : i;
    }

    std::size_t linear(const std::array<int, 3>& idx) const {
        std::size_t lin = 0;
        for (int d = dim - 1; d >= 0; --d)
            lin = lin * cells_per_axis + static_cast<std::size_t>(wrap(idx[d]));
        return lin;
    }

    std::array<int, 3> tuple(std::size_t lin) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int d = 0; d < dim; ++d) {
            idx[d] = static_cast<int>(lin % cells_per_axis);
            lin /= cells_per_axis;
        }
        return idx;
    }

    /// Neighbor cell shifted by `step` cells along `axis`, with wrap.
    std::size_t neighbor(std::size_t lin, int axis, int step) const {
        std::array<int, 3> idx = tuple(lin);
        idx[axis] = wrap(idx[axis] + step);
        return linear(idx);
    }

    double coord(int i) const { return i * spacing; }

    std::array<double, 3> position(std::size_t lin) const {
        auto idx = tuple(lin);
        return {coord(idx[0]), dim > 1 ? coord(idx[1]) : 0.0,
                dim > 2 ? coord(idx[2]) : 0.0};
    }

    /// Signed displacement a-b along one axis through the shorter way
    /// around the torus, in length units; lies in [-L/2, L/2).
    double signed_displacement(double a, double b) const {
        double d = std::fmod(a - b, length);
        if (d < -0.5 * length) d += length;
        if (d >= 0.5 * length) d -= length;
        return d;
    }

    /// Euclidean torus-metric distance between two cell centers.
    double torus_distance(std::size_t c0, std::size_t c1) const {
        auto a = tuple(c0);
        auto b = tuple(c1);
        double s = 0.0;
        for (int d = 0; d < dim; ++d) {
            int di = std::abs(a[d] - b[d]);
            di = std::min(di, cells_per_axis - di);
            double x = di * spacing;
            s += x * x;
        }
        return std::sqrt(s);
    }

    bool operator==(const Grid& o) const {
        return dim == o.dim && cells_per_axis == o.cells_per_axis &&
               length == o.length;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

/// Cell-centered samples of a scalar function on a Grid.
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(g.cell_count(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    template <typename Fn>
    static ScalarField sample(const Grid& g, Fn&& fn) {
        ScalarField f(g);
        for (std::size_t c = 0; c < f.size(); ++c) {
            auto p = g.position(c);
            f.values[c] = fn(p);
        }
        return f;
    }
};

/// One real value per cell face and axis; face (c, axis i) is the face
/// between cell c and its +e_i neighbor, so each axis carries N^n faces.
struct FaceFluxField {
    Grid grid;
    std::array<std::vector<double>, 3> axis_values;

    FaceFluxField() = default;
    explicit FaceFluxField(const Grid& g) : grid(g) {
        for (int d = 0; d < g.dim; ++d)
            axis_values[d].assign(g.cell_count(), 0.0);
    }

    std::vector<double>& axis(int d) { return axis_values[d]; }
    const std::vector<double>& axis(int d) const { return axis_values[d]; }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (a != b)
        throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

/// h^n * sum of cell values; exact for cell-constant fields.
inline double integrate(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    double hn = 1.0;
    for (int d = 0; d < f.grid.dim; ++d) hn *= f.grid.spacing;
    return hn * s;
}

inline double cell_volume(const Grid& g) {
    double hn = 1.0;
    for (int d = 0; d < g.dim; ++d) hn *= g.spacing;
    return hn;
}

/// Face-centered forward differences (f(c+e_i) - f(c)) / h per axis.
inline FaceFluxField discrete_gradient(const ScalarField& f) {
    const Grid& g = f.grid;
    FaceFluxField out(g);
    const double inv_h = 1.0 / g.spacing;
    for (int d = 0; d < g.dim; ++d) {
        auto& face = out.axis(d);
        for (std::size_t c = 0; c < f.size(); ++c)
            face[c] = (f[g.neighbor(c, d, +1)] - f[c]) * inv_h;
    }
    return out;
}

/// Conservative divergence: cell value sum_i (F_i(c) - F_i(c-e_i)) / h.
/// Telescopes to zero total mass on the torus.
inline ScalarField flux_divergence(const FaceFluxField& F) {
    const Grid& g = F.grid;
    ScalarField out(g);
    const double inv_h = 1.0 / g.spacing;
    for (int d = 0; d < g.dim; ++d) {
        const auto& face = F.axis(d);
        for (std::size_t c = 0; c < out.size(); ++c)
            out[c] += (face[c] - face[g.neighbor(c, d, -1)]) * inv_h;
    }
    return out;
}

/// Central difference (f(c+e_i) - f(c-e_i)) / (2h), cell-centered.
inline ScalarField central_difference(const ScalarField& f, int axis) {
    const Grid& g = f.grid;
    ScalarField out(g);
    const double inv_2h = 0.5 / g.spacing;
    for (std::size_t c = 0; c < f.size(); ++c)
        out[c] = (f[g.neighbor(c, axis, +1)] - f[g.neighbor(c, axis, -1)]) * inv_2h;
    return out;
}

struct FieldNorms {
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double h1_seminorm = 0.0;
};

inline FieldNorms norms(const ScalarField& f) {
    FieldNorms r;
    double s1 = 0.0, s2 = 0.0, si = 0.0;
    for (double v : f.values) {
        s1 += std::abs(v);
        s2 += v * v;
        si = std::max(si, std::abs(v));
    }
    const double hn = cell_volume(f.grid);
    r.l1 = hn * s1;
    r.l2 = std::sqrt(hn * s2);
    r.linf = si;
    FaceFluxField grad = discrete_gradient(f);
    double sg = 0.0;
    for (int d = 0; d < f.grid.dim; ++d)
        for (double v : grad.axis(d)) sg += v * v;
    r.h1_seminorm = std::sqrt(hn * sg);
    return r;
}

inline double l2_norm(const ScalarField& f) {
    double s2 = 0.0;
    for (double v : f.values) s2 += v * v;
    return std::sqrt(cell_volume(f.grid) * s2);
}

inline double linf_norm(const ScalarField& f) {
    double si = 0.0;
    for (double v : f.values) si = std::max(si, std::abs(v));
    return si;
}

inline double l1_distance(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "l1_distance");
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += std::abs(a[c] - b[c]);
    return cell_volume(a.grid) * s;
}

inline double inner_product(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "inner_product");
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
    return cell_volume(a.grid) * s;
}

inline bool all_finite(const ScalarField& f) {
    for (double v : f.values)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace driftlab
