#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "driftlab/coefficients.hpp"
#include "driftlab/grid.hpp"

namespace driftlab {

/// Discrete divergence-form operator u -> div(A grad u) on the torus.
///
/// The diagonal of a goes through conservative face fluxes with
/// arithmetic face means; every off-diagonal entry (symmetric or skew)
/// goes through commuting central differences D_i(A^{ij} D_j u). This
/// keeps the three structural identities exact in exact arithmetic:
/// column sums vanish (mass), the skew part is L2-antisymmetric, and the
/// symmetric part is self-adjoint and negative semidefinite.
class StepOperator {
  public:
    StepOperator() = default;

    explicit StepOperator(const MatrixFieldFrame& frame) : grid_(frame.grid) {
        const Grid& g = grid_;
        const int n = g.dim;
        const std::size_t cells = g.cell_count();
        const double inv_h2 = 1.0 / (g.spacing * g.spacing);

        // stencil layout: self, +-axis pairs, then 4 corners per i<j pair
        stencil_.push_back({0, 0, 0});
        for (int d = 0; d < n; ++d) {
            std::array<int, 3> p{0, 0, 0};
            p[d] = 1;
            stencil_.push_back(p);
            p[d] = -1;
            stencil_.push_back(p);
        }
        corner_slot_.assign(12, -1);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int si : {+1, -1})
                    for (int sj : {+1, -1}) {
                        std::array<int, 3> p{0, 0, 0};
                        p[i] = si;
                        p[j] = sj;
                        corner_slot_[corner_key(i, j, si, sj)] =
                            static_cast<int>(stencil_.size());
                        stencil_.push_back(p);
                    }
        const int K = static_cast<int>(stencil_.size());

        neighbors_.resize(cells * K);
        for (std::size_t c = 0; c < cells; ++c) {
            auto idx = g.tuple(c);
            for (int k = 0; k < K; ++k) {
                std::array<int, 3> q{idx[0] + stencil_[k][0],
                                     idx[1] + stencil_[k][1],
                                     idx[2] + stencil_[k][2]};
                neighbors_[c * K + k] = static_cast<std::int32_t>(g.linear(q));
            }
        }

        coeff_.assign(cells * K, 0.0);
        skew_coeff_.assign(cells * K, 0.0);
        for (std::size_t c = 0; c < cells; ++c) {
            double* row = coeff_.data() + c * K;
            double* srow = skew_coeff_.data() + c * K;
            for (int i = 0; i < n; ++i) {
                std::size_t plus = neighbor_of(c, 1 + 2 * i);
                std::size_t minus = neighbor_of(c, 2 + 2 * i);
                double ap = 0.5 * (frame.sym(c, i, i) + frame.sym(plus, i, i));
                double am = 0.5 * (frame.sym(c, i, i) + frame.sym(minus, i, i));
                row[1 + 2 * i] += ap * inv_h2;
                row[2 + 2 * i] += am * inv_h2;
                row[0] -= (ap + am) * inv_h2;
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    std::size_t plus = neighbor_of(c, 1 + 2 * i);
                    std::size_t minus = neighbor_of(c, 2 + 2 * i);
                    double m_p = frame.at(plus, i, j);
                    double m_m = frame.at(minus, i, j);
                    double s_p = frame.skew(plus, i, j);
                    double s_m = frame.skew(minus, i, j);
                    // D_i(m D_j u): corners (si, sj) get si*sj*m(c+si e_i)/4h^2
                    add_corner(row, i, j, +1, +1, +0.25 * m_p * inv_h2);
                    add_corner(row, i, j, +1, -1, -0.25 * m_p * inv_h2);
                    add_corner(row, i, j, -1, +1, -0.25 * m_m * inv_h2);
                    add_corner(row, i, j, -1, -1, +0.25 * m_m * inv_h2);
                    add_corner(srow, i, j, +1, +1, +0.25 * s_p * inv_h2);
                    add_corner(srow, i, j, +1, -1, -0.25 * s_p * inv_h2);
                    add_corner(srow, i, j, -1, +1, -0.25 * s_m * inv_h2);
                    add_corner(srow, i, j, -1, -1, +0.25 * s_m * inv_h2);
                }
        }
    }

    const Grid& grid() const { return grid_; }
    int stencil_size() const { return static_cast<int>(stencil_.size()); }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        apply_coeff(coeff_, x, y);
    }
    void apply_skew(const std::vector<double>& x, std::vector<double>& y) const {
        apply_coeff(skew_coeff_, x, y);
    }

    double diagonal(std::size_t c) const {
        return coeff_[c * stencil_.size()];
    }

    /// h^n <u, Op u> computed through the assembled stencil.
    double quadratic_form(const std::vector<double>& u) const {
        std::vector<double> y(u.size());
        apply(u, y);
        double s = 0.0;
        for (std::size_t c = 0; c < u.size(); ++c) s += u[c] * y[c];
        return s * cell_volume(grid_);
    }

    double skew_form(const std::vector<double>& u) const {
        std::vector<double> y(u.size());
        apply_skew(u, y);
        double s = 0.0;
        for (std::size_t c = 0; c < u.size(); ++c) s += u[c] * y[c];
        return s * cell_volume(grid_);
    }

  private:
    static int corner_key(int i, int j, int si, int sj) {
        if (i > j) {
            std::swap(i, j);
            std::swap(si, sj);
        }
        int pair = (i == 0) ? (j == 1 ? 0 : 1) : 2;  // (0,1),(0,2),(1,2)
        return pair * 4 + (si > 0 ? 0 : 1) * 2 + (sj > 0 ? 0 : 1);
    }

    void add_corner(double* row, int i, int j, int si, int sj, double v) {
        row[corner_slot_[corner_key(i, j, si, sj)]] += v;
    }

    std::size_t neighbor_of(std::size_t c, int slot) const {
        return static_cast<std::size_t>(neighbors_[c * stencil_.size() + slot]);
    }

    void apply_coeff(const std::vector<double>& coeff,
                     const std::vector<double>& x, std::vector<double>& y) const {
        const std::size_t cells = grid_.cell_count();
        const int K = static_cast<int>(stencil_.size());
        y.resize(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            const double* row = coeff.data() + c * K;
            const std::int32_t* nb = neighbors_.data() + c * K;
            double s = 0.0;
            for (int k = 0; k < K; ++k) s += row[k] * x[std::size_t(nb[k])];
            y[c] = s;
        }
    }

    Grid grid_;
    std::vector<std::array<int, 3>> stencil_;
    std::vector<int> corner_slot_;
    std::vector<std::int32_t> neighbors_;
    std::vector<double> coeff_;
    std::vector<double> skew_coeff_;
};

inline StepOperator assemble_step_operator(const MatrixFieldFrame& frame) {
    return StepOperator(frame);
}

struct KrylovStats {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Preconditioned BiCGStab for the nonsymmetric step systems. Stops on
/// the true residual ||b - Sx|| <= tol ||b||; restarts on breakdown.
template <typename MatVec>
KrylovStats bicgstab(MatVec&& S, const std::vector<double>& b,
                     std::vector<double>& x, const std::vector<double>& inv_diag,
                     double tol, int max_iter) {
    const std::size_t n = b.size();
    KrylovStats stats;

    auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
        return s;
    };

    double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        stats.converged = true;
        return stats;
    }
    const double target = tol * bnorm;

    std::vector<double> r(n), rhat(n), v(n, 0.0), p(n, 0.0), phat(n), s(n),
        shat(n), t(n), tmp(n);
    S(x, tmp);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - tmp[i];

    for (int restart = 0; restart < 4; ++restart) {
        double rnorm = std::sqrt(dot(r, r));
        if (rnorm <= target) {
            stats.converged = true;
            stats.relative_residual = rnorm / bnorm;
            return stats;
        }
        rhat = r;
        double rho = 1.0, alpha = 1.0, omega = 1.0;
        std::fill(v.begin(), v.end(), 0.0);
        std::fill(p.begin(), p.end(), 0.0);

        while (stats.iterations < max_iter) {
            double rho_new = dot(rhat, r);
            if (std::abs(rho_new) < 1e-60) break;  // breakdown; restart
            double beta = (rho_new / rho) * (alpha / omega);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            for (std::size_t i = 0; i < n; ++i) phat[i] = inv_diag[i] * p[i];
            S(phat, v);
            double rhat_v = dot(rhat, v);
            if (std::abs(rhat_v) < 1e-60) break;
            alpha = rho_new / rhat_v;
            for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
            ++stats.iterations;
            if (std::sqrt(dot(s, s)) <= 0.1 * target) {
                for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
                S(x, tmp);
                for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
                double tr = std::sqrt(dot(r, r));
                if (tr <= target) {
                    stats.converged = true;
                    stats.relative_residual = tr / bnorm;
                    return stats;
                }
                break;  // true residual disagrees; restart cycle
            }
            for (std::size_t i = 0; i < n; ++i) shat[i] = inv_diag[i] * s[i];
            S(shat, t);
            double tt = dot(t, t);
            if (tt == 0.0) break;
            omega = dot(t, s) / tt;
            for (std::size_t i = 0; i < n; ++i)
                x[i] += alpha * phat[i] + omega * shat[i];
            for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
            rho = rho_new;
            double rn = std::sqrt(dot(r, r));
            if (rn <= target) {
                // recursive residual met the target; confirm with true one
                S(x, tmp);
                for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
                double tr = std::sqrt(dot(r, r));
                if (tr <= target) {
                    stats.converged = true;
                    stats.relative_residual = tr / bnorm;
                    return stats;
                }
            }
            if (std::abs(omega) < 1e-60) break;
        }
        if (stats.iterations >= max_iter) break;
        S(x, tmp);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
    }
    S(x, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
    stats.relative_residual = std::sqrt(dot(tmp, tmp)) / bnorm;
    stats.converged = stats.relative_residual <= tol;
    return stats;
}

}  // namespace driftlab
