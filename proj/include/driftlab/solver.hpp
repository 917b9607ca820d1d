#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftlab/bmo.hpp"
#include "driftlab/coefficients.hpp"
#include "driftlab/grid.hpp"
#include "driftlab/operators.hpp"

namespace driftlab {

/// Time stepping controls. theta = 1 is fully implicit (positivity and
/// monotone energy), theta = 1/2 trapezoidal (second order). Graded
/// stepping grows dt geometrically once past burn_in, capped by a
/// fraction of the elapsed time, and always lands exactly on requested
/// snapshot times.
struct SolveConfig {
    double dt = 0.0;  // base step; 0 selects h^2 * lambda / 4
    double T = 1.0;
    double theta = 1.0;
    double linear_tol = 1e-11;
    int max_iter = 4000;

    double dt_growth = 1.0;          // multiplicative growth per step
    double dt_frac_of_elapsed = 0.0; // cap dt <= frac * (t - tau)
    double burn_in = 0.0;            // keep dt = base and theta = 1 below this
    double theta_after_burn_in = -1.0;

    std::vector<double> snapshot_times;  // absolute times to record
    bool record_all_steps = false;

    double base_dt(const Grid& g, double lambda) const {
        return dt > 0.0 ? dt : g.spacing * g.spacing * lambda / 4.0;
    }

    void validate() const {
        if (!(T > 0.0)) throw std::invalid_argument("SolveConfig: T must be > 0");
        if (dt > T) throw std::invalid_argument("SolveConfig: dt must be <= T");
        if (theta < 0.5 || theta > 1.0)
            throw std::invalid_argument("SolveConfig: theta must lie in [1/2, 1]");
        if (!(linear_tol > 0.0))
            throw std::invalid_argument("SolveConfig: linear_tol must be > 0");
        if (max_iter < 1)
            throw std::invalid_argument("SolveConfig: max_iter must be >= 1");
    }
};

struct LedgerRow {
    double t = 0.0;
    double l2sq = 0.0;
    double dissipation = 0.0;    // h^n <grad u, a grad u> at the new state
    double skew_residual = 0.0;  // h^n <u, Op_b u>, measured via the stencil
    double mass = 0.0;
    double h1_seminorm = 0.0;
};

struct SolutionTrace {
    std::vector<double> times;
    std::vector<ScalarField> snapshots;
    std::vector<LedgerRow> ledger;
    ScalarField final_state;
    long total_linear_iterations = 0;

    const ScalarField& at_time(double t) const {
        for (std::size_t k = 0; k < times.size(); ++k)
            if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t)))
                return snapshots[k];
        throw std::invalid_argument("SolutionTrace: no snapshot at t=" +
                                    std::to_string(t));
    }
};

namespace detail {

struct PlannedStep {
    double t0 = 0.0;
    double dt = 0.0;
    double theta = 1.0;
    bool record_end = false;
};

/// Deterministic time grid from tau to tau+T honoring grading and
/// landing times.
inline std::vector<PlannedStep> plan_steps(const SolveConfig& cfg, double tau,
                                           double dt0) {
    std::vector<double> landings = cfg.snapshot_times;
    landings.push_back(tau + cfg.T);
    std::sort(landings.begin(), landings.end());
    landings.erase(std::unique(landings.begin(), landings.end(),
                               [](double a, double b) {
                                   return std::abs(a - b) < 1e-15;
                               }),
                   landings.end());
    for (double t : landings)
        if (t < tau - 1e-15 || t > tau + cfg.T + 1e-12)
            throw std::invalid_argument("plan_steps: snapshot time outside horizon");

    std::vector<PlannedStep> plan;
    double t = tau;
    double dt_prev = dt0;
    std::size_t next_landing = 0;
    while (next_landing < landings.size() && landings[next_landing] <= tau + 1e-15)
        ++next_landing;
    const double t_end = tau + cfg.T;
    while (t < t_end - 1e-13 * std::max(1.0, t_end)) {
        double elapsed = t - tau;
        double dt = dt0;
        bool past_burn_in = elapsed >= cfg.burn_in - 1e-15;
        if (past_burn_in && cfg.dt_growth > 1.0) {
            dt = dt_prev * cfg.dt_growth;
            if (cfg.dt_frac_of_elapsed > 0.0)
                dt = std::min(dt, cfg.dt_frac_of_elapsed * std::max(elapsed, dt0));
            dt = std::max(dt, dt0);
        }
        double limit = t_end;
        if (next_landing < landings.size())
            limit = std::min(limit, landings[next_landing]);
        bool lands = false;
        if (t + dt >= limit - 1e-13 * std::max(1.0, limit)) {
            dt = limit - t;
            lands = true;
        }
        PlannedStep step;
        step.t0 = t;
        step.dt = dt;
        step.theta = (past_burn_in && cfg.theta_after_burn_in >= 0.5)
                         ? cfg.theta_after_burn_in
                         : cfg.theta;
        step.record_end = lands;
        plan.push_back(step);
        t += dt;
        dt_prev = std::max(dt_prev, dt);
        if (lands && next_landing < landings.size() &&
            std::abs(t - landings[next_landing]) <= 1e-12 * std::max(1.0, t))
            ++next_landing;
    }
    return plan;
}

}  // namespace detail

/// Solves the resolvent system (I - theta dt Op) x = rhs; x carries the
/// initial guess on entry.
inline KrylovStats theta_solve(const StepOperator& op,
                               const std::vector<double>& rhs,
                               std::vector<double>& x, double dt, double theta,
                               double linear_tol, int max_iter) {
    const std::size_t n = rhs.size();
    std::vector<double> inv_diag(n);
    for (std::size_t i = 0; i < n; ++i)
        inv_diag[i] = 1.0 / (1.0 - theta * dt * op.diagonal(i));
    auto system = [&](const std::vector<double>& in, std::vector<double>& out) {
        op.apply(in, out);
        for (std::size_t i = 0; i < n; ++i) out[i] = in[i] - theta * dt * out[i];
    };
    KrylovStats stats = bicgstab(system, rhs, x, inv_diag, linear_tol, max_iter);
    if (!stats.converged)
        throw std::runtime_error(
            "theta_solve: linear solve failed to converge (iterations=" +
            std::to_string(stats.iterations) +
            ", residual=" + std::to_string(stats.relative_residual) + ")");
    return stats;
}

/// One theta-step: solves (I - theta dt Op) u+ = (I + (1-theta) dt Op) u.
/// Mass is conserved by the divergence form; the skew part contributes
/// nothing to the energy identity.
inline KrylovStats step(const StepOperator& op, std::vector<double>& u, double dt,
                        double theta, double linear_tol, int max_iter) {
    const std::size_t n = u.size();
    std::vector<double> rhs(n), opu(n);
    if (theta < 1.0) {
        op.apply(u, opu);
        const double w = (1.0 - theta) * dt;
        for (std::size_t i = 0; i < n; ++i) rhs[i] = u[i] + w * opu[i];
    } else {
        rhs = u;
    }
    return theta_solve(op, rhs, u, dt, theta, linear_tol, max_iter);
}

inline ScalarField step(const ScalarField& u, const MatrixFieldFrame& A_half,
                        double dt, double theta, const SolveConfig& cfg) {
    StepOperator op(A_half);
    ScalarField out = u;
    step(op, out.values, dt, theta, cfg.linear_tol, cfg.max_iter);
    return out;
}

namespace detail {

inline LedgerRow ledger_row(const StepOperator& op, const ScalarField& u,
                            double t) {
    LedgerRow row;
    row.t = t;
    const double hn = cell_volume(u.grid);
    double s2 = 0.0, s1 = 0.0;
    for (double v : u.values) {
        s2 += v * v;
        s1 += v;
    }
    row.l2sq = hn * s2;
    row.mass = hn * s1;
    double full = op.quadratic_form(u.values);
    row.skew_residual = op.skew_form(u.values);
    row.dissipation = -(full - row.skew_residual);
    row.h1_seminorm = norms(u).h1_seminorm;
    return row;
}

}  // namespace detail

/// Forward Cauchy evolution from time tau with initial data f.
inline SolutionTrace solve_cauchy(const ScalarField& f, const CoefficientField& A,
                                  double tau, const SolveConfig& cfg) {
    cfg.validate();
    require_same_grid(f.grid, A.grid(), "solve_cauchy");
    if (!all_finite(f)) throw std::invalid_argument("solve_cauchy: data not finite");
    const double dt0 = cfg.base_dt(f.grid, A.lambda());
    auto plan = detail::plan_steps(cfg, tau, dt0);

    SolutionTrace trace;
    ScalarField u = f;
    std::unique_ptr<StepOperator> op;
    if (A.stationary_field()) {
        MatrixFieldFrame frame = A.frame_at(tau);
        validate_ellipticity(frame, A.lambda());
        op = std::make_unique<StepOperator>(frame);
    }
    bool validated = !A.stationary_field() ? false : true;

    auto record = [&](double t) {
        trace.times.push_back(t);
        trace.snapshots.push_back(u);
    };
    if (!cfg.snapshot_times.empty() &&
        std::abs(cfg.snapshot_times.front() - tau) < 1e-15)
        record(tau);

    for (const auto& st : plan) {
        const StepOperator* cur = op.get();
        std::unique_ptr<StepOperator> local;
        if (!A.stationary_field()) {
            MatrixFieldFrame frame = A.frame_at(st.t0 + 0.5 * st.dt);
            if (!validated) {
                validate_ellipticity(frame, A.lambda());
                validated = true;
            }
            local = std::make_unique<StepOperator>(frame);
            cur = local.get();
        }
        KrylovStats stats =
            step(*cur, u.values, st.dt, st.theta, cfg.linear_tol, cfg.max_iter);
        trace.total_linear_iterations += stats.iterations;
        double t1 = st.t0 + st.dt;
        trace.ledger.push_back(detail::ledger_row(*cur, u, t1));
        if (st.record_end || cfg.record_all_steps) record(t1);
    }
    trace.final_state = u;
    return trace;
}

/// Adjoint evolution: integrates the transposed coefficients (a - b)
/// backward from T to tau as the exact discrete adjoint of the forward
/// plan, so <forward(f)(T), g> = <f, backward(g)(tau)> up to solver
/// tolerance when both use the same config.
inline SolutionTrace solve_backward(const ScalarField& g, const CoefficientField& A,
                                    double tau, const SolveConfig& cfg) {
    cfg.validate();
    require_same_grid(g.grid, A.grid(), "solve_backward");
    if (!all_finite(g)) throw std::invalid_argument("solve_backward: data not finite");
    const double dt0 = cfg.base_dt(g.grid, A.lambda());
    auto plan = detail::plan_steps(cfg, tau, dt0);

    auto transposed_frame = [&](double t) {
        MatrixFieldFrame frame = A.frame_at(t);
        MatrixFieldFrame out = frame;
        for (std::size_t c = 0; c < frame.grid.cell_count(); ++c)
            for (int i = 0; i < frame.grid.dim; ++i)
                for (int j = 0; j < frame.grid.dim; ++j)
                    out.at(c, i, j) = frame.at(c, j, i);
        return out;
    };

    SolutionTrace trace;
    ScalarField v = g;
    std::unique_ptr<StepOperator> op;
    if (A.stationary_field())
        op = std::make_unique<StepOperator>(transposed_frame(tau));

    const std::size_t n = v.size();
    std::vector<double> w(n), opw(n);
    // walk the forward plan in reverse; each forward step S = A^{-1} B
    // contributes S^T = B^T A^{-T}
    for (auto it = plan.rbegin(); it != plan.rend(); ++it) {
        const auto& st = *it;
        const StepOperator* cur = op.get();
        std::unique_ptr<StepOperator> local;
        if (!A.stationary_field()) {
            local = std::make_unique<StepOperator>(
                transposed_frame(st.t0 + 0.5 * st.dt));
            cur = local.get();
        }
        // forward step is S = A^{-1} B, so its adjoint applies B^T A^{-T}:
        // first w = (I - theta dt Op^T)^{-1} v, then multiply by B^T
        w = v.values;
        KrylovStats stats = theta_solve(*cur, v.values, w, st.dt, st.theta,
                                        cfg.linear_tol, cfg.max_iter);
        trace.total_linear_iterations += stats.iterations;
        if (st.theta < 1.0) {
            cur->apply(w, opw);
            const double c1 = (1.0 - st.theta) * st.dt;
            for (std::size_t i = 0; i < n; ++i) v.values[i] = w[i] + c1 * opw[i];
        } else {
            v.values = w;
        }
        trace.ledger.push_back(detail::ledger_row(*cur, v, st.t0));
        bool record = cfg.record_all_steps;
        for (double ts : cfg.snapshot_times)
            if (std::abs(ts - st.t0) <= 1e-12 * std::max(1.0, std::abs(ts)))
                record = true;
        if (record) {
            trace.times.push_back(st.t0);
            trace.snapshots.push_back(v);
        }
    }
    std::reverse(trace.times.begin(), trace.times.end());
    std::reverse(trace.snapshots.begin(), trace.snapshots.end());
    trace.final_state = v;
    return trace;
}

struct MollifiedGap {
    int m_coarse = 0;
    int m_fine = 0;
    double gap = 0.0;  // max over snapshots of ||u_m - u_m'||_2
};

/// Mollifies every coefficient component at scale eps_m = 2^{-m} L / 8
/// and reports successive solution gaps; a Cauchy-sequence diagnostic for
/// the approximation construction.
inline std::vector<MollifiedGap> mollified_convergence_check(
    const CoefficientField& A, const ScalarField& f, double tau,
    const SolveConfig& cfg, const std::vector<int>& m_list) {
    if (!A.stationary_field())
        throw std::invalid_argument(
            "mollified_convergence_check: stationary coefficients only");
    for (std::size_t k = 1; k < m_list.size(); ++k)
        if (m_list[k] <= m_list[k - 1])
            throw std::invalid_argument(
                "mollified_convergence_check: m_list must be increasing");

    const Grid& g = A.grid();
    std::vector<std::vector<ScalarField>> runs;
    for (int m : m_list) {
        double eps = std::pow(2.0, -m) * g.length / 8.0;
        MatrixFieldFrame frame = A.base_frame();
        MatrixFieldFrame smooth(g);
        for (int i = 0; i < g.dim; ++i)
            for (int j = 0; j < g.dim; ++j) {
                ScalarField comp(g);
                for (std::size_t c = 0; c < comp.size(); ++c)
                    comp[c] = frame.at(c, i, j);
                ScalarField mc = mollify(comp, eps);
                for (std::size_t c = 0; c < comp.size(); ++c)
                    smooth.at(c, i, j) = mc[c];
            }
        CoefficientField Am = CoefficientField::stationary(
            std::move(smooth), A.lambda(), A.name() + "_mollified");
        SolutionTrace tr = solve_cauchy(f, Am, tau, cfg);
        runs.push_back(tr.snapshots.empty()
                           ? std::vector<ScalarField>{tr.final_state}
                           : tr.snapshots);
    }
    std::vector<MollifiedGap> gaps;
    for (std::size_t k = 1; k < runs.size(); ++k) {
        MollifiedGap gp;
        gp.m_coarse = m_list[k - 1];
        gp.m_fine = m_list[k];
        std::size_t count = std::min(runs[k - 1].size(), runs[k].size());
        for (std::size_t s = 0; s < count; ++s) {
            ScalarField diff = runs[k][s];
            for (std::size_t c = 0; c < diff.size(); ++c)
                diff[c] -= runs[k - 1][s][c];
            gp.gap = std::max(gp.gap, l2_norm(diff));
        }
        gaps.push_back(gp);
    }
    return gaps;
}

}  // namespace driftlab
