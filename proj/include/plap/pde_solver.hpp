#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plap/errors.hpp"
#include "plap/exact_solutions.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/p_flux.hpp"
#include "plap/radial_grid.hpp"

namespace plap {

enum class BoundaryKind { ZeroDirichlet, ZeroFlux, FixedDirichlet };

struct SolveConfig {
    double h = 1e-2;   ///< time step (Crandall–Liggett step)
    double T = 1.0;    ///< horizon
    double flux_reg = default_flux_reg;
    double newton_tol = 1e-12;
    int newton_max_iters = 60;
    BoundaryKind boundary = BoundaryKind::ZeroDirichlet;
    double boundary_value = 0.0;  ///< outer-face value for FixedDirichlet
    std::vector<double> record_times;
};

/// Default accuracy-driven step: 0.5 dr^{min(p,2)/2}. The implicit scheme is
/// unconditionally stable; this balances the O(h) and O(dr^2) errors.
inline double default_time_step(double dr, double p) {
    return 0.5 * std::pow(dr, 0.5 * std::min(p, 2.0));
}

struct StepResult {
    RadialField field;
    int newton_iters = 0;
    double clipped_mass = 0.0;    ///< mass added by clipping negatives to 0
    double absorbed_mass = 0.0;   ///< h Σ_j vol_j f(u_j)
    double boundary_loss = 0.0;   ///< h (outward flux through the outer face)
};

namespace detail {

inline void thomas_solve(std::vector<double>& lower, std::vector<double>& diag,
                         std::vector<double>& upper, std::vector<double>& rhs) {
    const int n = static_cast<int>(diag.size());
    for (int i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

/// f extended by 0 to negative arguments (Newton iterates may undershoot).
inline double f_ext(const std::optional<NonlinearitySpec>& spec, double u) {
    return (!spec || u <= 0.0) ? 0.0 : eval_f(*spec, u);
}
inline double f_prime_ext(const std::optional<NonlinearitySpec>& spec, double u) {
    return (!spec || u <= 0.0) ? 0.0 : eval_f_prime(*spec, u);
}

/// Residual of the implicit-step system,
///   F_j = u_j - uprev_j - (h/vol_j)(A_{j+1} Φ_{j+1/2} - A_j Φ_{j-1/2}) + h f(u_j),
/// with Φ the regularized p-flux, zero flux at r = 0 and the configured outer
/// boundary.
inline void step_residual(const std::vector<double>& u, const std::vector<double>& uprev,
                          const std::optional<NonlinearitySpec>& spec, double p, double h,
                          const RadialGrid& g, const SolveConfig& cfg,
                          std::vector<double>& out) {
    const int M = g.cells;
    out.assign(M, 0.0);
    const double eps = cfg.flux_reg;
    std::vector<double> face_flux(M + 1, 0.0);  // A_i * Φ_i
    for (int i = 1; i < M; ++i) {
        const double D = (u[i] - u[i - 1]) / g.dr;
        face_flux[i] = g.face_area(i) * p_flux(D, p, eps);
    }
    switch (cfg.boundary) {
        case BoundaryKind::ZeroFlux:
            face_flux[M] = 0.0;
            break;
        case BoundaryKind::ZeroDirichlet:
        case BoundaryKind::FixedDirichlet: {
            const double ub = cfg.boundary == BoundaryKind::ZeroDirichlet
                                  ? 0.0
                                  : cfg.boundary_value;
            const double D = (ub - u[M - 1]) / (0.5 * g.dr);
            face_flux[M] = g.face_area(M) * p_flux(D, p, eps);
            break;
        }
    }
    for (int j = 0; j < M; ++j) {
        out[j] = u[j] - uprev[j] - h / g.volume[j] * (face_flux[j + 1] - face_flux[j]) +
                 h * f_ext(spec, u[j]);
    }
}

}  // namespace detail

/// One implicit Euler step of ∂_t u - Δ_p u + f(u) = 0 from u_prev over step
/// config.h (or h_override), solved by damped Newton with a tridiagonal
/// Jacobian. Negatives are clipped to 0 and the clipped mass recorded.
inline StepResult step_implicit(const RadialField& u_prev,
                                const std::optional<NonlinearitySpec>& spec, double p,
                                const SolveConfig& cfg,
                                std::optional<double> h_override = std::nullopt) {
    const RadialGrid& g = *u_prev.grid;
    const int M = g.cells;
    const double h = h_override.value_or(cfg.h);
    if (!(h > 0.0)) throw precondition_error("step_implicit: h must be positive");
    const double eps = cfg.flux_reg;

    std::vector<double> u = u_prev.values;
    std::vector<double> res, res_trial;
    detail::step_residual(u, u_prev.values, spec, p, h, g, cfg, res);
    auto sup = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::fabs(x));
        return m;
    };
    double rnorm = sup(res);

    std::vector<double> lower(M), diag(M), upper(M), rhs(M), u_trial(M);
    int iters = 0;
    bool polishing = false;
    while (true) {
        if (rnorm < cfg.newton_tol) {
            if (polishing || rnorm == 0.0) break;
            polishing = true;  // one extra iteration sharpens the mass ledger
        }
        if (iters >= cfg.newton_max_iters)
            throw numerical_error("step_implicit: Newton did not converge", 0.0, rnorm);
        // assemble tridiagonal Jacobian
        for (int j = 0; j < M; ++j) {
            lower[j] = upper[j] = 0.0;
            diag[j] = 1.0 + h * detail::f_prime_ext(spec, u[j]);
            rhs[j] = -res[j];
        }
        for (int i = 1; i < M; ++i) {
            const double D = (u[i] - u[i - 1]) / g.dr;
            const double w = h * g.face_area(i) * p_flux_prime(D, p, eps) / g.dr;
            diag[i - 1] += w / g.volume[i - 1];
            upper[i - 1] -= w / g.volume[i - 1];
            diag[i] += w / g.volume[i];
            lower[i] -= w / g.volume[i];
        }
        if (cfg.boundary != BoundaryKind::ZeroFlux) {
            const double ub =
                cfg.boundary == BoundaryKind::ZeroDirichlet ? 0.0 : cfg.boundary_value;
            const double D = (ub - u[M - 1]) / (0.5 * g.dr);
            diag[M - 1] += h * g.face_area(M) * p_flux_prime(D, p, eps) /
                           (0.5 * g.dr) / g.volume[M - 1];
        }
        detail::thomas_solve(lower, diag, upper, rhs);  // rhs <- delta
        double s = 1.0;
        double trial_norm = rnorm;
        bool descended = false;
        for (int back = 0; back < 40; ++back) {
            for (int j = 0; j < M; ++j) u_trial[j] = u[j] + s * rhs[j];
            detail::step_residual(u_trial, u_prev.values, spec, p, h, g, cfg, res_trial);
            trial_norm = sup(res_trial);
            if (trial_norm < rnorm) {
                descended = true;
                break;
            }
            s *= 0.5;
        }
        if (!descended) {
            if (polishing) break;  // converged iterate already in hand
            throw numerical_error("step_implicit: Newton stagnation", 0.0, rnorm);
        }
        u.swap(u_trial);
        res.swap(res_trial);
        rnorm = trial_norm;
        ++iters;
    }

    StepResult out;
    out.newton_iters = iters;
    double clipped = 0.0, absorbed = 0.0;
    for (int j = 0; j < M; ++j) {
        if (u[j] < 0.0) {
            clipped += -u[j] * g.volume[j];
            u[j] = 0.0;
        }
        absorbed += g.volume[j] * detail::f_ext(spec, u[j]);
    }
    out.clipped_mass = clipped;
    out.absorbed_mass = h * absorbed;
    if (cfg.boundary != BoundaryKind::ZeroFlux) {
        const double ub =
            cfg.boundary == BoundaryKind::ZeroDirichlet ? 0.0 : cfg.boundary_value;
        const double D = (ub - u[M - 1]) / (0.5 * g.dr);
        out.boundary_loss = -h * g.face_area(M) * p_flux(D, p, eps);
    }
    out.field.grid = u_prev.grid;
    out.field.values = std::move(u);
    out.field.time = u_prev.time + h;
    return out;
}

/// The implicit-step residual of (u_new, u_prev) under the given step; used
/// by verification suites.
inline RadialField residual(const RadialField& u_new, const RadialField& u_prev,
                            const std::optional<NonlinearitySpec>& spec, double p,
                            double h, const SolveConfig& cfg) {
    if (u_new.grid->cells != u_prev.grid->cells)
        throw precondition_error("residual: mismatched grids");
    RadialField out;
    out.grid = u_new.grid;
    out.time = u_new.time;
    detail::step_residual(u_new.values, u_prev.values, spec, p, h, *u_new.grid, cfg,
                          out.values);
    return out;
}

/// Per-step accounting row of a solve.
struct LedgerRow {
    double t = 0.0;
    double mass = 0.0;
    double absorbed_cum = 0.0;
    double boundary_loss_cum = 0.0;
    double clipped_cum = 0.0;
    int newton_iters = 0;
};

struct SolveResult {
    std::vector<RadialField> snapshots;
    std::vector<double> absorbed_at_snapshots;  ///< A(t) at each snapshot
    std::vector<LedgerRow> ledger;
};

/// March step_implicit from initial.t to cfg.T, landing exactly on each
/// record time. Also accumulates the absorbed mass A(t) = Σ h Σ_j vol_j f(u_j)
/// and rejects runs whose cumulative clipped mass exceeds 1e-8 of the initial
/// mass.
inline SolveResult solve(const RadialField& initial,
                         const std::optional<NonlinearitySpec>& spec, double p,
                         const SolveConfig& cfg) {
    for (double rt : cfg.record_times)
        if (rt <= initial.time || rt > cfg.T)
            throw precondition_error("solve: record times must lie in (t0, T]");
    std::vector<double> records = cfg.record_times;
    std::sort(records.begin(), records.end());

    SolveResult out;
    RadialField u = initial;
    const double mass0 = discrete_mass(initial);
    double absorbed = 0.0, lost = 0.0, clipped = 0.0;
    std::size_t next_rec = 0;
    const double t_eps = 1e-12 * std::max(1.0, cfg.T);
    while (u.time < cfg.T - t_eps) {
        double target = u.time + cfg.h;
        if (next_rec < records.size()) target = std::min(target, records[next_rec]);
        target = std::min(target, cfg.T);
        StepResult s = step_implicit(u, spec, p, cfg, target - u.time);
        u = std::move(s.field);
        u.time = target;  // avoid drift from repeated summation
        absorbed += s.absorbed_mass;
        lost += s.boundary_loss;
        clipped += s.clipped_mass;
        out.ledger.push_back({u.time, discrete_mass(u), absorbed, lost, clipped,
                              s.newton_iters});
        if (clipped > 1e-8 * mass0)
            throw numerical_error("solve: clipped mass exceeds 1e-8 of initial mass",
                                  clipped);
        if (next_rec < records.size() && std::fabs(u.time - records[next_rec]) <= t_eps) {
            out.snapshots.push_back(u);
            out.absorbed_at_snapshots.push_back(absorbed);
            ++next_rec;
        }
    }
    return out;
}

/// Cell-averaged sample of the Barenblatt solution at time eps: the
/// Dirac-approximating initial datum of the fundamental-solution pipeline.
/// Preconditions: the profile must fit the grid (support inside R for p > 2,
/// tail mass beyond R below 1e-6 k for p ≤ 2).
inline RadialField dirac_initial(const BarenblattParams& b,
                                 std::shared_ptr<const RadialGrid> grid, double eps) {
    if (!(eps > 0.0)) throw precondition_error("dirac_initial: eps must be positive");
    const RadialGrid& g = *grid;
    if (b.N != g.dim) throw precondition_error("dirac_initial: dimension mismatch");
    if (b.p > 2.0) {
        const double sr = *support_radius(b, eps);
        if (!(sr < g.outer_radius))
            throw std::domain_error(
                "dirac_initial: support radius exceeds the grid; increase R");
    } else {
        auto integrand = [&](double r) {
            return eval_barenblatt(b, r, eps) * std::pow(r, g.dim - 1);
        };
        const double inside = g.omega *
            integrate(integrand, 0.0, g.outer_radius, 1e-10, 1e-8).value;
        if (!(b.k - inside < 1e-6 * b.k))
            throw std::domain_error(
                "dirac_initial: tail mass beyond the grid exceeds 1e-6 k; increase R");
    }
    RadialField f;
    f.grid = grid;
    f.time = eps;
    f.values.resize(g.cells);
    // 3-point Gauss–Legendre per cell of v(r) r^{N-1}, normalized by volume
    static constexpr double gx[3] = {-0.774596669241483377, 0.0,
                                     0.774596669241483377};
    static constexpr double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    for (int j = 0; j < g.cells; ++j) {
        const double a = g.face(j), bb = g.face(j + 1);
        const double c = 0.5 * (a + bb), half = 0.5 * (bb - a);
        double acc = 0.0;
        for (int q = 0; q < 3; ++q) {
            const double r = c + half * gx[q];
            acc += gw[q] * eval_barenblatt(b, r, eps) * std::pow(r, g.dim - 1);
        }
        f.values[j] = g.omega * acc * half / g.volume[j];
    }
    return f;
}

}  // namespace plap
