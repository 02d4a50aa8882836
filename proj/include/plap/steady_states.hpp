#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "plap/errors.hpp"
#include "plap/exact_solutions.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/p_flux.hpp"

namespace plap {

/// The diffusion medium: exponent p and space dimension N.
struct Medium {
    double p = 2.0;
    int N = 1;
};

enum class SteadyStatus { Global, BlowupAt, MaxRadiusReached };

/// Radial steady state w_a on a uniform grid from r = 0.
struct SteadyProfile {
    NonlinearitySpec spec;
    Medium medium;
    double a = 1.0;                 ///< center value w(0)
    std::vector<double> radii;      ///< 0 = r_0 < ... < r_M
    std::vector<double> values;     ///< w(r_j)
    SteadyStatus status = SteadyStatus::Global;
    double blowup_radius = 0.0;     ///< meaningful when status == BlowupAt
    int iterations = 0;

    double value_at(double r) const {
        if (r <= radii.front()) return values.front();
        if (r >= radii.back()) return values.back();
        const double dr = radii[1] - radii[0];
        const std::size_t j = static_cast<std::size_t>(r / dr);
        const double t = (r - radii[j]) / dr;
        return values[j] * (1.0 - t) + values[j + 1] * t;
    }
};

namespace detail {

/// One Picard sweep of w -> a + ∫_0^r H_p(s^{1-N} ∫_0^s τ^{N-1} f(w) dτ) ds
/// by composite trapezoid on the shared grid. The s = 0 integrand uses the
/// analytic limit s^{1-N} ∫_0^s τ^{N-1} f dτ -> 0, removing the coordinate
/// singularity.
inline void picard_sweep(const NonlinearitySpec& spec, const Medium& med,
                         const std::vector<double>& r, const std::vector<double>& w,
                         double a, std::vector<double>& out) {
    const std::size_t n = r.size();
    const double dr = r[1] - r[0];
    const double p = med.p;
    const int N = med.N;
    std::vector<double> fw(n);
    for (std::size_t i = 0; i < n; ++i)
        fw[i] = eval_f(spec, std::min(w[i], 1e300));
    double inner = 0.0;      // ∫_0^{r_i} τ^{N-1} f(w) dτ
    double prev_hp = 0.0;    // integrand H_p(...) at r_{i-1}
    out[0] = a;
    for (std::size_t i = 1; i < n; ++i) {
        inner += 0.5 * dr * (std::pow(r[i - 1], N - 1) * fw[i - 1] +
                             std::pow(r[i], N - 1) * fw[i]);
        const double arg = std::pow(r[i], 1 - N) * inner;
        const double hp = h_p(arg, p);
        out[i] = out[i - 1] + 0.5 * dr * (prev_hp + hp);
        prev_hp = hp;
    }
}

}  // namespace detail

/// Radial steady state by the fixed-point construction, starting from
/// w ≡ a. Iterates increase monotonically; divergence past 1e12 is reported
/// as blow-up with the crossing radius refined by grid halving.
inline SteadyProfile picard_steady(const NonlinearitySpec& spec, const Medium& med,
                                   double a, double r_max, double tol = 1e-10,
                                   int grid_size = 1024, int max_iters = 5000) {
    if (!(a > 0.0)) throw precondition_error("picard_steady: a must be > 0");
    if (!(r_max > 0.0)) throw precondition_error("picard_steady: r_max must be > 0");
    constexpr double blowup_threshold = 1e12;

    auto run = [&](double R, int M, double* crossing, int* iters_out) {
        std::vector<double> r(M + 1), w(M + 1, a), next(M + 1);
        for (int i = 0; i <= M; ++i) r[i] = R * i / M;
        std::vector<double> history;  // for cycle detection
        double stable_cross = -1.0;
        int stable_count = 0;
        for (int it = 0; it < max_iters; ++it) {
            detail::picard_sweep(spec, med, r, w, a, next);
            double change = 0.0, maxv = 0.0;
            for (int i = 0; i <= M; ++i) {
                change = std::max(change, std::fabs(next[i] - w[i]));
                maxv = std::max(maxv, next[i]);
            }
            w.swap(next);
            if (maxv > blowup_threshold) {
                double cr = r[M];
                for (int i = 0; i <= M; ++i)
                    if (w[i] > blowup_threshold) {
                        cr = r[i];
                        break;
                    }
                if (std::fabs(cr - stable_cross) < 0.5 * R / M)
                    ++stable_count;
                else {
                    stable_cross = cr;
                    stable_count = 0;
                }
                if (stable_count >= 5) {
                    *crossing = cr;
                    *iters_out = it + 1;
                    return std::pair<std::vector<double>, std::vector<double>>{r, w};
                }
            } else if (change < tol) {
                *crossing = -1.0;
                *iters_out = it + 1;
                return std::pair<std::vector<double>, std::vector<double>>{r, w};
            }
            // cycle detection over the last 5 sup-changes (non-monotone f tables)
            history.push_back(change);
            if (history.size() > 5) history.erase(history.begin());
            if (history.size() == 5 && change > tol) {
                bool cycling = true;
                for (std::size_t q = 1; q < history.size(); ++q)
                    if (std::fabs(history[q] - history[0]) > 1e-12 * (1.0 + history[0]))
                        cycling = false;
                if (cycling && it > 50)
                    throw numerical_error("picard_steady: non-convergent oscillation",
                                          0.0, change);
            }
        }
        throw numerical_error("picard_steady: iteration budget exhausted");
    };

    double crossing = -1.0;
    int iters = 0;
    auto [r, w] = run(r_max, grid_size, &crossing, &iters);

    SteadyProfile out;
    out.spec = spec;
    out.medium = med;
    out.a = a;
    if (crossing < 0.0) {
        out.status = SteadyStatus::Global;
        out.radii = std::move(r);
        out.values = std::move(w);
        out.iterations = iters;
        return out;
    }
    // refine the blow-up radius by halving the grid near the crossing
    double R = std::min(r_max, crossing * 1.05);
    int M = grid_size;
    for (int pass = 0; pass < 3; ++pass) {
        M *= 2;
        double c2 = -1.0;
        int it2 = 0;
        auto [r2, w2] = run(R, M, &c2, &it2);
        if (c2 < 0.0) break;  // converged inside the shrunken domain
        crossing = c2;
        R = std::min(r_max, crossing * 1.05);
        r = std::move(r2);
        w = std::move(w2);
        iters = it2;
    }
    out.status = crossing >= r_max - (r[1] - r[0]) ? SteadyStatus::MaxRadiusReached
                                                   : SteadyStatus::BlowupAt;
    out.blowup_radius = crossing;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (w[i] > 1e12) break;
        out.radii.push_back(r[i]);
        out.values.push_back(w[i]);
    }
    out.iterations = iters;
    return out;
}

enum class Continuation { ContinuesGlobally, BlowsUpAt };

struct DichotomyResult {
    Continuation verdict = Continuation::ContinuesGlobally;
    double blowup_radius = 0.0;              ///< when verdict == BlowsUpAt
    std::vector<double> rung_radii;          ///< r where ln w crossed each rung
    std::vector<double> rung_levels;         ///< the ln w rungs crossed
    double gap_ratio = 0.0;                  ///< geometric mean of last gap ratios
};

/// Decides whether the radial steady state from center value a continues to
/// all radii or blows up at finite radius. Shoots the ODE in logarithmic
/// variables (ln w, ln flux) — free of overflow up to w ~ e^300000 — and
/// records the radii where ln w crosses rungs geometric in ln w. Blow-up at
/// finite r* makes consecutive crossing gaps decay geometrically; global
/// growth keeps them flat or growing. Verdict: mean gap ratio < 0.9.
inline DichotomyResult continuation_dichotomy(const NonlinearitySpec& spec,
                                              const Medium& med, double a,
                                              double r_max) {
    if (!(a > 0.0)) throw precondition_error("continuation_dichotomy: a must be > 0");
    const double p = med.p;
    const int N = med.N;
    const double fa = eval_f(spec, a);
    DichotomyResult out;
    if (fa == 0.0) return out;  // w ≡ a is already the global solution

    const bool log_f = spec.family == Family::PowerLog;
    // rungs in ln w: 20 * 4^j, capped by representable range of the family
    std::vector<double> rungs;
    const double top = log_f ? 4.0e5 : 600.0;
    for (double u = 20.0; u <= top; u *= 4.0) rungs.push_back(u);

    auto log_f_eval = [&spec](double L) {
        // ln f(e^L) for PowerLog; ln ln(1+w) = ln(L) to double precision
        // once L > 36
        const double loglog = L > 36.0 ? std::log(L) : std::log(std::log1p(std::exp(L)));
        return spec.alpha * L + spec.beta * loglog;
    };
    auto lin_f_eval = [&spec](double L) {
        return std::log(eval_f(spec, std::exp(std::min(L, 690.0))));
    };

    // state: L = ln w, Y = ln(r^{N-1} (w')^{p-1})
    auto slopes = [&](double r, double L, double Y, double& dL, double& dY) {
        const double lr = std::log(r);
        const double eL = std::min((Y + (1 - N) * lr) / (p - 1.0) - L, 700.0);
        const double lf = log_f ? log_f_eval(L) : lin_f_eval(L);
        const double eY = std::min((N - 1) * lr + lf - Y, 700.0);
        dL = std::exp(eL);
        dY = std::exp(eY);
    };

    double r = std::min(1e-4, 1e-4 * r_max);
    double L = std::log(a) + std::log1p(((p - 1.0) / p) *
                                        std::pow(fa / N, 1.0 / (p - 1.0)) *
                                        std::pow(r, p / (p - 1.0)) / a);
    double Y = std::log(fa / N) + N * std::log(r);
    std::size_t next_rung = 0;
    while (next_rung < rungs.size() && L >= rungs[next_rung]) ++next_rung;

    bool stagnated = false;
    while (r < r_max && next_rung < rungs.size()) {
        double dL, dY;
        slopes(r, L, Y, dL, dY);
        double dr = 0.1 * r;  // geometric advance far from growth
        if (dL > 0.0) dr = std::min(dr, 0.2 / dL);
        if (dY > 0.0) dr = std::min(dr, 0.2 / dY);
        dr = std::min(dr, r_max - r + 1e-30);
        if (dr < r * 1e-15) {
            stagnated = true;  // vertical asymptote: r no longer advances
            break;
        }
        // classic RK4
        double k1L, k1Y, k2L, k2Y, k3L, k3Y, k4L, k4Y;
        slopes(r, L, Y, k1L, k1Y);
        slopes(r + 0.5 * dr, L + 0.5 * dr * k1L, Y + 0.5 * dr * k1Y, k2L, k2Y);
        slopes(r + 0.5 * dr, L + 0.5 * dr * k2L, Y + 0.5 * dr * k2Y, k3L, k3Y);
        slopes(r + dr, L + dr * k3L, Y + dr * k3Y, k4L, k4Y);
        const double Lnew = L + dr / 6.0 * (k1L + 2.0 * k2L + 2.0 * k3L + k4L);
        const double Ynew = Y + dr / 6.0 * (k1Y + 2.0 * k2Y + 2.0 * k3Y + k4Y);
        const double rnew = r + dr;
        while (next_rung < rungs.size() && Lnew >= rungs[next_rung]) {
            const double frac = (rungs[next_rung] - L) / (Lnew - L);
            out.rung_radii.push_back(r + frac * dr);
            out.rung_levels.push_back(rungs[next_rung]);
            ++next_rung;
        }
        r = rnew;
        L = Lnew;
        Y = Ynew;
    }

    if (stagnated) {
        out.verdict = Continuation::BlowsUpAt;
        out.blowup_radius = r;
        out.gap_ratio = 0.0;
        return out;
    }
    const std::size_t n = out.rung_radii.size();
    if (n < 4) {
        out.verdict = Continuation::ContinuesGlobally;
        return out;
    }
    double prod = 1.0;
    int cnt = 0;
    for (std::size_t i = n - 3; i < n; ++i) {
        const double g1 = out.rung_radii[i] - out.rung_radii[i - 1];
        const double g0 = out.rung_radii[i - 1] - (i >= 2 ? out.rung_radii[i - 2] : 0.0);
        if (i >= 2 && g0 > 0.0) {
            prod *= g1 / g0;
            ++cnt;
        }
    }
    out.gap_ratio = cnt > 0 ? std::pow(prod, 1.0 / cnt) : 1.0;
    if (out.gap_ratio < 0.9) {
        out.verdict = Continuation::BlowsUpAt;
        const double q = out.gap_ratio;
        const double last_gap = out.rung_radii[n - 1] - out.rung_radii[n - 2];
        out.blowup_radius = out.rung_radii[n - 1] + last_gap * q / (1.0 - q);
    } else {
        out.verdict = Continuation::ContinuesGlobally;
    }
    return out;
}

/// Annulus approximant of the boundary blow-up solution: the radial elliptic
/// two-point BVP with value m at both ends of [eps, R].
struct BlowupAnnulusProfile {
    NonlinearitySpec spec;
    Medium medium;
    double eps = 0.0, R = 0.0, m = 0.0;
    std::vector<double> radii;
    std::vector<double> values;

    double value_at(double r) const {
        if (r <= radii.front()) return values.front();
        if (r >= radii.back()) return values.back();
        const double dr = radii[1] - radii[0];
        const std::size_t j = static_cast<std::size_t>((r - radii.front()) / dr);
        const double t = (r - radii[j]) / dr;
        return values[j] * (1.0 - t) + values[j + 1] * t;
    }
};

/// Damped Newton on the finite-difference discretization of
/// −(r^{N−1} |w'|^{p−2} w')' + r^{N−1} f(w) = 0, w(eps) = w(R) = m, with the
/// same regularized flux as the parabolic stepper. Solves a continuation
/// ladder in m (flat start at small m, warm restarts) for robustness at
/// large boundary data.
inline BlowupAnnulusProfile blowup_annulus(const NonlinearitySpec& spec,
                                           const Medium& med, double eps, double R,
                                           double m, int grid_size = 512,
                                           double flux_reg = default_flux_reg) {
    if (!(eps > 0.0 && R > eps)) throw precondition_error("blowup_annulus: need 0 < eps < R");
    if (!(m > 0.0)) throw precondition_error("blowup_annulus: m must be > 0");
    if (classify_K(spec, med.p, 0).verdict == Ternary::Infinite)
        throw precondition_error("blowup_annulus: requires K finite");
    const int M = grid_size;
    const double d = (R - eps) / M;
    const double p = med.p;
    const int N = med.N;
    std::vector<double> r(M + 1);
    for (int i = 0; i <= M; ++i) r[i] = eps + d * i;

    std::vector<double> w(M + 1, 0.0);
    auto residual_at = [&](const std::vector<double>& v, std::vector<double>& res) {
        res.assign(M + 1, 0.0);
        for (int i = 1; i < M; ++i) {
            const double Dp = (v[i + 1] - v[i]) / d;
            const double Dm = (v[i] - v[i - 1]) / d;
            const double Ap = std::pow(0.5 * (r[i] + r[i + 1]), N - 1);
            const double Am = std::pow(0.5 * (r[i] + r[i - 1]), N - 1);
            res[i] = -(Ap * p_flux(Dp, p, flux_reg) - Am * p_flux(Dm, p, flux_reg)) / d +
                     std::pow(r[i], N - 1) * eval_f(spec, std::max(v[i], 0.0));
        }
    };

    std::vector<double> res(M + 1), res_trial(M + 1), lower(M - 1), diag(M - 1),
        upper(M - 1), rhs(M - 1), trial(M + 1);
    auto sup_interior = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (int i = 1; i < M; ++i) s = std::max(s, std::fabs(v[i]));
        return s;
    };

    // continuation ladder in the boundary value
    std::vector<double> ladder;
    for (double mm = m; mm > 1.0; mm *= 0.25) ladder.push_back(mm);
    ladder.push_back(std::min(m, 1.0));
    std::reverse(ladder.begin(), ladder.end());

    bool first = true;
    for (double mm : ladder) {
        if (first) {
            std::fill(w.begin(), w.end(), mm);
            first = false;
        }
        w[0] = w[M] = mm;
        for (int i = 1; i < M; ++i) w[i] = std::min(w[i], mm);
        residual_at(w, res);
        double rnorm = sup_interior(res);
        const double tol = 1e-8 * (1.0 + mm);
        int it = 0;
        while (rnorm >= tol) {
            if (++it > 200)
                throw numerical_error("blowup_annulus: Newton stagnation", w[M / 2],
                                      rnorm);
            for (int i = 1; i < M; ++i) {
                const double Dp = (w[i + 1] - w[i]) / d;
                const double Dm = (w[i] - w[i - 1]) / d;
                const double Ap = std::pow(0.5 * (r[i] + r[i + 1]), N - 1);
                const double Am = std::pow(0.5 * (r[i] + r[i - 1]), N - 1);
                const double gp = p_flux_prime(Dp, p, flux_reg);
                const double gm = p_flux_prime(Dm, p, flux_reg);
                diag[i - 1] = (Ap * gp + Am * gm) / (d * d) +
                              std::pow(r[i], N - 1) *
                                  eval_f_prime(spec, std::max(w[i], 0.0));
                upper[i - 1] = i + 1 < M ? -Ap * gp / (d * d) : 0.0;
                lower[i - 1] = i - 1 > 0 ? -Am * gm / (d * d) : 0.0;
                rhs[i - 1] = -res[i];
            }
            // Thomas on the interior block
            for (int i = 1; i < M - 1; ++i) {
                const double f = lower[i] / diag[i - 1];
                diag[i] -= f * upper[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            rhs[M - 2] /= diag[M - 2];
            for (int i = M - 3; i >= 0; --i)
                rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];

            double s = 1.0;
            bool descended = false;
            for (int back = 0; back < 50; ++back) {
                trial = w;
                for (int i = 1; i < M; ++i) trial[i] = w[i] + s * rhs[i - 1];
                residual_at(trial, res_trial);
                if (sup_interior(res_trial) < rnorm) {
                    descended = true;
                    break;
                }
                s *= 0.5;
            }
            if (!descended)
                throw numerical_error("blowup_annulus: Newton stagnation", w[M / 2],
                                      rnorm);
            w.swap(trial);
            res.swap(res_trial);
            rnorm = sup_interior(res);
        }
    }

    BlowupAnnulusProfile out;
    out.spec = spec;
    out.medium = med;
    out.eps = eps;
    out.R = R;
    out.m = m;
    out.radii = std::move(r);
    out.values = std::move(w);
    return out;
}

}  // namespace plap
