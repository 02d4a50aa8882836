#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>

#include "plap/errors.hpp"
#include "plap/quadrature.hpp"

namespace plap {

/// Inverse of t -> |t|^{p-2} t, i.e. sign(t) |t|^{1/(p-1)}.
inline double h_p(double t, double p) {
    if (!(p > 1.0)) throw precondition_error("h_p: p must be > 1");
    if (t == 0.0) return 0.0;
    const double m = std::pow(std::fabs(t), 1.0 / (p - 1.0));
    return t > 0.0 ? m : -m;
}

/// Surface area of the unit sphere in R^N.
inline double unit_sphere_area(int N) {
    return 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N);
}

/// Parameters of the self-similar fundamental solution of the pure
/// p-Laplacian diffusion with mass k. For p = 2 the profile is the Gaussian
/// heat kernel and C_k/ell are unused (NaN/0).
struct BarenblattParams {
    double p = 2.0;
    int N = 1;
    double k = 1.0;
    double lambda = 0.0;       ///< N / (N(p-2)+p)
    double d = 0.0;            ///< ((p-2)/p)(lambda/N)^{1/(p-1)}; sign = sign(p-2)
    double C_k = 0.0;          ///< profile constant, mass-normalized
    double ell = 0.0;          ///< mass exponent: C_k = c(N,p) k^ell
    double mass_norm_c = 0.0;  ///< the constant c(N,p)
};

namespace detail {

/// Profile mass ω_N ∫_0^∞ (C - d ρ^{p/(p-1)})_+^{(p-1)/(p-2)} ρ^{N-1} dρ.
inline double profile_mass(double C, double p, int N, double d) {
    const double q = p / (p - 1.0);
    const double m = (p - 1.0) / (p - 2.0);
    const double omega = unit_sphere_area(N);
    if (p > 2.0) {
        const double rho_max = std::pow(C / d, 1.0 / q);
        auto g = [&](double rho) {
            const double base = C - d * std::pow(rho, q);
            return base <= 0.0 ? 0.0 : std::pow(base, m) * std::pow(rho, N - 1.0);
        };
        return omega * integrate(g, 0.0, rho_max, 1e-13, 1e-11).value;
    }
    // p < 2: positive everywhere, decays like rho^{-p/(2-p)}; split at the
    // scale radius and map the tail exactly via s = 1/sigma.
    const double ad = std::fabs(d);
    auto g = [&](double rho) {
        return std::pow(C + ad * std::pow(rho, q), m) * std::pow(rho, N - 1.0);
    };
    const double B = std::max(1.0, std::pow(C / ad, 1.0 / q));
    const double head = integrate(g, 0.0, B, 1e-13, 1e-11).value;
    const double tail = integrate_tail(g, B, 1e-13, 1e-11).value;
    return omega * (head + tail);
}

/// c(N,p): the C constant whose profile has unit mass, found by bisection
/// on log C (mass is monotone in C). Cached per (p, N).
inline double mass_norm_constant(double p, int N) {
    static std::map<std::pair<double, int>, double> cache;
    static std::mutex mtx;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find({p, N});
        if (it != cache.end()) return it->second;
    }
    const double lambda_over_N = 1.0 / (N * (p - 2.0) + p);
    const double d = ((p - 2.0) / p) * std::pow(lambda_over_N, 1.0 / (p - 1.0));
    // mass = A C^{1/ell}: increasing in C for p > 2, decreasing for p < 2
    const double sgn = p > 2.0 ? 1.0 : -1.0;
    auto mass_at = [&](double x) { return profile_mass(std::exp(sgn * x), p, N, d); };
    double lo = 0.0, hi = 0.0;
    while (mass_at(lo) > 1.0) lo -= 1.0;
    while (mass_at(hi) < 1.0) hi += 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mass_at(mid) < 1.0 ? lo : hi) = mid;
    }
    const double c = std::exp(sgn * 0.5 * (lo + hi));
    std::lock_guard<std::mutex> lock(mtx);
    cache[{p, N}] = c;
    return c;
}

}  // namespace detail

/// Derived constants for mass k, p ≠ 2. Errors: p = 2 (use gaussian_params),
/// p ≤ 2N/(N+1) (lambda would not be positive).
inline BarenblattParams barenblatt_params(double p, int N, double k) {
    if (N < 1) throw precondition_error("barenblatt_params: N >= 1");
    if (!(k > 0.0)) throw precondition_error("barenblatt_params: k > 0");
    if (p == 2.0)
        throw std::domain_error("barenblatt_params: p = 2 is the Gaussian branch, use gaussian_params");
    if (!(p > 2.0 * N / (N + 1.0)))
        throw std::domain_error("barenblatt_params: requires p > 2N/(N+1)");
    BarenblattParams b;
    b.p = p;
    b.N = N;
    b.k = k;
    b.lambda = N / (N * (p - 2.0) + p);
    b.d = ((p - 2.0) / p) * std::pow(b.lambda / N, 1.0 / (p - 1.0));
    b.ell = p * (p - 2.0) * b.lambda / ((p - 1.0) * N);
    b.mass_norm_c = detail::mass_norm_constant(p, N);
    b.C_k = b.mass_norm_c * std::pow(k, b.ell);
    return b;
}

/// p = 2 heat-kernel parameters (lambda = N/2, d = 0).
inline BarenblattParams gaussian_params(int N, double k) {
    if (N < 1) throw precondition_error("gaussian_params: N >= 1");
    if (!(k > 0.0)) throw precondition_error("gaussian_params: k > 0");
    BarenblattParams b;
    b.p = 2.0;
    b.N = N;
    b.k = k;
    b.lambda = 0.5 * N;
    b.d = 0.0;
    b.C_k = std::numeric_limits<double>::quiet_NaN();
    b.ell = 0.0;
    b.mass_norm_c = std::numeric_limits<double>::quiet_NaN();
    return b;
}

/// Either branch, dispatched on p.
inline BarenblattParams make_barenblatt(double p, int N, double k) {
    return p == 2.0 ? gaussian_params(N, k) : barenblatt_params(p, N, k);
}

/// v_k(r, t). p = 2: k(4πt)^{-N/2} exp(-r²/4t). Otherwise
/// t^{-λ} (C_k - d (r t^{-λ/N})^{p/(p-1)})_+^{(p-1)/(p-2)}; the (·)_+ returns
/// an exact 0 outside the support when p > 2.
inline double eval_barenblatt(const BarenblattParams& b, double r, double t) {
    if (!(t > 0.0)) throw std::domain_error("eval_barenblatt: t must be positive");
    if (r < 0.0) throw std::domain_error("eval_barenblatt: r must be nonnegative");
    if (b.p == 2.0)
        return b.k * std::pow(4.0 * M_PI * t, -0.5 * b.N) * std::exp(-r * r / (4.0 * t));
    const double xi = r * std::pow(t, -b.lambda / b.N);
    const double base = b.C_k - b.d * std::pow(xi, b.p / (b.p - 1.0));
    const double m = (b.p - 1.0) / (b.p - 2.0);
    if (b.p > 2.0 && base <= 0.0) return 0.0;
    return std::pow(t, -b.lambda) * std::pow(base, m);
}

/// Radius of the support ball at time t for p > 2; empty for p ≤ 2
/// (positivity everywhere).
inline std::optional<double> support_radius(const BarenblattParams& b, double t) {
    if (!(t > 0.0)) throw std::domain_error("support_radius: t must be positive");
    if (b.p <= 2.0) return std::nullopt;
    return std::pow(b.C_k / b.d, (b.p - 1.0) / b.p) * std::pow(t, b.lambda / b.N);
}

/// Constants of the k→∞ limit solution for 2N/(N+1) < p < 2, singular along
/// the whole time axis.
struct RazorBladeParams {
    double p = 1.5;
    int N = 1;
    double Lambda_N = 0.0;  ///< (-d)^{(p-1)/(p-2)} with d = d(p, N) < 0
    double Lambda_1 = 0.0;  ///< same constant evaluated at N = 1
};

inline RazorBladeParams razor_blade_params(double p, int N) {
    if (N < 1) throw precondition_error("razor_blade_params: N >= 1");
    if (!(p > 2.0 * N / (N + 1.0) && p < 2.0))
        throw std::domain_error("razor_blade_params: requires 2N/(N+1) < p < 2");
    auto lam = [p](int dim) {
        const double lambda = dim / (dim * (p - 2.0) + p);
        const double d = ((p - 2.0) / p) * std::pow(lambda / dim, 1.0 / (p - 1.0));
        return std::pow(-d, (p - 1.0) / (p - 2.0));
    };
    RazorBladeParams rb;
    rb.p = p;
    rb.N = N;
    rb.Lambda_N = lam(N);
    rb.Lambda_1 = lam(1);
    return rb;
}

/// v_∞(r, t) = Λ_N (t / r^p)^{1/(2-p)}; singular at r = 0.
inline double eval_razor_blade(const RazorBladeParams& rb, double r, double t) {
    if (!(t > 0.0)) throw std::domain_error("eval_razor_blade: t must be positive");
    if (!(r > 0.0)) throw std::domain_error("eval_razor_blade: singular at r = 0");
    return rb.Lambda_N * std::pow(t / std::pow(r, rb.p), 1.0 / (2.0 - rb.p));
}

/// One-dimensional decay bound Λ_1 (t/(r-R0)^p)^{1/(2-p)} for r > R0: the
/// far-field envelope of any solution started inside B_{R0}.
inline double razor_blade_bound(const RazorBladeParams& rb, double r, double t, double R0) {
    if (!(r > R0)) throw std::domain_error("razor_blade_bound: needs r > R0");
    return rb.Lambda_1 * std::pow(t / std::pow(r - R0, rb.p), 1.0 / (2.0 - rb.p));
}

}  // namespace plap
