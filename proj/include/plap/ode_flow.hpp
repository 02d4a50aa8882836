#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "plap/errors.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/quadrature.hpp"

namespace plap {

/// A spatially flat solution of phi' + f(phi) = 0: either phi_a with
/// phi(0) = a, or the maximal solution phi_inf (a empty), which exists only
/// when J is finite.
struct FlatFlow {
    NonlinearitySpec spec;
    std::optional<double> a;  ///< initial value; empty = maximal solution

    static FlatFlow with_initial(NonlinearitySpec s, double a0) {
        if (a0 < 0.0) throw precondition_error("FlatFlow: a must be >= 0");
        return {std::move(s), a0};
    }
    static FlatFlow maximal(NonlinearitySpec s) {
        if (classify_J(s, 0).verdict != Ternary::Finite)
            throw precondition_error("FlatFlow: maximal solution requires J finite");
        return {std::move(s), std::nullopt};
    }
};

namespace detail {

/// ∫_lo^hi ds/f(s) for 0 < lo <= hi. Closed form for pure powers, adaptive
/// quadrature otherwise.
inline double inverse_f_time(const NonlinearitySpec& spec, double lo, double hi) {
    if (hi <= lo) return 0.0;
    if (spec.family == Family::PowerLog && spec.beta == 0.0) {
        const double a = spec.alpha;
        if (a == 1.0) return std::log(hi / lo);
        return (std::pow(lo, 1.0 - a) - std::pow(hi, 1.0 - a)) / (a - 1.0);
    }
    return integrate([&spec](double s) { return 1.0 / eval_f(spec, s); }, lo, hi,
                     1e-13, 1e-12).value;
}

/// ∫_phi^∞ ds/f(s) for PowerLog specs with J finite. The improper tail is
/// mapped with w = 1/ln(1+s), which regularizes the alpha = 1, beta > 1
/// borderline (integrand ~ w^{beta-2} near w = 0).
inline double inverse_f_tail(const NonlinearitySpec& spec, double phi) {
    const double a = spec.alpha, b = spec.beta;
    if (b == 0.0) return std::pow(phi, 1.0 - a) / (a - 1.0);
    const double split = std::max(1.0, 2.0 * phi);
    const double head = inverse_f_time(spec, phi, split);
    auto E = [a, b](double w) {
        const double inv = 1.0 / w;
        const double damp = std::exp((1.0 - a) * inv);
        if (damp == 0.0) return 0.0;
        const double base = 1.0 - std::exp(-inv);
        return damp * std::pow(base, -a) * std::pow(w, b - 2.0);
    };
    const double wS = 1.0 / std::log1p(split);
    const double tail = integrate(E, 0.0, wS, 1e-13, 1e-12).value;
    return head + tail;
}

}  // namespace detail

/// phi_a(t): the unique value with ∫_phi^a ds/f(s) = t, by bisection on
/// (0, a]. Returns 0 past the extinction time when ∫_0 ds/f converges.
inline double phi(const FlatFlow& flow, double t);

/// phi_inf(t) for t > 0: the unique value with ∫_phi^∞ ds/f(s) = t.
/// Precondition: classify_J = Finite (PowerLog only).
inline double phi_inf(const NonlinearitySpec& spec, double t) {
    if (classify_J(spec, 0).verdict != Ternary::Finite)
        throw precondition_error("phi_inf: requires J finite");
    if (!(t > 0.0)) throw precondition_error("phi_inf: t must be positive");
    if (spec.beta == 0.0)  // closed form: tail = phi^{1-alpha}/(alpha-1)
        return std::pow((spec.alpha - 1.0) * t, -1.0 / (spec.alpha - 1.0));
    auto tail = [&spec](double x) { return detail::inverse_f_tail(spec, x); };
    double lo = 1.0, hi = 1.0;
    while (tail(lo) < t) {
        lo *= 0.25;
        if (lo < 1e-280) throw numerical_error("phi_inf: bracket underflow", lo);
    }
    while (tail(hi) > t) {
        hi *= 4.0;
        if (hi > 1e280) throw numerical_error("phi_inf: bracket overflow", hi);
    }
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < 100 && lhi - llo > 1e-14; ++i) {
        const double mid = 0.5 * (llo + lhi);
        (tail(std::exp(mid)) > t ? llo : lhi) = mid;
    }
    return std::exp(0.5 * (llo + lhi));
}

inline double phi(const FlatFlow& flow, double t) {
    if (t < 0.0) throw std::domain_error("phi: t must be nonnegative");
    if (!flow.a) return phi_inf(flow.spec, t);
    const double a = *flow.a;
    if (a == 0.0 || t == 0.0) return a == 0.0 ? 0.0 : a;
    // T(phi) = ∫_phi^a ds/f is decreasing; maintain T(lo) > t >= T(hi).
    double lo = 0.0, hi = a;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (detail::inverse_f_time(flow.spec, mid, a) > t ? lo : hi) = mid;
    }
    if (hi < 1e-12 * a && detail::inverse_f_time(flow.spec, hi, a) < t)
        return 0.0;  // finite extinction, t past the extinction time
    return 0.5 * (lo + hi);
}

}  // namespace plap
