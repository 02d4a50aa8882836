#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "plap/errors.hpp"

namespace plap {

/// Outcome of an adaptive integration.
struct QuadResult {
    double value = 0.0;
    double error = 0.0;      ///< accumulated error estimate
    bool converged = false;
    int intervals = 0;       ///< panels in the final partition
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights (QUADPACK dqk15 constants).
inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

/// One Gauss–Kronrod 7/15 evaluation on [a, b].
template <class F>
Panel gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = gk_wg[3] * fc;
    double resk = gk_wk[7] * fc;
    double resabs = gk_wk[7] * std::fabs(fc);
    double fv[7];
    for (int i = 0; i < 7; ++i) {
        const double x = h * gk_nodes[i];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        fv[i] = f1 + f2;
        resk += gk_wk[i] * fv[i];
        resabs += gk_wk[i] * (std::fabs(f1) + std::fabs(f2));
        if (i % 2 == 1) resg += gk_wg[i / 2] * fv[i];
    }
    const double mean = 0.5 * resk;
    double resasc = gk_wk[7] * std::fabs(fc - mean);
    for (int i = 0; i < 7; ++i)
        resasc += gk_wk[i] * std::fabs(fv[i] - 2.0 * mean);
    resasc *= std::fabs(h);
    resabs *= std::fabs(h);

    double err = std::fabs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps50 = 50.0 * 2.220446049250313e-16;
    if (resabs > 0.0) err = std::max(err, eps50 * resabs);
    return {a, b, resk * h, err};
}

}  // namespace detail

/// Adaptive Gauss–Kronrod integration of f over the finite interval [a, b].
/// Refines the worst panel until the accumulated error estimate drops below
/// max(abs_tol, rel_tol*|value|) or the panel budget runs out.
template <class F>
QuadResult integrate(const F& f, double a, double b, double abs_tol = 1e-12,
                     double rel_tol = 1e-10, int max_intervals = 4000) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<detail::Panel> heap;
    heap.push(detail::gk15(f, a, b));
    double total = heap.top().value;
    double err = heap.top().error;
    int n = 1;
    while (n < max_intervals) {
        if (err <= std::max(abs_tol, rel_tol * std::fabs(total))) break;
        detail::Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // interval exhausted
            heap.push(worst);
            break;
        }
        detail::Panel left = detail::gk15(f, worst.a, mid);
        detail::Panel right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
    }
    out.value = total;
    out.error = err;
    out.intervals = n;
    out.converged = err <= std::max(abs_tol, rel_tol * std::fabs(total));
    return out;
}

/// ∫_a^∞ f(s) ds for a > 0 via the substitution s = 1/σ, mapping the tail to
/// (0, 1/a]. The transformed integrand is f(1/σ)/σ²; suitable whenever f
/// decays faster than 1/s at infinity.
template <class F>
QuadResult integrate_tail(const F& f, double a, double abs_tol = 1e-12,
                          double rel_tol = 1e-10, int max_intervals = 4000) {
    if (a <= 0.0) throw precondition_error("integrate_tail: lower bound must be > 0");
    auto g = [&f](double sigma) {
        const double s = 1.0 / sigma;
        return f(s) * s * s;
    };
    return integrate(g, 0.0, 1.0 / a, abs_tol, rel_tol, max_intervals);
}

/// Integration that throws numerical_error (with the partial value) instead of
/// returning a non-converged result.
template <class F>
double integrate_or_throw(const F& f, double a, double b, double abs_tol = 1e-12,
                          double rel_tol = 1e-10, int max_intervals = 4000) {
    QuadResult r = integrate(f, a, b, abs_tol, rel_tol, max_intervals);
    if (!r.converged)
        throw numerical_error("quadrature did not converge", r.value, r.error);
    return r.value;
}

}  // namespace plap
