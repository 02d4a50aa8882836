#pragma once

#include <cmath>

namespace plap {

/// Default gradient regularization; shared between the parabolic stepper and
/// the elliptic annulus solver so both discretize the same flux.
inline constexpr double default_flux_reg = 1e-8;

/// Regularized p-flux g_eps(D) = (D² + eps²)^{(p−2)/2} D. Smooths the
/// degenerate (p > 2) or singular (p < 2) mobility at D = 0 so Newton sees a
/// differentiable flux.
inline double p_flux(double D, double p, double eps) {
    if (D == 0.0) return 0.0;
    return std::pow(D * D + eps * eps, 0.5 * (p - 2.0)) * D;
}

/// d/dD of p_flux: (D²+eps²)^{(p−4)/2} ((p−1)D² + eps²); positive, so the
/// discrete operator stays monotone.
inline double p_flux_prime(double D, double p, double eps) {
    const double s = D * D + eps * eps;
    return std::pow(s, 0.5 * (p - 4.0)) * ((p - 1.0) * D * D + eps * eps);
}

}  // namespace plap
