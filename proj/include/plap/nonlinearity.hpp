#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plap/errors.hpp"
#include "plap/quadrature.hpp"

namespace plap {

enum class Family { PowerLog, Tabulated };

/// The absorption nonlinearity f: either the closed family
/// f(s) = s^alpha * ln^beta(s+1), or a user-supplied monotone table.
struct NonlinearitySpec {
    Family family = Family::PowerLog;
    double alpha = 1.0;  ///< positive exponent (PowerLog)
    double beta = 0.0;   ///< nonnegative log exponent (PowerLog)
    /// sorted (s, f(s)) breakpoints, linearly interpolated, clamped outside
    std::vector<std::pair<double, double>> points;

    static NonlinearitySpec power_log(double alpha, double beta = 0.0) {
        if (!(alpha > 0.0)) throw precondition_error("power_log: alpha must be > 0");
        if (!(beta >= 0.0)) throw precondition_error("power_log: beta must be >= 0");
        NonlinearitySpec s;
        s.family = Family::PowerLog;
        s.alpha = alpha;
        s.beta = beta;
        return s;
    }

    static NonlinearitySpec tabulated(std::vector<std::pair<double, double>> pts) {
        if (pts.size() < 2) throw precondition_error("tabulated: need >= 2 breakpoints");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].first < 0.0 || pts[i].second < 0.0)
                throw precondition_error("tabulated: breakpoints must be nonnegative");
            if (i > 0 && (pts[i].first <= pts[i - 1].first || pts[i].second < pts[i - 1].second))
                throw precondition_error("tabulated: breakpoints must be sorted and nondecreasing");
        }
        NonlinearitySpec s;
        s.family = Family::Tabulated;
        s.points = std::move(pts);
        return s;
    }
};

/// f(s); domain error for s < 0.
inline double eval_f(const NonlinearitySpec& spec, double s) {
    if (s < 0.0) throw std::domain_error("eval_f: s must be nonnegative");
    if (spec.family == Family::PowerLog) {
        if (s == 0.0) return 0.0;
        const double l = std::log1p(s);
        return std::pow(s, spec.alpha) * (spec.beta == 0.0 ? 1.0 : std::pow(l, spec.beta));
    }
    const auto& p = spec.points;
    if (s <= p.front().first) return p.front().second;
    if (s >= p.back().first) return p.back().second;
    auto it = std::upper_bound(p.begin(), p.end(), s,
                               [](double v, const auto& q) { return v < q.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (s - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
}

/// df/ds, clamped to a finite value at s = 0 when the true derivative is
/// unbounded there (PowerLog with alpha < 1). Used by Newton linearizations.
inline double eval_f_prime(const NonlinearitySpec& spec, double s) {
    if (s < 0.0) throw std::domain_error("eval_f_prime: s must be nonnegative");
    if (spec.family == Family::PowerLog) {
        const double a = spec.alpha, b = spec.beta;
        if (s == 0.0) {
            if (a > 1.0) return 0.0;
            if (a == 1.0) return b == 0.0 ? 1.0 : 0.0;
            s = 1e-12;  // clamp the s^(alpha-1) singularity
        }
        const double l = std::log1p(s);
        const double lb = b == 0.0 ? 1.0 : std::pow(l, b);
        double d = a * std::pow(s, a - 1.0) * lb;
        if (b > 0.0) d += b * std::pow(s, a) * std::pow(l, b - 1.0) / (1.0 + s);
        return d;
    }
    const auto& p = spec.points;
    if (s <= p.front().first || s >= p.back().first) return 0.0;
    auto it = std::upper_bound(p.begin(), p.end(), s,
                               [](double v, const auto& q) { return v < q.first; });
    return (it->second - (it - 1)->second) / (it->first - (it - 1)->first);
}

/// F(s) = ∫_0^s f. Closed form for pure powers, exact trapezoid for tables,
/// adaptive quadrature (abs 1e-12, rel 1e-10) otherwise.
inline double eval_F(const NonlinearitySpec& spec, double s) {
    if (s < 0.0) throw std::domain_error("eval_F: s must be nonnegative");
    if (s == 0.0) return 0.0;
    if (spec.family == Family::PowerLog) {
        if (spec.beta == 0.0) return std::pow(s, spec.alpha + 1.0) / (spec.alpha + 1.0);
        return integrate_or_throw([&spec](double x) { return eval_f(spec, x); }, 0.0, s,
                                  1e-12, 1e-10);
    }
    // piecewise linear: trapezoid over full segments is exact
    const auto& p = spec.points;
    double acc = 0.0;
    double prev_s = 0.0, prev_f = eval_f(spec, 0.0);
    for (const auto& q : p) {
        if (q.first >= s) break;
        if (q.first > prev_s) {
            acc += 0.5 * (prev_f + q.second) * (q.first - prev_s);
            prev_s = q.first;
            prev_f = q.second;
        }
    }
    acc += 0.5 * (prev_f + eval_f(spec, s)) * (s - prev_s);
    return acc;
}

enum class Ternary { Finite, Infinite, Undecided };

inline const char* to_string(Ternary t) {
    switch (t) {
        case Ternary::Finite: return "finite";
        case Ternary::Infinite: return "infinite";
        default: return "undecided";
    }
}

/// Verdict for one growth condition plus numeric tail evidence: partial
/// integrals ∫_1^M of the condition's integrand at increasing cutoffs M.
struct Classification {
    Ternary verdict = Ternary::Undecided;
    std::vector<std::pair<double, double>> tail;  ///< (cutoff M, partial integral)
};

namespace detail {

/// Partial integrals ∫_1^{M_j} g at cutoffs M_j = 100^j (j = 1..rungs),
/// computed in log space, capped at `cap` (table range for Tabulated specs).
template <class G>
std::vector<std::pair<double, double>> tail_partials(const G& g, int rungs, double cap) {
    std::vector<std::pair<double, double>> out;
    double lo = 1.0, acc = 0.0;
    for (int j = 1; j <= rungs; ++j) {
        double hi = std::pow(100.0, j);
        if (hi > cap) hi = cap;
        if (hi <= lo) break;
        auto lg = [&g](double u) {
            const double s = std::exp(u);
            return g(s) * s;
        };
        acc += integrate(lg, std::log(lo), std::log(hi), 1e-11, 1e-8).value;
        out.emplace_back(hi, acc);
        lo = hi;
        if (hi == cap) break;
    }
    return out;
}

}  // namespace detail

/// J = ∫_1^∞ ds/f(s). PowerLog verdicts are analytic: finite iff alpha > 1,
/// or alpha = 1 with beta > 1. Tabulated specs are Undecided (no tail
/// information beyond the table).
inline Classification classify_J(const NonlinearitySpec& spec, int evidence_rungs = 3) {
    Classification c;
    if (spec.family == Family::PowerLog) {
        c.verdict = (spec.alpha > 1.0 || (spec.alpha == 1.0 && spec.beta > 1.0))
                        ? Ternary::Finite
                        : Ternary::Infinite;
    }
    if (evidence_rungs > 0) {
        const double cap =
            spec.family == Family::Tabulated ? spec.points.back().first : 1e300;
        c.tail = detail::tail_partials(
            [&spec](double s) {
                const double fs = eval_f(spec, s);
                return fs > 0.0 ? 1.0 / fs : 1e300;
            },
            evidence_rungs, cap);
    }
    return c;
}

/// K = ∫_1^∞ ds/F(s)^{1/p}. PowerLog: finite iff alpha > p−1, or
/// alpha = p−1 with beta > p. Comparisons are done as alpha+1 vs p to keep
/// grid boundaries exact.
inline Classification classify_K(const NonlinearitySpec& spec, double p,
                                 int evidence_rungs = 3) {
    if (!(p > 1.0)) throw precondition_error("classify_K: p must be > 1");
    Classification c;
    if (spec.family == Family::PowerLog) {
        const double a1 = spec.alpha + 1.0;
        c.verdict = (a1 > p || (a1 == p && spec.beta > p)) ? Ternary::Finite
                                                           : Ternary::Infinite;
    }
    if (evidence_rungs > 0) {
        const double cap =
            spec.family == Family::Tabulated ? spec.points.back().first : 1e300;
        c.tail = detail::tail_partials(
            [&spec, p](double s) {
                const double Fs = eval_F(spec, s);
                return Fs > 0.0 ? std::pow(Fs, -1.0 / p) : 1e300;
            },
            evidence_rungs, cap);
    }
    return c;
}

/// The growth condition ∫_1^∞ s^{−p−p/N} f(s) ds < ∞ (fundamental-solution
/// existence). PowerLog: holds iff alpha < p(1+1/N)−1, compared in the
/// cleared form N(alpha+1) < p(N+1).
inline Classification classify_CFS(const NonlinearitySpec& spec, double p, int N,
                                   int evidence_rungs = 3) {
    if (N < 1) throw precondition_error("classify_CFS: N must be >= 1");
    if (!(p > 2.0 * N / (N + 1.0)))
        throw precondition_error("classify_CFS: requires p > 2N/(N+1)");
    Classification c;
    if (spec.family == Family::PowerLog) {
        c.verdict = (N * (spec.alpha + 1.0) < p * (N + 1.0)) ? Ternary::Finite
                                                             : Ternary::Infinite;
    }
    if (evidence_rungs > 0) {
        const double cap =
            spec.family == Family::Tabulated ? spec.points.back().first : 1e300;
        const double q = -p - p / N;
        c.tail = detail::tail_partials(
            [&spec, q](double s) { return std::pow(s, q) * eval_f(spec, s); },
            evidence_rungs, cap);
    }
    return c;
}

/// Finiteness verdicts and tail evidence for J, K and (CFS) together.
struct ClassificationReport {
    Ternary j_finite = Ternary::Undecided;
    Ternary k_finite = Ternary::Undecided;
    Ternary cfs_holds = Ternary::Undecided;
    std::vector<std::pair<double, double>> j_tail, k_tail, cfs_tail;
};

inline ClassificationReport classify_all(const NonlinearitySpec& spec, double p, int N,
                                         int evidence_rungs = 3) {
    ClassificationReport r;
    Classification j = classify_J(spec, evidence_rungs);
    Classification k = classify_K(spec, p, evidence_rungs);
    Classification c = classify_CFS(spec, p, N, evidence_rungs);
    r.j_finite = j.verdict;
    r.k_finite = k.verdict;
    r.cfs_holds = c.verdict;
    r.j_tail = std::move(j.tail);
    r.k_tail = std::move(k.tail);
    r.cfs_tail = std::move(c.tail);
    return r;
}

/// Result of the super-additivity sampling check f(s+s') >= f(s)+f(s').
struct SuperAdditivity {
    bool holds = true;
    std::optional<std::pair<double, double>> counterexample;
};

/// Samples (s, s') on a log-spaced grid in (0, 1e6]^2; reports the first pair
/// violating f(s+s') >= f(s)+f(s') - 1e-12 f(s+s').
inline SuperAdditivity check_superadditive(const NonlinearitySpec& spec,
                                           int sample_count = 48) {
    if (sample_count < 1) throw precondition_error("check_superadditive: sample_count >= 1");
    std::vector<double> grid(sample_count);
    const double lo = -6.0, hi = 6.0;
    for (int i = 0; i < sample_count; ++i) {
        const double t = sample_count == 1 ? 1.0 : double(i) / (sample_count - 1);
        grid[i] = std::pow(10.0, lo + t * (hi - lo));
    }
    SuperAdditivity out;
    for (int i = 0; i < sample_count; ++i) {
        for (int j = i; j < sample_count; ++j) {
            const double s = grid[i], t = grid[j];
            const double fsum = eval_f(spec, s + t);
            if (fsum < eval_f(spec, s) + eval_f(spec, t) - 1e-12 * fsum) {
                out.holds = false;
                out.counterexample = {s, t};
                return out;
            }
        }
    }
    return out;
}

}  // namespace plap
