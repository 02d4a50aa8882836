#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plap/errors.hpp"
#include "plap/exact_solutions.hpp"
#include "plap/io.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/ode_flow.hpp"
#include "plap/pde_solver.hpp"
#include "plap/quadrature.hpp"
#include "plap/steady_states.hpp"

namespace plap {

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        default: return "inconclusive";
    }
}

/// One checked quantity: pass iff value <= threshold (at_most) or
/// value >= threshold (!at_most).
struct Metric {
    std::string label;
    double value = 0.0;
    double threshold = 0.0;
    bool at_most = true;
    bool pass = false;
};

struct ExperimentReport {
    std::string name;
    json parameters;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<Metric> metrics;
    std::vector<std::string> artifacts;
    std::string note;

    void add_metric(const std::string& label, double value, double threshold,
                    bool at_most = true) {
        Metric m{label, value, threshold, at_most, false};
        m.pass = at_most ? value <= threshold : value >= threshold;
        metrics.push_back(m);
    }
    /// Pass only if every metric satisfies its declared threshold.
    void settle() {
        verdict = Verdict::Pass;
        for (const auto& m : metrics)
            if (!m.pass) verdict = Verdict::Fail;
    }
};

inline json report_to_json(const ExperimentReport& r) {
    json ms = json::array();
    for (const auto& m : r.metrics)
        ms.push_back({{"label", m.label},
                      {"value", m.value},
                      {"threshold", m.threshold},
                      {"comparison", m.at_most ? "<=" : ">="},
                      {"pass", m.pass}});
    return json{{"name", r.name},           {"parameters", r.parameters},
                {"verdict", to_string(r.verdict)}, {"metrics", ms},
                {"artifacts", r.artifacts}, {"note", r.note}};
}

/// Outer radius that emulates the whole-space problem: twice the support
/// radius at the horizon for p > 2, or the radius where the self-similar
/// profile drops below 1e-8 of its peak for p <= 2.
inline double default_outer_radius(const BarenblattParams& b, double T) {
    if (b.p > 2.0) return 2.0 * *support_radius(b, T);
    const double peak = eval_barenblatt(b, 0.0, T);
    double R = 1.0;
    while (eval_barenblatt(b, R, T) > 1e-8 * peak && R < 1e6) R *= 1.25;
    return R;
}

// ---------------------------------------------------------------------------
// fundamental solutions (Dirac ladder)
// ---------------------------------------------------------------------------

struct FundamentalConfig {
    double p = 3.0;
    int N = 1;
    double k = 1.0;
    NonlinearitySpec spec = NonlinearitySpec::power_log(1.5, 1.0);
    std::vector<double> eps_ladder = {0.02, 0.01, 0.005, 0.0025};
    double T = 1.0;
    int cells = 1000;
    double R = 0.0;          ///< 0 = auto
    double h = 0.0;          ///< 0 = default_time_step
    double newton_tol = 1e-13;
    double balance_tol = 1e-2;   ///< continuum mass-balance tolerance (rel. to k)
    std::string out_dir;
};

struct FundamentalRun {
    double eps = 0.0;
    RadialField initial;
    SolveResult result;
    double identity_error = 0.0;    ///< max |mass+A-mass0|/mass0 over steps
    double domination_excess = 0.0; ///< max (u - v_k) over snapshots
    double monotone_excess = 0.0;   ///< max increase in r
};

/// Solves from v_k(., eps) down an eps ladder and checks mass identity,
/// domination by v_k, radial monotonicity and initial-mass recovery.
inline ExperimentReport run_fundamental(const FundamentalConfig& cfg,
                                        std::vector<FundamentalRun>* runs_out = nullptr) {
    if (!(cfg.p > 2.0 * cfg.N / (cfg.N + 1.0)))
        throw precondition_error("run_fundamental: requires p > 2N/(N+1)");
    if (classify_CFS(cfg.spec, cfg.p, cfg.N, 0).verdict == Ternary::Infinite)
        throw precondition_error("run_fundamental: growth condition (CFS) fails");

    const BarenblattParams b = make_barenblatt(cfg.p, cfg.N, cfg.k);
    const double R = cfg.R > 0.0 ? cfg.R : default_outer_radius(b, cfg.T);
    auto grid = std::make_shared<RadialGrid>(cfg.N, R, cfg.cells);

    ExperimentReport rep;
    rep.name = "fundamental";
    rep.parameters = {{"p", cfg.p}, {"N", cfg.N}, {"k", cfg.k}, {"R", R},
                      {"cells", cfg.cells}, {"T", cfg.T}};
    to_json(rep.parameters["spec"], cfg.spec);

    std::vector<double> balance_defects, absorbed_totals;
    double ident_worst = 0.0, dom_worst = 0.0, mono_worst = 0.0, mass_rec_worst = 0.0;
    double dom_slack = 0.0;
    try {
        for (double eps : cfg.eps_ladder) {
            FundamentalRun run;
            run.eps = eps;
            run.initial = dirac_initial(b, grid, eps);
            SolveConfig sc;
            sc.h = cfg.h > 0.0 ? cfg.h : default_time_step(grid->dr, cfg.p);
            sc.T = cfg.T;
            sc.newton_tol = cfg.newton_tol;
            sc.boundary = BoundaryKind::ZeroDirichlet;
            sc.record_times = {0.25 * cfg.T, 0.5 * cfg.T, cfg.T};
            run.result = solve(run.initial, cfg.spec, cfg.p, sc);

            const double mass0 = discrete_mass(run.initial);
            for (const auto& row : run.result.ledger)
                run.identity_error = std::max(
                    run.identity_error,
                    std::fabs(row.mass + row.absorbed_cum + row.boundary_loss_cum -
                              mass0) / mass0);
            // gradient scale of the initial profile, for the discretization slack
            double gscale = 0.0;
            for (int j = 1; j < grid->cells; ++j)
                gscale = std::max(gscale, std::fabs(run.initial.values[j] -
                                                    run.initial.values[j - 1]) / grid->dr);
            dom_slack = std::max(dom_slack, (sc.h + grid->dr) * gscale * 0.5);
            for (std::size_t s = 0; s < run.result.snapshots.size(); ++s) {
                const auto& snap = run.result.snapshots[s];
                for (int j = 0; j < grid->cells; ++j) {
                    const double v = eval_barenblatt(b, grid->center[j], snap.time);
                    run.domination_excess =
                        std::max(run.domination_excess, snap.values[j] - v);
                    if (j > 0)
                        run.monotone_excess = std::max(
                            run.monotone_excess, snap.values[j] - snap.values[j - 1]);
                }
            }
            mass_rec_worst = std::max(mass_rec_worst, std::fabs(mass0 - cfg.k) / cfg.k);
            balance_defects.push_back(
                std::fabs(run.result.ledger.back().mass +
                          run.result.ledger.back().absorbed_cum - cfg.k) / cfg.k);
            absorbed_totals.push_back(run.result.ledger.back().absorbed_cum);
            ident_worst = std::max(ident_worst, run.identity_error);
            dom_worst = std::max(dom_worst, run.domination_excess);
            mono_worst = std::max(mono_worst, run.monotone_excess);
            if (!cfg.out_dir.empty()) {
                const std::string path =
                    cfg.out_dir + "/fundamental_eps" + format_g17(eps) + ".csv";
                write_field_csv(path, run.result.snapshots.back());
                rep.artifacts.push_back(path);
            }
            if (runs_out) runs_out->push_back(std::move(run));
        }
    } catch (const numerical_error& e) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = std::string("solver failure: ") + e.what();
        return rep;
    }

    const double peak0 = eval_barenblatt(b, 0.0, cfg.eps_ladder.front());
    rep.add_metric("mass_identity_rel_error", ident_worst, 1e-10);
    rep.add_metric("domination_excess", dom_worst, 1e-6 * peak0 + dom_slack);
    rep.add_metric("radial_monotonicity_excess", mono_worst, 1e-8 * peak0);
    rep.add_metric("initial_mass_recovery_rel_error", mass_rec_worst, 1e-4);
    rep.add_metric("continuum_balance_defect_finest", balance_defects.back(),
                   cfg.balance_tol);
    // absorbed totals must be Cauchy along the eps ladder
    if (absorbed_totals.size() >= 3) {
        const std::size_t n = absorbed_totals.size();
        const double d1 = std::fabs(absorbed_totals[n - 1] - absorbed_totals[n - 2]);
        const double d0 = std::fabs(absorbed_totals[n - 2] - absorbed_totals[n - 3]);
        rep.add_metric("absorbed_ladder_ratio", d0 > 0.0 ? d1 / d0 : 0.0, 1.0);
    }
    rep.settle();
    return rep;
}

// ---------------------------------------------------------------------------
// Lemma int: space-time integrability of f(v_k) near t = 0
// ---------------------------------------------------------------------------

struct LemmaIntConfig {
    double p = 2.0;
    int N = 2;
    double k = 1.0;
    NonlinearitySpec spec = NonlinearitySpec::power_log(1.5, 0.0);
    int rungs = 6;            ///< delta ladder: delta_j = 8^{-j}
    std::string out_dir;
};

/// 2-d quadrature of ∬_{B_1 x (delta, 1)} f(v_k) down a delta ladder; the
/// integrals are Cauchy exactly when the growth condition holds. Observed
/// verdict must match classify_CFS.
inline ExperimentReport run_lemma_int(const LemmaIntConfig& cfg) {
    if (!(cfg.p > 2.0 * cfg.N / (cfg.N + 1.0)))
        throw precondition_error("run_lemma_int: requires p > 2N/(N+1)");
    const BarenblattParams b = make_barenblatt(cfg.p, cfg.N, cfg.k);

    auto q_of_t = [&](double t) {
        auto g = [&](double r) {
            return eval_f(cfg.spec, eval_barenblatt(b, r, t)) *
                   std::pow(r, cfg.N - 1);
        };
        return unit_sphere_area(cfg.N) * integrate(g, 0.0, 1.0, 1e-12, 1e-8).value;
    };

    std::vector<double> deltas, partials;
    double acc = 0.0, hi = 1.0;
    for (int j = 1; j <= cfg.rungs; ++j) {
        const double lo = std::pow(8.0, -j);
        auto gl = [&](double u) {  // log-time substitution
            const double t = std::exp(u);
            return q_of_t(t) * t;
        };
        acc += integrate(gl, std::log(lo), std::log(hi), 1e-12, 1e-7).value;
        deltas.push_back(lo);
        partials.push_back(acc);
        hi = lo;
    }

    ExperimentReport rep;
    rep.name = "lemma_int";
    rep.parameters = {{"p", cfg.p}, {"N", cfg.N}, {"k", cfg.k}, {"rungs", cfg.rungs}};
    to_json(rep.parameters["spec"], cfg.spec);

    // classify the ladder: ratios of successive increments
    std::vector<double> ratios;
    for (std::size_t i = 2; i < partials.size(); ++i) {
        const double d1 = partials[i] - partials[i - 1];
        const double d0 = partials[i - 1] - partials[i - 2];
        if (d0 > 0.0) ratios.push_back(d1 / d0);
    }
    bool convergent = ratios.size() >= 3, divergent = ratios.size() >= 3;
    for (std::size_t i = ratios.size() >= 3 ? ratios.size() - 3 : 0; i < ratios.size();
         ++i) {
        convergent = convergent && ratios[i] <= 0.5;
        divergent = divergent && ratios[i] >= 1.2;
    }
    const Ternary want = classify_CFS(cfg.spec, cfg.p, cfg.N, 0).verdict;
    rep.note = convergent ? "convergent" : divergent ? "divergent" : "unresolved";
    if (!convergent && !divergent) {
        rep.verdict = Verdict::Inconclusive;
    } else {
        const bool match = (convergent && want == Ternary::Finite) ||
                           (divergent && want == Ternary::Infinite);
        rep.add_metric("verdict_matches_classifier", match ? 1.0 : 0.0, 1.0, false);
        rep.settle();
    }
    if (!cfg.out_dir.empty()) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < deltas.size(); ++i)
            rows.push_back({deltas[i], partials[i]});
        const std::string path = cfg.out_dir + "/lemma_int_ladder.csv";
        write_csv(path, "delta,integral", rows);
        rep.artifacts.push_back(path);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// k -> infinity limit at a probe point
// ---------------------------------------------------------------------------

struct KLimitConfig {
    double p = 3.0;
    int N = 1;
    NonlinearitySpec spec = NonlinearitySpec::power_log(1.5, 1.0);
    std::vector<double> k_ladder = {1, 4, 16, 64, 256, 1024, 4096};
    double probe_r = 0.0;
    double probe_t = 1.0;
    double eps = 2e-3;
    int cells_per_support = 512;  ///< cells across the support at probe_t
    double newton_tol = 1e-12;
    std::string out_dir;
};

enum class KLimitClass { Saturating, Unbounded, Inconclusive };

struct KLimitOutcome {
    KLimitClass cls = KLimitClass::Inconclusive;
    std::vector<double> values;       ///< u_k(probe) along the ladder
    double phi_inf_value = 0.0;       ///< phi_inf(probe_t) when J finite
    double final_gap_rel = 0.0;       ///< (phi_inf - u_top)/phi_inf
    double gap_shrink = 0.0;          ///< gap(top)/gap(top/256)
    double growth_last = 0.0;         ///< u(top)/u(previous)
};

/// Runs the fundamental pipeline along a mass ladder and classifies the probe
/// values: Saturating toward phi_inf (J finite) or Unbounded (J infinite).
inline ExperimentReport run_k_limit(const KLimitConfig& cfg,
                                    KLimitOutcome* out = nullptr) {
    if (!(cfg.p > 2.0)) throw precondition_error("run_k_limit: requires p > 2");
    if (cfg.spec.family != Family::PowerLog)
        throw precondition_error("run_k_limit: PowerLog specs only");
    if (classify_CFS(cfg.spec, cfg.p, cfg.N, 0).verdict == Ternary::Infinite)
        throw precondition_error("run_k_limit: growth condition (CFS) fails");

    ExperimentReport rep;
    rep.name = "k_limit";
    rep.parameters = {{"p", cfg.p}, {"N", cfg.N}, {"probe_r", cfg.probe_r},
                      {"probe_t", cfg.probe_t}};
    to_json(rep.parameters["spec"], cfg.spec);

    KLimitOutcome res;
    try {
        for (double k : cfg.k_ladder) {
            const BarenblattParams b = barenblatt_params(cfg.p, cfg.N, k);
            const double R = 2.2 * *support_radius(b, cfg.probe_t);
            const double dr_target = *support_radius(b, cfg.probe_t) /
                                     cfg.cells_per_support;
            const int M = std::max(64, static_cast<int>(std::ceil(R / dr_target)));
            auto grid = std::make_shared<RadialGrid>(cfg.N, R, M);
            RadialField init = dirac_initial(b, grid, cfg.eps);
            SolveConfig sc;
            sc.h = default_time_step(grid->dr, cfg.p);
            sc.T = cfg.probe_t;
            sc.newton_tol = cfg.newton_tol;
            sc.boundary = BoundaryKind::ZeroDirichlet;
            sc.record_times = {cfg.probe_t};
            SolveResult sr = solve(init, cfg.spec, cfg.p, sc);
            res.values.push_back(field_value_at(sr.snapshots.back(), cfg.probe_r));
        }
    } catch (const numerical_error& e) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = std::string("solver failure: ") + e.what();
        if (out) *out = res;
        return rep;
    }

    const std::size_t n = res.values.size();
    if (n < 4) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "ladder too short to classify";
        if (out) *out = res;
        return rep;
    }
    double mono_viol = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        mono_viol = std::max(mono_viol, res.values[i - 1] - res.values[i]);
    rep.add_metric("monotone_in_k_violation", mono_viol, 1e-6 * res.values.back());
    res.growth_last = res.values[n - 1] / res.values[n - 2];

    const bool j_finite = classify_J(cfg.spec, 0).verdict == Ternary::Finite;
    if (j_finite) {
        res.phi_inf_value = phi_inf(cfg.spec, cfg.probe_t);
        const double gap_top = res.phi_inf_value - res.values[n - 1];
        const double gap_mid = res.phi_inf_value - res.values[n >= 5 ? n - 5 : 0];
        res.final_gap_rel = gap_top / res.phi_inf_value;
        res.gap_shrink = gap_mid > 0.0 ? gap_top / gap_mid : 0.0;
        rep.add_metric("below_phi_inf", res.values[n - 1],
                       res.phi_inf_value * (1.0 + 1e-3));
        rep.add_metric("gap_shrink_ratio", res.gap_shrink, 0.5);
        res.cls = KLimitClass::Saturating;
        rep.note = "saturating";
    } else {
        const double scale = res.values.front();
        rep.add_metric("unbounded_growth_factor", res.values[n - 1], 5.0 * scale,
                       false);
        rep.add_metric("still_growing_at_top", res.growth_last, 1.1, false);
        res.cls = KLimitClass::Unbounded;
        rep.note = "unbounded";
    }
    if (!cfg.out_dir.empty()) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < n; ++i)
            rows.push_back({cfg.k_ladder[i], res.values[i]});
        const std::string path = cfg.out_dir + "/k_limit_ladder.csv";
        write_csv(path, "k,u_probe", rows);
        rep.artifacts.push_back(path);
    }
    rep.settle();
    if (rep.verdict == Verdict::Fail) res.cls = KLimitClass::Inconclusive;
    if (out) *out = res;
    return rep;
}

// ---------------------------------------------------------------------------
// non-uniqueness: two solutions above/below from the same initial data
// ---------------------------------------------------------------------------

struct NonUniquenessConfig {
    double p = 3.0;
    int N = 1;
    NonlinearitySpec spec = NonlinearitySpec::power_log(1.0, 2.0);
    double a = 1.0, b = 2.0;
    double t_probe = 1.0;
    std::vector<double> R_ladder = {4.0, 8.0, 16.0};
    double dr = 1.0 / 64.0;
    double newton_tol = 1e-12;
    std::string out_dir;
};

/// Builds the bounded solution (truncated data, zero boundary) and the
/// unbounded one (steady-state boundary data) from the same u0 between w_a
/// and w_b, and checks ordering, the phi_inf ceiling, the w_a floor and the
/// final separation.
inline ExperimentReport run_nonuniqueness(const NonUniquenessConfig& cfg) {
    if (!(cfg.p > 2.0 * cfg.N / (cfg.N + 1.0)))
        throw precondition_error("run_nonuniqueness: requires p > 2N/(N+1)");
    if (classify_J(cfg.spec, 0).verdict != Ternary::Finite)
        throw precondition_error("run_nonuniqueness: requires J finite");
    if (classify_K(cfg.spec, cfg.p, 0).verdict != Ternary::Infinite)
        throw precondition_error("run_nonuniqueness: requires K infinite");
    if (!(cfg.a > 0.0 && cfg.b > cfg.a))
        throw precondition_error("run_nonuniqueness: need 0 < a < b");

    ExperimentReport rep;
    rep.name = "nonuniqueness";
    rep.parameters = {{"p", cfg.p}, {"N", cfg.N}, {"a", cfg.a}, {"b", cfg.b},
                      {"t_probe", cfg.t_probe}};
    to_json(rep.parameters["spec"], cfg.spec);

    const double R_top = cfg.R_ladder.back();
    const Medium med{cfg.p, cfg.N};
    SteadyProfile wa, wb;
    try {
        wa = picard_steady(cfg.spec, med, cfg.a, R_top, 1e-10, 4096);
        wb = picard_steady(cfg.spec, med, cfg.b, R_top, 1e-10, 4096);
    } catch (const numerical_error& e) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = std::string("steady-state failure: ") + e.what();
        return rep;
    }
    if (wa.status != SteadyStatus::Global || wb.status != SteadyStatus::Global) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "steady states did not extend to the ladder top";
        return rep;
    }
    auto u0 = [&](double r) { return 0.5 * (wa.value_at(r) + wb.value_at(r)); };
    const double phi_ceiling = phi_inf(cfg.spec, cfg.t_probe);

    auto run_upper = [&](double R) {
        const int M = static_cast<int>(std::lround(R / cfg.dr));
        auto grid = std::make_shared<RadialGrid>(cfg.N, R, M);
        RadialField init{grid, std::vector<double>(M), 0.0};
        for (int j = 0; j < M; ++j) init.values[j] = u0(grid->center[j]);
        SolveConfig sc;
        sc.h = default_time_step(cfg.dr, cfg.p);
        sc.T = cfg.t_probe;
        sc.newton_tol = cfg.newton_tol;
        sc.boundary = BoundaryKind::FixedDirichlet;
        sc.boundary_value = 0.5 * (wa.value_at(R) + wb.value_at(R));
        sc.record_times = {cfg.t_probe};
        return solve(init, cfg.spec, cfg.p, sc).snapshots.back();
    };
    auto run_lower = [&](double Rtrunc) {
        const double Rdom = 2.0 * R_top;
        const int M = static_cast<int>(std::lround(Rdom / cfg.dr));
        auto grid = std::make_shared<RadialGrid>(cfg.N, Rdom, M);
        RadialField init{grid, std::vector<double>(M), 0.0};
        for (int j = 0; j < M; ++j)
            init.values[j] = grid->center[j] <= Rtrunc ? u0(grid->center[j]) : 0.0;
        SolveConfig sc;
        sc.h = default_time_step(cfg.dr, cfg.p);
        sc.T = cfg.t_probe;
        sc.newton_tol = cfg.newton_tol;
        sc.boundary = BoundaryKind::ZeroDirichlet;
        sc.record_times = {cfg.t_probe};
        return solve(init, cfg.spec, cfg.p, sc).snapshots.back();
    };

    std::vector<RadialField> uppers, lowers;
    try {
        for (double R : cfg.R_ladder) {
            uppers.push_back(run_upper(R));
            lowers.push_back(run_lower(R));
        }
    } catch (const numerical_error& e) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = std::string("solver failure: ") + e.what();
        return rep;
    }

    // ladder stabilization on the inner half of the smallest domain
    const double r_stab = 0.5 * cfg.R_ladder.front();
    auto stab_diff = [&](const RadialField& f1, const RadialField& f2) {
        double d = 0.0;
        for (int j = 0; j < f1.grid->cells && f1.grid->center[j] <= r_stab; ++j)
            d = std::max(d, std::fabs(f1.values[j] - f2.values[j]));
        return d;
    };
    const std::size_t L = uppers.size();
    const double stab_u1 = stab_diff(uppers[L - 2], uppers[L - 1]);
    const double stab_u0 = stab_diff(uppers[L - 3], uppers[L - 2]);
    const double stab_l1 = stab_diff(lowers[L - 2], lowers[L - 1]);
    if (stab_u0 > 0.0 && stab_u1 / stab_u0 > 1.0 && stab_u1 > 1e-6) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "upper-solution ladder did not stabilize";
        return rep;
    }

    const RadialField& uu = uppers.back();   // \bar u on [0, R_top]
    const RadialField& ul = lowers.back();   // \underline u on [0, 2 R_top]
    const double scale = phi_ceiling;
    const double slack =
        (default_time_step(cfg.dr, cfg.p) + cfg.dr) * std::max(1.0, scale);

    double order_viol = 0.0, ceil_viol = 0.0, floor_viol = 0.0, sep = 0.0;
    double lower_monotone_viol = 0.0;
    for (int j = 0; j < uu.grid->cells; ++j) {
        const double r = uu.grid->center[j];
        order_viol = std::max(order_viol, ul.values[j] - uu.values[j]);
        floor_viol = std::max(floor_viol, wa.value_at(r) - uu.values[j]);
        sep = std::max(sep, uu.values[j] - ul.values[j]);
    }
    for (int j = 0; j < ul.grid->cells; ++j) {
        const double r = ul.grid->center[j];
        const double bound = std::min(wb.value_at(r), phi_ceiling);
        ceil_viol = std::max(ceil_viol, ul.values[j] - bound);
    }
    for (std::size_t i = 1; i < lowers.size(); ++i)
        for (int j = 0; j < lowers[i].grid->cells; ++j)
            lower_monotone_viol = std::max(
                lower_monotone_viol, lowers[i - 1].values[j] - lowers[i].values[j]);

    const double r_probe = 0.5 * R_top;
    rep.add_metric("ordering_violation", order_viol, 1e-6);
    rep.add_metric("phi_inf_ceiling_violation", ceil_viol, slack);
    rep.add_metric("w_a_floor_violation", floor_viol, slack);
    rep.add_metric("separation_at_probe", sep, 0.25 * wa.value_at(r_probe), false);
    rep.add_metric("lower_ladder_monotone_violation", lower_monotone_viol, 1e-8);
    rep.add_metric("lower_ladder_stabilization", stab_l1, 1e-2 * std::max(1.0, scale));
    if (!cfg.out_dir.empty()) {
        const std::string pu = cfg.out_dir + "/nonuniqueness_upper.csv";
        const std::string pl = cfg.out_dir + "/nonuniqueness_lower.csv";
        write_field_csv(pu, uu);
        write_field_csv(pl, ul);
        rep.artifacts.push_back(pu);
        rep.artifacts.push_back(pl);
    }
    rep.settle();
    return rep;
}

// ---------------------------------------------------------------------------
// universal estimate: u_k <= min(phi_inf, W_{eps,R}) on the overlap
// ---------------------------------------------------------------------------

struct UniversalConfig {
    double p = 3.0;
    int N = 1;
    double k = 1.0;
    NonlinearitySpec spec = NonlinearitySpec::power_log(3.0, 0.0);
    double annulus_eps = 0.25;
    double annulus_R = 4.0;
    std::vector<double> m_ladder = {1e2, 1e4, 1e6};
    double T = 1.0;
    double run_eps = 5e-3;
    int cells = 960;
    double slack = 0.05;
    std::string out_dir;
};

inline ExperimentReport run_universal_estimate(const UniversalConfig& cfg) {
    if (classify_K(cfg.spec, cfg.p, 0).verdict != Ternary::Finite)
        throw precondition_error("run_universal_estimate: requires K finite");
    if (classify_J(cfg.spec, 0).verdict != Ternary::Finite)
        throw precondition_error("run_universal_estimate: requires J finite");
    if (!check_superadditive(cfg.spec).holds)
        throw precondition_error("run_universal_estimate: requires super-additivity");

    ExperimentReport rep;
    rep.name = "universal_estimate";
    rep.parameters = {{"p", cfg.p}, {"N", cfg.N}, {"k", cfg.k},
                      {"eps", cfg.annulus_eps}, {"R", cfg.annulus_R}};
    to_json(rep.parameters["spec"], cfg.spec);

    const Medium med{cfg.p, cfg.N};
    std::vector<BlowupAnnulusProfile> Ws;
    try {
        for (double m : cfg.m_ladder)
            Ws.push_back(blowup_annulus(cfg.spec, med, cfg.annulus_eps, cfg.annulus_R,
                                        m, 768));
    } catch (const numerical_error& e) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = std::string("annulus solver failure: ") + e.what();
        return rep;
    }
    const double mid = 0.5 * (cfg.annulus_eps + cfg.annulus_R);
    std::vector<double> mids;
    for (const auto& W : Ws) mids.push_back(W.value_at(mid));
    double ladder_ratio = 0.0;
    if (mids.size() >= 3) {
        const double d1 = std::fabs(mids[mids.size() - 1] - mids[mids.size() - 2]);
        const double d0 = std::fabs(mids[mids.size() - 2] - mids[mids.size() - 3]);
        ladder_ratio = d0 > 0.0 ? d1 / d0 : 0.0;
    }
    const BlowupAnnulusProfile& W = Ws.back();

    // fundamental run dominated by the universal bound
    const BarenblattParams b = make_barenblatt(cfg.p, cfg.N, cfg.k);
    const double R_dom =
        std::max(default_outer_radius(b, cfg.T), 1.2 * cfg.annulus_R);
    auto grid = std::make_shared<RadialGrid>(cfg.N, R_dom, cfg.cells);
    SolveResult sr;
    try {
        RadialField init = dirac_initial(b, grid, cfg.run_eps);
        SolveConfig sc;
        sc.h = default_time_step(grid->dr, cfg.p);
        sc.T = cfg.T;
        sc.boundary = BoundaryKind::ZeroDirichlet;
        sc.record_times = {0.05, 0.1, 0.2, 0.5, 1.0};
        for (auto& t : sc.record_times) t *= cfg.T;
        sr = solve(init, cfg.spec, cfg.p, sc);
    } catch (const numerical_error& e) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = std::string("solver failure: ") + e.what();
        return rep;
    }

    double worst_ratio = 0.0;
    for (const auto& snap : sr.snapshots) {
        const double phi_cap = phi_inf(cfg.spec, snap.time);
        for (int j = 0; j < grid->cells; ++j) {
            const double r = grid->center[j];
            if (r <= 2.0 * cfg.annulus_eps || r >= 0.5 * cfg.annulus_R) continue;
            const double bound = std::min(phi_cap, W.value_at(r));
            if (bound > 0.0)
                worst_ratio = std::max(worst_ratio, snap.values[j] / bound);
        }
    }
    rep.add_metric("u_over_bound_max", worst_ratio, 1.0 + cfg.slack);
    rep.add_metric("annulus_ladder_ratio", ladder_ratio, 1.0);
    if (!cfg.out_dir.empty()) {
        const std::string pw = cfg.out_dir + "/universal_annulus.csv";
        write_profile_csv(pw, W.radii, W.values);
        rep.artifacts.push_back(pw);
    }
    rep.settle();
    return rep;
}

// ---------------------------------------------------------------------------
// razor-blade decay bound (fast diffusion, pure)
// ---------------------------------------------------------------------------

struct RazorBladeConfig {
    double p = 1.5;
    int N = 1;
    double R0 = 1.0;
    double amplitude = 1.0;
    double T = 1.0;
    double R_dom = 32.0;
    int cells = 2048;
    double slack = 0.05;
    std::string out_dir;
};

/// Pure-diffusion run from a bump supported in B_{R0}; checks the far-field
/// envelope Lambda_1 (t/(|x|-R0)^p)^{1/(2-p)} with the configured slack for
/// |x| > 1.5 R0 at every recorded time.
inline ExperimentReport run_razor_blade(const RazorBladeConfig& cfg) {
    if (!(cfg.p > 2.0 * cfg.N / (cfg.N + 1.0) && cfg.p < 2.0))
        throw precondition_error("run_razor_blade: requires 2N/(N+1) < p < 2");
    const RazorBladeParams rb = razor_blade_params(cfg.p, cfg.N);

    ExperimentReport rep;
    rep.name = "razor_blade";
    rep.parameters = {{"p", cfg.p}, {"N", cfg.N}, {"R0", cfg.R0},
                      {"amplitude", cfg.amplitude}, {"T", cfg.T}};

    auto grid = std::make_shared<RadialGrid>(cfg.N, cfg.R_dom, cfg.cells);
    RadialField init{grid, std::vector<double>(cfg.cells, 0.0), 0.0};
    const double c = 4.5 / (cfg.R0 * cfg.R0);
    for (int j = 0; j < cfg.cells; ++j) {
        const double r = grid->center[j];
        init.values[j] = r < cfg.R0 ? cfg.amplitude * std::exp(-c * r * r) : 0.0;
    }
    SolveConfig sc;
    sc.h = default_time_step(grid->dr, cfg.p);
    sc.T = cfg.T;
    sc.boundary = BoundaryKind::ZeroDirichlet;
    sc.record_times = {0.05, 0.1, 0.2, 0.5, 1.0};
    for (auto& t : sc.record_times) t *= cfg.T;
    SolveResult sr;
    try {
        sr = solve(init, std::nullopt, cfg.p, sc);
    } catch (const numerical_error& e) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = std::string("solver failure: ") + e.what();
        return rep;
    }

    double worst = 0.0;
    for (const auto& snap : sr.snapshots)
        for (int j = 0; j < cfg.cells; ++j) {
            const double r = grid->center[j];
            if (r <= 1.5 * cfg.R0) continue;
            const double bound = razor_blade_bound(rb, r, snap.time, cfg.R0);
            worst = std::max(worst, snap.values[j] / bound);
        }
    rep.add_metric("u_over_bound_max", worst, 1.0 + cfg.slack);
    if (!cfg.out_dir.empty()) {
        const std::string path = cfg.out_dir + "/razor_blade_final.csv";
        write_field_csv(path, sr.snapshots.back());
        rep.artifacts.push_back(path);
    }
    rep.settle();
    return rep;
}

// ---------------------------------------------------------------------------
// initial trace estimation
// ---------------------------------------------------------------------------

/// Radial test function: smooth ramp up on [r0, r1], plateau 1 on [r1, r2],
/// smooth ramp down on [r2, r3]. A centered cap has r0 = r1 = 0.
struct ZetaBump {
    double r0 = 0.0, r1 = 0.0, r2 = 0.5, r3 = 1.0;

    double operator()(double r) const {
        auto smooth = [](double x) {  // cosine smoothstep on [0, 1]
            return 0.5 - 0.5 * std::cos(M_PI * std::clamp(x, 0.0, 1.0));
        };
        if (r < r0 || r > r3) return 0.0;
        if (r < r1) return smooth((r - r0) / (r1 - r0));
        if (r <= r2) return 1.0;
        return smooth((r3 - r) / (r3 - r2));
    }
};

struct TraceEstimate {
    ZetaBump zeta;
    std::vector<double> times;    ///< decreasing ladder t_1 > t_2 > ...
    std::vector<double> values;   ///< ∫ u(., t_n) zeta dx
    std::optional<double> limit;  ///< Richardson-extrapolated when Cauchy
    bool divergent = false;
    bool paper_backed = true;     ///< false for p < 2 (dichotomy assumes p >= 2)
};

/// Integral ladders ∫ u(., t_n) ζ dx for each test bump, extrapolated to
/// t -> 0 when Cauchy; flagged Divergent when the values grow by more than
/// 1.5x on three consecutive rungs.
inline std::vector<TraceEstimate> estimate_initial_trace(
    const std::vector<RadialField>& snapshots, const std::vector<ZetaBump>& zetas,
    double p = 2.0) {
    if (snapshots.size() < 4)
        throw precondition_error("estimate_initial_trace: need at least 4 snapshots");
    std::vector<const RadialField*> ordered;
    for (const auto& s : snapshots) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const RadialField* a, const RadialField* b) { return a->time > b->time; });

    std::vector<TraceEstimate> out;
    for (const auto& z : zetas) {
        TraceEstimate est;
        est.zeta = z;
        est.paper_backed = p >= 2.0;
        for (const auto* s : ordered) {
            double v = 0.0;
            for (int j = 0; j < s->grid->cells; ++j)
                v += s->grid->volume[j] * s->values[j] * z(s->grid->center[j]);
            est.times.push_back(s->time);
            est.values.push_back(v);
        }
        const std::size_t n = est.values.size();
        int growth_streak = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (est.values[i] > 1.5 * est.values[i - 1] &&
                est.values[i - 1] > 0.0)
                ++growth_streak;
            else
                growth_streak = 0;
            if (growth_streak >= 3) est.divergent = true;
        }
        if (!est.divergent) {
            const double d1 = est.values[n - 1] - est.values[n - 2];
            const double d0 = est.values[n - 2] - est.values[n - 3];
            if (std::fabs(d0) > 0.0 && std::fabs(d1 / d0) < 0.9) {
                const double q = d1 / d0;
                est.limit = est.values[n - 1] + d1 * q / (1.0 - q);
            } else {
                est.limit = est.values[n - 1];
            }
        }
        out.push_back(std::move(est));
    }
    return out;
}

}  // namespace plap
