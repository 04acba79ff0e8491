#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "operators.hpp"
#include "physics.hpp"
#include "solver.hpp"

namespace chns {

struct EnergyReport {
    double t = 0.0;
    double J = 0.0;
    double dJ_dt = 0.0;                // backward difference
    double wall_dissipation = 0.0;     // λ ||φ_t||²_Γ
    double chem_dissipation = 0.0;     // λγ ||∇μ||²
    double viscous_dissipation = 0.0;  // ν ||∇u||²
    double residual = 0.0;             // chem + visc + δJ - ϱ (fitted δ, ϱ)
};

struct AbsorptionFit {
    double delta = 0.0;
    double rho_over_delta = 0.0;
    double rho1 = 0.0;          // common absorbing level (sup of plateaus)
    double max_violation = 0.0; // worst J(t) - (e^{-δt}J(0) + ϱ/δ)
};

// One ledger row; prev may be null for the first snapshot of a run.
inline EnergyReport ledger_row(Operators& ops, const ModelParams& par,
                               const FieldState* prev, const FieldState& s,
                               double delta = 0.0, double rho = 0.0) {
    const Grid& g = ops.grid();
    EnergyReport r;
    r.t = s.t;
    r.J = energy_J(ops, s, par).total;
    r.chem_dissipation = par.lambda * par.gamma * ops.grad_sq_neumann(s.mu);
    r.viscous_dissipation = par.nu * ops.grad_sq_velocity(s.u);
    if (prev) {
        const double dt = s.t - prev->t;
        r.dJ_dt = (r.J - energy_J(ops, *prev, par).total) / dt;
        double w = 0.0;
        for (int i = 0; i < g.nx(); ++i) {
            const double dl = (s.phi.lower[i] - prev->phi.lower[i]) / dt;
            const double du = (s.phi.upper[i] - prev->phi.upper[i]) / dt;
            w += dl * dl + du * du;
        }
        r.wall_dissipation = par.lambda * w * g.wall_weight();
    }
    r.residual = r.chem_dissipation + r.viscous_dissipation + delta * r.J - rho;
    return r;
}

// Energy/dissipation ledger from consecutive snapshots at uniform spacing.
inline std::vector<EnergyReport> dissipation_ledger(Operators& ops, const ModelParams& par,
                                                    const std::vector<FieldState>& snaps,
                                                    double delta = 0.0, double rho = 0.0) {
    if (snaps.size() < 2) throw std::invalid_argument("need at least two snapshots");
    const double dt = snaps[1].t - snaps[0].t;
    for (size_t n = 1; n < snaps.size(); ++n) {
        const double d = snaps[n].t - snaps[n - 1].t;
        if (std::abs(d - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("non-uniform snapshot cadence");
    }
    std::vector<EnergyReport> out;
    out.reserve(snaps.size());
    for (size_t n = 0; n < snaps.size(); ++n)
        out.push_back(ledger_row(ops, par, n ? &snaps[n - 1] : nullptr, snaps[n],
                                 delta, rho));
    return out;
}

// Integrated defect of the discrete energy balance over the ledger (h = 0):
// sum |dJ/dt + 2(wall + chem + visc)| dt.  First-order in the step size.
inline double ledger_balance_defect(const std::vector<EnergyReport>& led) {
    if (led.size() < 2) return 0.0;
    const double dt = led[1].t - led[0].t;
    double acc = 0.0;
    for (size_t n = 1; n < led.size(); ++n) {
        const EnergyReport& r = led[n];
        acc += std::abs(r.dJ_dt + 2.0 * (r.wall_dissipation + r.chem_dissipation
                                         + r.viscous_dissipation)) * dt;
    }
    return acc;
}

// Joint decay fit over several J series on a common time grid.  Each series
// must plateau (relative change < 1e-3 over the last 10%).
inline AbsorptionFit fit_absorption(const std::vector<std::vector<double>>& series,
                                    double dt, double tol = 1e-6) {
    if (series.size() < 1 || dt <= 0.0) throw std::invalid_argument("bad fit input");
    std::vector<double> plateau(series.size());
    for (size_t s = 0; s < series.size(); ++s) {
        const auto& J = series[s];
        if (J.size() < 20) throw std::invalid_argument("series too short");
        const size_t tail = std::max<size_t>(2, J.size() / 10);
        double lo = J[J.size() - tail], hi = lo, mean = 0.0;
        for (size_t n = J.size() - tail; n < J.size(); ++n) {
            lo = std::min(lo, J[n]);
            hi = std::max(hi, J[n]);
            mean += J[n];
        }
        mean /= tail;
        if (hi - lo > 1e-3 * std::max(std::abs(mean), 1e-12))
            throw std::runtime_error("no plateau reached");
        plateau[s] = mean;
    }
    AbsorptionFit fit;
    fit.rho1 = *std::max_element(plateau.begin(), plateau.end());
    fit.rho_over_delta = fit.rho1;

    // slope of log(J - plateau) where the excess is resolvable
    double delta = std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < series.size(); ++s) {
        const auto& J = series[s];
        const double J0 = J[0];
        const double floor = std::max(1e-12, 1e-5 * std::abs(J0 - plateau[s]));
        double st = 0, sy = 0, stt = 0, sty = 0;
        int n = 0;
        for (size_t i = 0; i < J.size(); ++i) {
            const double ex = J[i] - plateau[s];
            if (ex <= floor) break;
            const double t = i * dt, y = std::log(ex);
            st += t; sy += y; stt += t * t; sty += t * y;
            ++n;
        }
        if (n >= 5) {
            const double slope = (n * sty - st * sy) / (n * stt - st * st);
            if (-slope < delta) delta = -slope;
        }
    }
    if (!std::isfinite(delta)) delta = 1e-6;  // degenerate (already on plateau)
    delta = std::max(delta, 1e-6);

    // shrink until the envelope bound holds on every series
    for (int iter = 0; iter < 200; ++iter) {
        double worst = -std::numeric_limits<double>::infinity();
        for (size_t s = 0; s < series.size(); ++s) {
            const auto& J = series[s];
            for (size_t i = 0; i < J.size(); ++i) {
                const double bound = std::exp(-delta * i * dt) * J[0] + fit.rho_over_delta;
                worst = std::max(worst, J[i] - bound);
            }
        }
        fit.max_violation = worst;
        if (worst <= tol) break;
        delta *= 0.97;
    }
    fit.delta = delta;
    return fit;
}

struct GronwallReport {
    std::vector<double> t;
    std::vector<double> D;        // ||u1-u2||² + λ ||φ1-φ2||²_{H¹σ}
    std::vector<double> L;        // C(1 + ||φ1||²_{H²σ} + ||φ2||²_{H²σ} + ||∇u2||² + ||∇μ2||²)
    std::vector<double> bound;    // D(0) exp(∫L)
    double M_T = 0.0;             // exp(∫₀ᵀ L)
    double worst_ratio = 0.0;     // max D(t)/bound(t)
    bool separation_ok = true;
};

// squared H² surrogate: ||Δφ||²_{L²(Ω)} + ||-αΔ_Γφ + ∂φ/∂n + βφ||²_{L²(Γ)}
inline double h2sigma_sq(Operators& ops, const ScalarWithTrace& phi) {
    Array2D lap = ops.neg_laplacian(phi);
    WallArray lo, hi;
    ops.wall_operator(phi, lo, hi);
    return ops.l2_sq_bulk(lap) + ops.l2_sq_wall(lo) + ops.l2_sq_wall(hi);
}

inline GronwallReport gronwall_check(Operators& ops, const ModelParams& par,
                                     const std::vector<FieldState>& run1,
                                     const std::vector<FieldState>& run2,
                                     double C, double slack = 10.0) {
    if (run1.size() != run2.size() || run1.size() < 2)
        throw std::invalid_argument("runs must share cadence and length");
    const Grid& g = ops.grid();
    const double m1 = g.bulk_mean(run1[0].phi.bulk);
    const double m2 = g.bulk_mean(run2[0].phi.bulk);
    if (std::abs(m1 - m2) > 1e-10 * std::max(1.0, std::abs(m1)))
        throw std::invalid_argument("mean mismatch");
    GronwallReport rep;
    const size_t n = run1.size();
    rep.t.resize(n); rep.D.resize(n); rep.L.resize(n); rep.bound.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const FieldState& a = run1[i];
        const FieldState& b = run2[i];
        rep.t[i] = a.t;
        VectorField du = a.u;
        du -= b.u;
        ScalarWithTrace dphi = a.phi;
        dphi -= b.phi;
        rep.D[i] = ops.l2_sq_velocity(du) + par.lambda * ops.h1sigma_sq(dphi);
        rep.L[i] = C * (1.0 + h2sigma_sq(ops, a.phi) + h2sigma_sq(ops, b.phi)
                        + ops.grad_sq_velocity(b.u) + ops.grad_sq_neumann(b.mu));
    }
    double integral = 0.0;
    rep.bound[0] = rep.D[0];
    rep.worst_ratio = 0.0;
    for (size_t i = 1; i < n; ++i) {
        const double dt = rep.t[i] - rep.t[i - 1];
        integral += 0.5 * (rep.L[i] + rep.L[i - 1]) * dt;
        rep.bound[i] = rep.D[0] * std::exp(integral);
        if (rep.bound[i] > 0.0)
            rep.worst_ratio = std::max(rep.worst_ratio, rep.D[i] / rep.bound[i]);
    }
    rep.M_T = std::exp(integral);
    rep.separation_ok = (rep.D[0] == 0.0) ? true : (rep.worst_ratio <= slack);
    return rep;
}

// Smallest C making the Gronwall bound hold on a reference pair; freeze the
// result in the configuration for later checks.
inline double calibrate_gronwall_C(Operators& ops, const ModelParams& par,
                                   const std::vector<FieldState>& run1,
                                   const std::vector<FieldState>& run2) {
    GronwallReport base = gronwall_check(ops, par, run1, run2, 1.0, 1e300);
    double need = 1e-6;
    double integral = 0.0;
    for (size_t i = 1; i < base.t.size(); ++i) {
        const double dt = base.t[i] - base.t[i - 1];
        integral += 0.5 * (base.L[i] + base.L[i - 1]) * dt;  // C = 1 units
        if (base.D[i] > 0.0 && base.D[0] > 0.0 && integral > 0.0) {
            const double lg = std::log(base.D[i] / base.D[0]);
            if (lg > 0.0) need = std::max(need, lg / integral);
        }
    }
    return need;
}

struct TimeAvgReport {
    std::vector<double> window_start;
    std::vector<double> window_value;  // ∫||∇u||² + λ∫||φ||²_{H²σ} + (∫ dual)²
    double rho2 = 0.0;                 // sup over post-burn-in windows
    double median = 0.0;
};

// Sliding-window integrals over segments of length ell; time derivatives by
// centered differences of snapshots (one-sided at the ends).
inline TimeAvgReport time_averaged_bounds(Operators& ops, const ModelParams& par,
                                          const std::vector<FieldState>& snaps,
                                          double ell, double burn_in_frac = 0.2) {
    if (snaps.size() < 3) throw std::invalid_argument("run too short");
    const double dt = snaps[1].t - snaps[0].t;
    const int W = (int)std::llround(ell / dt);
    if (W < 1 || W >= (int)snaps.size()) throw std::invalid_argument("window longer than run");
    const size_t n = snaps.size();
    std::vector<double> a(n), c(n);
    for (size_t i = 0; i < n; ++i) {
        a[i] = ops.grad_sq_velocity(snaps[i].u)
             + par.lambda * h2sigma_sq(ops, snaps[i].phi);
        // dual norms of the time derivative
        const size_t lo = (i == 0) ? 0 : i - 1;
        const size_t hi = (i + 1 == n) ? i : i + 1;
        const double span = snaps[hi].t - snaps[lo].t;
        VectorField ut = snaps[hi].u;
        ut -= snaps[lo].u;
        ut *= 1.0 / span;
        ScalarWithTrace pt = snaps[hi].phi;
        pt -= snaps[lo].phi;
        for (auto& x : pt.bulk.v) x /= span;
        for (auto& x : pt.lower) x /= span;
        for (auto& x : pt.upper) x /= span;
        // mass conservation keeps the mean at roundoff; remove it exactly so
        // the mean-zero dual norm accepts the functional
        const double pm = ops.grid().bulk_mean(pt.bulk);
        for (auto& x : pt.bulk.v) x -= pm;
        c[i] = ops.dual_norm_V(ut) + ops.dual_norm_h1sigma(pt);
    }
    // trapezoid prefix sums
    std::vector<double> A(n, 0.0), Cs(n, 0.0);
    for (size_t i = 1; i < n; ++i) {
        A[i] = A[i - 1] + 0.5 * (a[i] + a[i - 1]) * dt;
        Cs[i] = Cs[i - 1] + 0.5 * (c[i] + c[i - 1]) * dt;
    }
    TimeAvgReport rep;
    const size_t first = (size_t)(burn_in_frac * (n - 1));
    for (size_t i = first; i + W < n; ++i) {
        const double w1 = A[i + W] - A[i];
        const double w3 = Cs[i + W] - Cs[i];
        rep.window_start.push_back(snaps[i].t);
        rep.window_value.push_back(w1 + w3 * w3);
    }
    if (rep.window_value.empty()) throw std::invalid_argument("window longer than run");
    rep.rho2 = *std::max_element(rep.window_value.begin(), rep.window_value.end());
    std::vector<double> sorted = rep.window_value;
    std::sort(sorted.begin(), sorted.end());
    rep.median = sorted[sorted.size() / 2];
    return rep;
}

} // namespace chns
