#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "diagnostics.hpp"
#include "operators.hpp"
#include "solver.hpp"

namespace chns {

// A solution sampled at K+1 uniform times on a window of length ell.  The
// snapshots all belong to one solution, so the bulk mean of φ is common.
struct TrajectorySegment {
    double ell = 1.0;
    std::vector<FieldState> snapshots;  // K+1 entries, spacing ell/K

    int K() const { return (int)snapshots.size() - 1; }
    double spacing() const { return ell / K(); }
    double quadrature(int j) const {
        return (j == 0 || j == K()) ? 0.5 * spacing() : spacing();
    }
};

// χ(t·ℓ).  Off-grid t is linearly interpolated; *interpolated reports it.
inline FieldState evaluate_e(double t, const TrajectorySegment& chi,
                             bool* interpolated = nullptr) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("t must lie in [0, 1]");
    const int K = chi.K();
    const double x = t * K;
    const int j = (int)std::llround(x);
    if (std::abs(x - j) < 1e-9 * std::max(1.0, (double)K)) {
        if (interpolated) *interpolated = false;
        return chi.snapshots[j];
    }
    if (interpolated) *interpolated = true;
    const int lo = (int)std::floor(x);
    const double w = x - lo;
    FieldState out = chi.snapshots[lo];
    const FieldState& hi = chi.snapshots[lo + 1];
    auto mix = [&](double& a, double b) { a = (1.0 - w) * a + w * b; };
    for (size_t m = 0; m < out.u.ux.v.size(); ++m) mix(out.u.ux.v[m], hi.u.ux.v[m]);
    for (size_t m = 0; m < out.u.uy.v.size(); ++m) mix(out.u.uy.v[m], hi.u.uy.v[m]);
    for (size_t m = 0; m < out.phi.bulk.v.size(); ++m) mix(out.phi.bulk.v[m], hi.phi.bulk.v[m]);
    for (size_t m = 0; m < out.phi.lower.size(); ++m) mix(out.phi.lower[m], hi.phi.lower[m]);
    for (size_t m = 0; m < out.phi.upper.size(); ++m) mix(out.phi.upper[m], hi.phi.upper[m]);
    for (size_t m = 0; m < out.mu.v.size(); ++m) mix(out.mu.v[m], hi.mu.v[m]);
    for (size_t m = 0; m < out.p.v.size(); ++m) mix(out.p.v[m], hi.p.v[m]);
    out.t = (1.0 - w) * out.t + w * hi.t;
    return out;
}

namespace detail {
// K snapshot intervals must be a whole number of solver steps
inline int steps_per_sample(double ell, int K, double dt) {
    const double x = ell / (K * dt);
    const int m = (int)std::llround(x);
    if (m < 1 || std::abs(x - m) > 1e-9 * std::max(1.0, x))
        throw std::invalid_argument("ell/K must be a multiple of dt");
    return m;
}
} // namespace detail

// Integrate the initial state over [0, ell]; the first snapshot is the
// initial state itself.
inline TrajectorySegment lift_b(Stepper& st, const FieldState& initial,
                                double ell, int K = 32) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    const int m = detail::steps_per_sample(ell, K, st.scheme().dt);
    TrajectorySegment seg;
    seg.ell = ell;
    seg.snapshots.reserve(K + 1);
    FieldState s = initial;
    seg.snapshots.push_back(s);
    for (int j = 1; j <= K; ++j) {
        for (int n = 0; n < m; ++n) s = st.step(s);
        seg.snapshots.push_back(s);
    }
    return seg;
}

// Solution segment on [t, t+ell] started from χ's initial state.  With
// aligned steps this satisfies the semigroup law bitwise, because the
// integrator is deterministic and a snapshot is a complete state.
inline TrajectorySegment advance_L(Stepper& st, const TrajectorySegment& chi, double t) {
    if (t < 0.0) throw std::invalid_argument("t must be >= 0");
    if (t == 0.0) return chi;
    const double dt = st.scheme().dt;
    const double x = t / dt;
    const int n = (int)std::llround(x);
    if (std::abs(x - n) > 1e-9 * std::max(1.0, x))
        throw std::invalid_argument("t must be a multiple of dt");
    FieldState s = chi.snapshots.front();
    for (int i = 0; i < n; ++i) s = st.step(s);
    return lift_b(st, s, chi.ell, chi.K());
}

namespace detail {
inline void check_compatible(const Grid& g, const TrajectorySegment& a,
                             const TrajectorySegment& b) {
    if (a.snapshots.size() != b.snapshots.size() || a.ell != b.ell)
        throw std::invalid_argument("segments must share length and cadence");
    const double m1 = g.bulk_mean(a.snapshots[0].phi.bulk);
    const double m2 = g.bulk_mean(b.snapshots[0].phi.bulk);
    if (std::abs(m1 - m2) > 1e-10 * std::max(1.0, std::abs(m1)))
        throw std::invalid_argument("mean mismatch");
}
} // namespace detail

// squared phase-space distance: ||u1-u2||² + λ ||φ1-φ2||²_{H¹σ}
inline double state_dist_sq(Operators& ops, const ModelParams& par,
                            const FieldState& a, const FieldState& b) {
    VectorField du = a.u;
    du -= b.u;
    ScalarWithTrace dphi = a.phi;
    dphi -= b.phi;
    return ops.l2_sq_velocity(du) + par.lambda * ops.h1sigma_sq(dphi);
}

inline double dist_l2(Operators& ops, const ModelParams& par,
                      const TrajectorySegment& a, const TrajectorySegment& b) {
    detail::check_compatible(ops.grid(), a, b);
    double acc = 0.0;
    for (int j = 0; j <= a.K(); ++j)
        acc += a.quadrature(j) * state_dist_sq(ops, par, a.snapshots[j], b.snapshots[j]);
    return std::sqrt(acc);
}

// Y-norm distance: space integral of the V×H²σ difference plus the squared
// time integral of the dual norms of the difference's time derivative
// (centered differences, one-sided at the segment ends).
inline double dist_y(Operators& ops, const ModelParams& par,
                     const TrajectorySegment& a, const TrajectorySegment& b) {
    detail::check_compatible(ops.grid(), a, b);
    const int K = a.K();
    double strong = 0.0, dual = 0.0;
    for (int j = 0; j <= K; ++j) {
        VectorField du = a.snapshots[j].u;
        du -= b.snapshots[j].u;
        ScalarWithTrace dphi = a.snapshots[j].phi;
        dphi -= b.snapshots[j].phi;
        strong += a.quadrature(j) * (ops.grad_sq_velocity(du)
                                     + par.lambda * h2sigma_sq(ops, dphi));
        const int lo = (j == 0) ? 0 : j - 1;
        const int hi = (j == K) ? j : j + 1;
        const double span = (hi - lo) * a.spacing();
        VectorField ut = a.snapshots[hi].u;
        ut -= b.snapshots[hi].u;
        ut -= a.snapshots[lo].u;
        ut += b.snapshots[lo].u;
        ut *= 1.0 / span;
        ScalarWithTrace pt = a.snapshots[hi].phi;
        pt -= b.snapshots[hi].phi;
        pt -= a.snapshots[lo].phi;
        ScalarWithTrace add = b.snapshots[lo].phi;  // pt += add
        for (size_t m = 0; m < pt.bulk.v.size(); ++m) pt.bulk.v[m] += add.bulk.v[m];
        for (size_t m = 0; m < pt.lower.size(); ++m) pt.lower[m] += add.lower[m];
        for (size_t m = 0; m < pt.upper.size(); ++m) pt.upper[m] += add.upper[m];
        for (auto& x : pt.bulk.v) x /= span;
        for (auto& x : pt.lower) x /= span;
        for (auto& x : pt.upper) x /= span;
        const double pm = ops.grid().bulk_mean(pt.bulk);
        for (auto& x : pt.bulk.v) x -= pm;  // roundoff mean removal
        dual += a.quadrature(j) * (ops.dual_norm_V(ut) + ops.dual_norm_h1sigma(pt));
    }
    return std::sqrt(strong + dual * dual);
}

struct TrajectoryMetricReport {
    double dist_l2 = 0.0;
    double dist_y = 0.0;
    double smoothing_ratio = 0.0;  // ||L_t χ¹ - L_t χ²||²_Y / dist_l2²
};

// Smoothing ratios for an ensemble of segment pairs advanced by t >= ell.
// A 0/0 pair (both below the 1e-14 floor) reports ratio 0.
inline std::vector<TrajectoryMetricReport> smoothing_check(
        Operators& ops, Stepper& st,
        const std::vector<std::pair<TrajectorySegment, TrajectorySegment>>& pairs,
        double t) {
    if (!pairs.empty() && t < pairs[0].first.ell - 1e-12)
        throw std::invalid_argument("t must be >= ell");
    std::vector<TrajectoryMetricReport> out;
    out.reserve(pairs.size());
    for (const auto& [c1, c2] : pairs) {
        TrajectoryMetricReport rep;
        rep.dist_l2 = dist_l2(ops, st.params(), c1, c2);
        TrajectorySegment a1 = advance_L(st, c1, t);
        TrajectorySegment a2 = advance_L(st, c2, t);
        rep.dist_y = dist_y(ops, st.params(), a1, a2);
        rep.smoothing_ratio = (rep.dist_y < 1e-14 && rep.dist_l2 < 1e-14)
                ? 0.0
                : (rep.dist_y * rep.dist_y) / (rep.dist_l2 * rep.dist_l2);
        out.push_back(rep);
    }
    return out;
}

// Euclidean feature map realizing the phase-space metric
// ||u||² + λ ||φ||²_{H¹σ}: pairwise distances of mapped vectors equal
// sqrt(state_dist_sq) up to roundoff, which makes large ensembles cheap.
class StateFeatureMap {
public:
    StateFeatureMap(Operators& ops, const ModelParams& par) : ops_(ops) {
        const Grid& g = ops.grid();
        W_.resize(ops.nc());
        for (int k = 0; k < ops.nc(); ++k) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ops.canonical_form_matrix(k));
            Eigen::VectorXd sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            W_[k] = std::sqrt(parseval_weight(k, g.nx()) * g.dx() * par.lambda)
                  * sq.asDiagonal() * es.eigenvectors().transpose();
        }
    }

    int size() const {
        const Grid& g = ops_.grid();
        return g.nx() * g.ny() + g.nx() * (g.ny() - 1)
             + ops_.nc() * (g.ny() + 2) * 2;
    }

    Eigen::VectorXd operator()(const FieldState& s) const {
        const Grid& g = ops_.grid();
        const int nx = g.nx(), ny = g.ny(), nc = ops_.nc();
        const double cw = std::sqrt(g.cell_weight());
        Eigen::VectorXd f(size());
        int at = 0;
        for (double x : s.u.ux.v) f[at++] = cw * x;
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) f[at++] = cw * s.u.uy(i, j);
        Spectrum sp = ops_.to_spectrum(s.phi.bulk);
        std::vector<cplx> sl(nc), su(nc);
        ops_.fft().forward_row(s.phi.lower.data(), sl.data());
        ops_.fft().forward_row(s.phi.upper.data(), su.data());
        Eigen::VectorXd re(ny + 2), im(ny + 2);
        for (int k = 0; k < nc; ++k) {
            for (int j = 0; j < ny; ++j) {
                re[j] = sp(k, j).real();
                im[j] = sp(k, j).imag();
            }
            re[ny] = sl[k].real(); im[ny] = sl[k].imag();
            re[ny + 1] = su[k].real(); im[ny + 1] = su[k].imag();
            Eigen::VectorXd wr = W_[k] * re, wi = W_[k] * im;
            for (int j = 0; j < ny + 2; ++j) f[at++] = wr[j];
            for (int j = 0; j < ny + 2; ++j) f[at++] = wi[j];
        }
        return f;
    }

    // segment feature: quadrature-weighted rows, one per snapshot, so the
    // Frobenius distance of two segment features equals dist_l2
    Eigen::MatrixXd segment(const TrajectorySegment& chi) const {
        Eigen::MatrixXd F(chi.K() + 1, size());
        for (int j = 0; j <= chi.K(); ++j)
            F.row(j) = std::sqrt(chi.quadrature(j))
                     * (*this)(chi.snapshots[j]).transpose();
        return F;
    }

private:
    Operators& ops_;
    std::vector<Eigen::MatrixXd> W_;
};

// sup over pairs of ||e₁(χ¹) - e₁(χ²)||² / dist_l2²; identical pairs are
// excluded (0/0 floor convention).
inline double e1_lipschitz_check(
        Operators& ops, const ModelParams& par,
        const std::vector<std::pair<TrajectorySegment, TrajectorySegment>>& pairs) {
    double sup = 0.0;
    for (const auto& [c1, c2] : pairs) {
        const double den = dist_l2(ops, par, c1, c2);
        const double num = state_dist_sq(ops, par, c1.snapshots.back(), c2.snapshots.back());
        if (den < 1e-14 && std::sqrt(num) < 1e-14) continue;
        sup = std::max(sup, num / (den * den));
    }
    return sup;
}

} // namespace chns
