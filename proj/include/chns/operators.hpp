#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "field.hpp"
#include "fourier.hpp"
#include "grid.hpp"
#include "state.hpp"
#include "tridiag.hpp"

namespace chns {

using cplx = std::complex<double>;

struct NormReport {
    double l2_bulk = 0.0;
    double l2_boundary = 0.0;
    double h1_sigma = 0.0;
    double grad_l2 = 0.0;
    double dual_v = 0.0;
    double dual_h1sigma = 0.0;
};

// Discrete operators on the periodic channel.  x is handled spectrally,
// y by compact second-order stencils.  The bulk scalar with wall trace uses
// a piecewise-linear bulk-surface discretization whose wall link carries
// weight 2/dy (half-cell gap between wall node and first cell center); this
// one stiffness matrix defines the gradient energy, the normal-derivative
// coupling, and the elliptic solves, so all energy identities close exactly.
class Operators {
public:
    Operators(const Grid& g, double alpha, double beta)
        : g_(g), alpha_(alpha), beta_(beta), fft_(g.nx()) {
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw std::invalid_argument("alpha and beta must be > 0");
        const int nc = fft_.nc();
        k2_.resize(nc);
        kfd2_.resize(nc);
        proj_sym_.resize(nc);
        const double dx = g_.dx();
        for (int k = 0; k < nc; ++k) {
            const double kp = wavenumber(k, g_.Lx());
            k2_[k] = kp * kp;
            kfd2_[k] = (2.0 / (dx * dx)) * (1.0 - std::cos(2.0 * M_PI * k / g_.nx()));
            // composite c2f*f2c divergence symbol: -k^2, zero at Nyquist
            proj_sym_[k] = (k == g_.nx() / 2) ? 0.0 : k2_[k];
        }
    }

    const Grid& grid() const { return g_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double k2(int k) const { return k2_[k]; }
    double kfd2(int k) const { return kfd2_[k]; }
    int nc() const { return fft_.nc(); }
    FourierX& fft() { return fft_; }

    // ---- wall tangential operators -------------------------------------

    WallArray laplace_beltrami(const WallArray& w) const {
        const int n = g_.nx();
        if ((int)w.size() != n) throw std::invalid_argument("shape mismatch");
        WallArray out(n);
        const double idx2 = 1.0 / (g_.dx() * g_.dx());
        for (int i = 0; i < n; ++i) {
            const double wm = w[(i + n - 1) % n], wp = w[(i + 1) % n];
            out[i] = (wm - 2.0 * w[i] + wp) * idx2;
        }
        return out;
    }

    // ---- wall-coupled y stiffness (applies to one spectral column) ------
    // vector layout: cells 0..Ny-1, then lower wall, upper wall

    template <class T>
    void apply_Ky(const T* phi, T gl, T gu, T* out, T& ogl, T& ogu) const {
        const int ny = g_.ny();
        const double ih = 1.0 / g_.dy();
        for (int j = 0; j < ny; ++j) {
            T acc = T(0);
            if (j > 0) acc += (phi[j] - phi[j - 1]) * ih;
            if (j < ny - 1) acc += (phi[j] - phi[j + 1]) * ih;
            if (j == 0) acc += (phi[0] - gl) * (2.0 * ih);
            if (j == ny - 1) acc += (phi[ny - 1] - gu) * (2.0 * ih);
            out[j] = acc;
        }
        ogl = (gl - phi[0]) * (2.0 * ih);
        ogu = (gu - phi[ny - 1]) * (2.0 * ih);
    }

    // Neumann stiffness on cells (zero-flux walls)
    template <class T>
    void apply_Kn(const T* f, T* out) const {
        const int ny = g_.ny();
        const double ih = 1.0 / g_.dy();
        for (int j = 0; j < ny; ++j) {
            T acc = T(0);
            if (j > 0) acc += (f[j] - f[j - 1]) * ih;
            if (j < ny - 1) acc += (f[j] - f[j + 1]) * ih;
            out[j] = acc;
        }
    }

    // ---- spectral helpers ------------------------------------------------

    Spectrum to_spectrum(const Array2D& f) {
        Spectrum s;
        fft_.forward(f, s);
        return s;
    }

    // -Δ with dynamic wall trace closing the stencil (uniform cell mass)
    Array2D neg_laplacian(const ScalarWithTrace& a) {
        const int ny = g_.ny(), nc = fft_.nc();
        Spectrum s = to_spectrum(a.bulk);
        std::vector<cplx> gl(nc), gu(nc);
        fft_.forward_row(a.lower.data(), gl.data());
        fft_.forward_row(a.upper.data(), gu.data());
        Spectrum out(nc, ny);
        std::vector<cplx> col(ny), kcol(ny);
        const double ih = 1.0 / g_.dy();
        for (int k = 0; k < nc; ++k) {
            for (int j = 0; j < ny; ++j) col[j] = s(k, j);
            cplx ogl, ogu;
            apply_Ky(col.data(), gl[k], gu[k], kcol.data(), ogl, ogu);
            for (int j = 0; j < ny; ++j) out(k, j) = k2_[k] * col[j] + kcol[j] * ih;
        }
        Array2D r(g_.nx(), ny);
        fft_.inverse(out, r);
        return r;
    }

    // -Δ with zero-flux walls (chemical potential Laplacian)
    Array2D neg_laplacian_neumann(const Array2D& f) {
        const int ny = g_.ny(), nc = fft_.nc();
        Spectrum s = to_spectrum(f);
        Spectrum out(nc, ny);
        std::vector<cplx> col(ny), kcol(ny);
        const double ih = 1.0 / g_.dy();
        for (int k = 0; k < nc; ++k) {
            for (int j = 0; j < ny; ++j) col[j] = s(k, j);
            apply_Kn(col.data(), kcol.data());
            for (int j = 0; j < ny; ++j) out(k, j) = k2_[k] * col[j] + kcol[j] * ih;
        }
        Array2D r(g_.nx(), ny);
        fft_.inverse(out, r);
        return r;
    }

    // the dynamic-BC flux + surface terms: -αΔ_Γφ + ∂φ/∂n + βφ per wall
    void wall_operator(const ScalarWithTrace& a, WallArray& lo, WallArray& hi) const {
        const int n = g_.nx();
        lo.assign(n, 0.0);
        hi.assign(n, 0.0);
        WallArray lbl = laplace_beltrami(a.lower);
        WallArray lbu = laplace_beltrami(a.upper);
        const double ih = 1.0 / g_.dy();
        for (int i = 0; i < n; ++i) {
            lo[i] = -alpha_ * lbl[i] + 2.0 * ih * (a.lower[i] - a.bulk(i, 0)) + beta_ * a.lower[i];
            hi[i] = -alpha_ * lbu[i] + 2.0 * ih * (a.upper[i] - a.bulk(i, g_.ny() - 1)) + beta_ * a.upper[i];
        }
    }

    // ---- bulk-surface bilinear form and norms ----------------------------
    // <A a, b> = ∫∇a·∇b dx + ∫_Γ (α ∇_Γ a·∇_Γ b + β a b) dS

    double boundary_form_A(const ScalarWithTrace& a, const ScalarWithTrace& b) {
        const int ny = g_.ny(), nc = fft_.nc();
        Spectrum sa = to_spectrum(a.bulk), sb = to_spectrum(b.bulk);
        std::vector<cplx> agl(nc), agu(nc), bgl(nc), bgu(nc);
        fft_.forward_row(a.lower.data(), agl.data());
        fft_.forward_row(a.upper.data(), agu.data());
        fft_.forward_row(b.lower.data(), bgl.data());
        fft_.forward_row(b.upper.data(), bgu.data());
        const double h = g_.dy(), dx = g_.dx(), ih = 1.0 / h;
        std::vector<cplx> col(ny), kcol(ny);
        double total = 0.0;
        for (int k = 0; k < nc; ++k) {
            const double pw = parseval_weight(k, g_.nx());
            double part = 0.0;
            // bulk x-gradient
            for (int j = 0; j < ny; ++j)
                part += h * k2_[k] * (sa(k, j) * std::conj(sb(k, j))).real();
            // bulk y-gradient through the wall-linked stiffness
            for (int j = 0; j < ny; ++j) col[j] = sa(k, j);
            cplx ogl, ogu;
            apply_Ky(col.data(), agl[k], agu[k], kcol.data(), ogl, ogu);
            for (int j = 0; j < ny; ++j) part += (kcol[j] * std::conj(sb(k, j))).real();
            part += (ogl * std::conj(bgl[k])).real() + (ogu * std::conj(bgu[k])).real();
            // wall tangential gradient + wall mass
            const double wallc = alpha_ * kfd2_[k] + beta_;
            part += wallc * ((agl[k] * std::conj(bgl[k])).real() + (agu[k] * std::conj(bgu[k])).real());
            total += pw * part;
        }
        return total * dx;
    }

    double h1sigma_sq(const ScalarWithTrace& a) { return boundary_form_A(a, a); }

    // bulk Dirichlet energy alone, same quadrature as the A form
    double grad_sq(const ScalarWithTrace& a) {
        const int ny = g_.ny(), nc = fft_.nc();
        Spectrum sa = to_spectrum(a.bulk);
        std::vector<cplx> agl(nc), agu(nc);
        fft_.forward_row(a.lower.data(), agl.data());
        fft_.forward_row(a.upper.data(), agu.data());
        std::vector<cplx> col(ny), kcol(ny);
        const double h = g_.dy();
        double total = 0.0;
        for (int k = 0; k < nc; ++k) {
            const double pw = parseval_weight(k, g_.nx());
            double part = 0.0;
            for (int j = 0; j < ny; ++j) part += h * k2_[k] * std::norm(sa(k, j));
            for (int j = 0; j < ny; ++j) col[j] = sa(k, j);
            cplx ogl, ogu;
            apply_Ky(col.data(), agl[k], agu[k], kcol.data(), ogl, ogu);
            for (int j = 0; j < ny; ++j) part += (kcol[j] * std::conj(col[j])).real();
            part += (ogl * std::conj(agl[k])).real() + (ogu * std::conj(agu[k])).real();
            total += pw * part;
        }
        return total * g_.dx();
    }

    // zero-flux scalar Dirichlet energy ∫|∇μ|²
    double grad_sq_neumann(const Array2D& f) {
        const int ny = g_.ny(), nc = fft_.nc();
        Spectrum s = to_spectrum(f);
        std::vector<cplx> col(ny), kcol(ny);
        const double h = g_.dy();
        double total = 0.0;
        for (int k = 0; k < nc; ++k) {
            const double pw = parseval_weight(k, g_.nx());
            double part = 0.0;
            for (int j = 0; j < ny; ++j) col[j] = s(k, j);
            apply_Kn(col.data(), kcol.data());
            for (int j = 0; j < ny; ++j)
                part += h * k2_[k] * std::norm(col[j]) + (kcol[j] * std::conj(col[j])).real();
            total += pw * part;
        }
        return total * g_.dx();
    }

    double l2_sq_bulk(const Array2D& f) const {
        double s = 0.0;
        for (double x : f.v) s += x * x;
        return s * g_.cell_weight();
    }

    double l2_sq_wall(const WallArray& w) const {
        double s = 0.0;
        for (double x : w) s += x * x;
        return s * g_.wall_weight();
    }

    double l2_sq_velocity(const VectorField& u) const {
        double s = 0.0;
        for (double x : u.ux.v) s += x * x;
        for (int j = 1; j < g_.ny(); ++j)
            for (int i = 0; i < g_.nx(); ++i) s += u.uy(i, j) * u.uy(i, j);
        return s * g_.cell_weight();
    }

    // ∫|∇u|² with no-slip wall closure for the tangential component
    double grad_sq_velocity(const VectorField& u) {
        const int ny = g_.ny(), nc = fft_.nc();
        Spectrum sx = to_spectrum(u.ux);
        Array2D uyi(g_.nx(), ny - 1);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < g_.nx(); ++i) uyi(i, j - 1) = u.uy(i, j);
        Spectrum sy = to_spectrum(uyi);
        const double h = g_.dy(), ih = 1.0 / h;
        double total = 0.0;
        for (int k = 0; k < nc; ++k) {
            const double pw = parseval_weight(k, g_.nx());
            double part = 0.0;
            for (int j = 0; j < ny; ++j) part += h * k2_[k] * std::norm(sx(k, j));
            for (int j = 0; j < ny - 1; ++j) part += h * k2_[k] * std::norm(sy(k, j));
            // ux: P1 energy with wall values pinned to zero (half-cell ends)
            part += 2.0 * ih * std::norm(sx(k, 0));
            part += 2.0 * ih * std::norm(sx(k, ny - 1));
            for (int j = 0; j + 1 < ny; ++j) part += ih * std::norm(sx(k, j + 1) - sx(k, j));
            // uy: interior faces, Dirichlet walls
            if (ny >= 2) {
                part += ih * std::norm(sy(k, 0));
                part += ih * std::norm(sy(k, ny - 2));
                for (int j = 0; j + 1 < ny - 1; ++j) part += ih * std::norm(sy(k, j + 1) - sy(k, j));
            }
            total += pw * part;
        }
        return total * g_.dx();
    }

    // ---- divergence and Leray projection ---------------------------------

    Array2D divergence(const VectorField& u) {
        const int nx = g_.nx(), ny = g_.ny(), nc = fft_.nc();
        Spectrum sx = to_spectrum(u.ux);
        for (int k = 0; k < nc; ++k) {
            const cplx m = deriv_shift_f2c(k, nx, g_.Lx());
            for (int j = 0; j < ny; ++j) sx(k, j) *= m;
        }
        Array2D d(nx, ny);
        fft_.inverse(sx, d);
        const double ih = 1.0 / g_.dy();
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) d(i, j) += (u.uy(i, j + 1) - u.uy(i, j)) * ih;
        return d;
    }

    double max_divergence(const VectorField& u) {
        Array2D d = divergence(u);
        double m = 0.0;
        for (double x : d.v) m = std::max(m, std::abs(x));
        return m;
    }

    // Projects onto the discretely divergence-free subspace.  If pressure is
    // given, receives the scalar q with v_out = v - grad q.
    void leray_project(VectorField& v, Array2D* pressure = nullptr) {
        const int nx = g_.nx(), ny = g_.ny(), nc = fft_.nc();
        ensure_projection_factors();
        Array2D d = divergence(v);
        Spectrum sd = to_spectrum(d);
        // solve (s_k I + K_N/h^2-scaled) q = d per mode, q pinned for singular modes
        std::vector<cplx> q(ny);
        Spectrum sq(nc, ny);
        for (int k = 0; k < nc; ++k) {
            // solve -(div grad) q = -div v, i.e. T q = -d with T SPD
            for (int j = 0; j < ny; ++j) q[j] = -sd(k, j);
            if (proj_sym_[k] > 0.0) {
                proj_fac_[k].solve(q.data());
            } else {
                // singular (compatible) mode: pin q_0 = 0, solve rows 1..ny-1
                proj_fac_[k].solve(q.data() + 1);
                q[0] = cplx(0.0, 0.0);
            }
            for (int j = 0; j < ny; ++j) sq(k, j) = q[j];
        }
        // x correction: ux -= d/dx q at faces
        Spectrum sgx(nc, ny);
        for (int k = 0; k < nc; ++k) {
            const cplx m = deriv_shift_c2f(k, nx, g_.Lx());
            for (int j = 0; j < ny; ++j) sgx(k, j) = m * sq(k, j);
        }
        Array2D gx(nx, ny), qphys(nx, ny);
        fft_.inverse(sgx, gx);
        fft_.inverse(sq, qphys);
        for (size_t m = 0; m < v.ux.v.size(); ++m) v.ux.v[m] -= gx.v[m];
        const double ih = 1.0 / g_.dy();
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) v.uy(i, j) -= (qphys(i, j) - qphys(i, j - 1)) * ih;
        if (pressure) *pressure = qphys;
    }

    // ---- coupled bulk-wall elliptic solve ---------------------------------
    // -Δφ = j1 in Ω;  -αΔ_Γφ + ∂φ/∂n + βφ = j2 on Γ.

    ScalarWithTrace solve_coupled_elliptic(const Array2D& j1, const WallArray& j2l,
                                           const WallArray& j2u) {
        const int nx = g_.nx(), ny = g_.ny(), nc = fft_.nc();
        if (j1.nx != nx || j1.ny != ny || (int)j2l.size() != nx || (int)j2u.size() != nx)
            throw std::invalid_argument("shape mismatch");
        ensure_elliptic_factors();
        Spectrum s1 = to_spectrum(j1);
        std::vector<cplx> s2l(nc), s2u(nc);
        fft_.forward_row(j2l.data(), s2l.data());
        fft_.forward_row(j2u.data(), s2u.data());
        const double h = g_.dy();
        const int N = ny + 2;
        Eigen::VectorXd re(N), im(N);
        Spectrum sol(nc, ny);
        std::vector<cplx> wl(nc), wu(nc);
        for (int k = 0; k < nc; ++k) {
            for (int j = 0; j < ny; ++j) {
                const double m = cell_mass(j);
                re[j] = m * s1(k, j).real();
                im[j] = m * s1(k, j).imag();
            }
            re[ny] = (h / 4.0) * s1(k, 0).real() + s2l[k].real();
            im[ny] = (h / 4.0) * s1(k, 0).imag() + s2l[k].imag();
            re[ny + 1] = (h / 4.0) * s1(k, ny - 1).real() + s2u[k].real();
            im[ny + 1] = (h / 4.0) * s1(k, ny - 1).imag() + s2u[k].imag();
            Eigen::VectorXd xr = ell_fac_[k].solve(re);
            Eigen::VectorXd xi = ell_fac_[k].solve(im);
            for (int j = 0; j < ny; ++j) sol(k, j) = cplx(xr[j], xi[j]);
            wl[k] = cplx(xr[ny], xi[ny]);
            wu[k] = cplx(xr[ny + 1], xi[ny + 1]);
        }
        ScalarWithTrace out(g_);
        fft_.inverse(sol, out.bulk);
        fft_.inverse_wall(wl, out.lower);
        fft_.inverse_wall(wu, out.upper);
        return out;
    }

    // ---- Neumann inverse (zero-mean scalars) ------------------------------

    Array2D neumann_inverse(const Array2D& f) {
        const int nx = g_.nx(), ny = g_.ny(), nc = fft_.nc();
        if (f.nx != nx || f.ny != ny) throw std::invalid_argument("shape mismatch");
        double scale = 0.0;
        for (double x : f.v) scale = std::max(scale, std::abs(x));
        if (std::abs(g_.bulk_mean(f)) > 1e-10 * std::max(1.0, scale))
            throw std::invalid_argument("mean-zero required");
        ensure_neumann_factors();
        Spectrum s = to_spectrum(f);
        std::vector<cplx> q(ny);
        const double h = g_.dy();
        Spectrum sol(nc, ny);
        for (int k = 0; k < nc; ++k) {
            for (int j = 0; j < ny; ++j) q[j] = s(k, j);
            if (k2_[k] > 0.0) {
                neu_fac_[k].solve(q.data());
            } else {
                neu_fac_[k].solve(q.data() + 1);
                q[0] = cplx(0.0, 0.0);
                // zero-mean gauge on the k=0 mode
                cplx mean(0.0, 0.0);
                for (int j = 0; j < ny; ++j) mean += q[j];
                mean /= (double)ny;
                for (int j = 0; j < ny; ++j) q[j] -= mean;
            }
            for (int j = 0; j < ny; ++j) sol(k, j) = q[j];
        }
        Array2D out(nx, ny);
        fft_.inverse(sol, out);
        return out;
    }

    // ---- Stokes eigenstructure and dual norms -----------------------------

    // Per-mode divergence-free eigenpairs of the Dirichlet (vector) form.
    struct StokesMode {
        bool reduced = false;          // true: parameterized by interior uy
        Eigen::MatrixXd B;             // eigenvectors, M-orthonormal columns
        Eigen::VectorXd kappa;         // eigenvalues
        Eigen::MatrixXd D;             // face-difference map (reduced modes)
        cplx mx;                       // x-divergence multiplier (reduced)
    };

    const StokesMode& stokes_mode(int k) {
        ensure_stokes_modes();
        return stokes_[k];
    }

    double dual_norm_V(const VectorField& F) {
        const int nx = g_.nx(), ny = g_.ny(), nc = fft_.nc();
        ensure_stokes_modes();
        Spectrum sx = to_spectrum(F.ux);
        Array2D fyi(nx, ny - 1);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) fyi(i, j - 1) = F.uy(i, j);
        Spectrum sy = to_spectrum(fyi);
        const double h = g_.dy();
        double total = 0.0;
        for (int k = 0; k < nc; ++k) {
            const StokesMode& sm = stokes_[k];
            const double pw = parseval_weight(k, nx);
            double part = 0.0;
            if (!sm.reduced) {
                // subspace is {(a, 0)}: coefficients from ux alone
                Eigen::VectorXcd fx(ny);
                for (int j = 0; j < ny; ++j) fx[j] = sx(k, j);
                Eigen::VectorXcd c = sm.B.transpose() * fx * h;
                for (int i = 0; i < c.size(); ++i) part += std::norm(c[i]) / sm.kappa[i];
            } else {
                Eigen::VectorXcd fx(ny), fy(ny - 1);
                for (int j = 0; j < ny; ++j) fx[j] = sx(k, j);
                for (int j = 0; j < ny - 1; ++j) fy[j] = sy(k, j);
                // pairing with u_i = (-D b_i / mx, b_i)
                Eigen::VectorXcd w = fy - (sm.D.transpose() * fx) / std::conj(sm.mx);
                Eigen::VectorXcd c = sm.B.transpose() * w * h;
                for (int i = 0; i < c.size(); ++i) part += std::norm(c[i]) / sm.kappa[i];
            }
            total += pw * part;
        }
        return std::sqrt(total * g_.dx());
    }

    // Dual of the bulk-surface H1 form on functionals annihilating bulk
    // constants.  F is given as densities (bulk, walls) against the uniform
    // quadrature.
    double dual_norm_h1sigma(const ScalarWithTrace& F) {
        const int nx = g_.nx(), ny = g_.ny(), nc = fft_.nc();
        double scale = 0.0;
        for (double x : F.bulk.v) scale = std::max(scale, std::abs(x));
        for (double x : F.lower) scale = std::max(scale, std::abs(x));
        for (double x : F.upper) scale = std::max(scale, std::abs(x));
        if (std::abs(g_.bulk_mean(F.bulk)) > 1e-8 * std::max(1.0, scale))
            throw std::invalid_argument("mean-zero required");
        ensure_canon_factors();
        Spectrum s = to_spectrum(F.bulk);
        std::vector<cplx> sl(nc), su(nc);
        fft_.forward_row(F.lower.data(), sl.data());
        fft_.forward_row(F.upper.data(), su.data());
        const double h = g_.dy();
        const int N = ny + 2;
        double total = 0.0;
        for (int k = 0; k < nc; ++k) {
            const double pw = parseval_weight(k, nx);
            if (k == 0) {
                // constrained Riesz solve: bulk mean of the representative is 0
                Eigen::VectorXd rhs(N + 1);
                for (int j = 0; j < ny; ++j) rhs[j] = h * s(0, j).real();
                rhs[ny] = sl[0].real();
                rhs[ny + 1] = su[0].real();
                rhs[N] = 0.0;
                Eigen::VectorXd w = canon0_fac_->solve(rhs);
                double part = 0.0;
                for (int j = 0; j < N; ++j) part += rhs[j] * w[j];
                total += pw * part;
            } else {
                Eigen::VectorXd re(N), im(N);
                for (int j = 0; j < ny; ++j) {
                    re[j] = h * s(k, j).real();
                    im[j] = h * s(k, j).imag();
                }
                re[ny] = sl[k].real();
                im[ny] = sl[k].imag();
                re[ny + 1] = su[k].real();
                im[ny + 1] = su[k].imag();
                Eigen::VectorXd xr = canon_fac_[k].solve(re);
                Eigen::VectorXd xi = canon_fac_[k].solve(im);
                total += pw * (re.dot(xr) + im.dot(xi));
            }
        }
        return std::sqrt(total * g_.dx());
    }

    NormReport norms(const ScalarWithTrace& a) {
        NormReport r;
        r.l2_bulk = std::sqrt(l2_sq_bulk(a.bulk));
        r.l2_boundary = std::sqrt(l2_sq_wall(a.lower) + l2_sq_wall(a.upper));
        r.grad_l2 = std::sqrt(grad_sq(a));
        r.h1_sigma = std::sqrt(h1sigma_sq(a));
        return r;
    }

    // canonical per-mode matrix of the bulk-surface H1 form (uniform mass on
    // the x-derivative block); shared by the Riesz solves and the stepper
    Eigen::MatrixXd canonical_form_matrix(int k) const {
        return build_wall_matrix(k, /*fem_mass=*/false);
    }

private:
    double cell_mass(int j) const {
        const double h = g_.dy();
        return (j == 0 || j == g_.ny() - 1) ? 0.75 * h : h;
    }

    // (Ny+2)x(Ny+2) symmetric matrix: k² mass + wall-linked y stiffness +
    // wall tangential/mass terms.  fem_mass: boundary-consistent masses for
    // the elliptic solver; otherwise uniform bulk mass (energy-form variant).
    Eigen::MatrixXd build_wall_matrix(int k, bool fem_mass) const {
        const int ny = g_.ny(), N = ny + 2;
        const double h = g_.dy(), ih = 1.0 / h;
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
        for (int j = 0; j + 1 < ny; ++j) {
            M(j, j) += ih;
            M(j + 1, j + 1) += ih;
            M(j, j + 1) -= ih;
            M(j + 1, j) -= ih;
        }
        const int gl = ny, gu = ny + 1;
        M(gl, gl) += 2.0 * ih; M(0, 0) += 2.0 * ih;
        M(gl, 0) -= 2.0 * ih;  M(0, gl) -= 2.0 * ih;
        M(gu, gu) += 2.0 * ih; M(ny - 1, ny - 1) += 2.0 * ih;
        M(gu, ny - 1) -= 2.0 * ih; M(ny - 1, gu) -= 2.0 * ih;
        for (int j = 0; j < ny; ++j)
            M(j, j) += k2_[k] * (fem_mass ? cell_mass(j) : h);
        if (fem_mass) {
            M(gl, gl) += k2_[k] * h / 4.0;
            M(gu, gu) += k2_[k] * h / 4.0;
        }
        const double wallc = alpha_ * kfd2_[k] + beta_;
        M(gl, gl) += wallc;
        M(gu, gu) += wallc;
        return M;
    }

    void ensure_projection_factors() {
        if (!proj_fac_.empty()) return;
        const int ny = g_.ny(), nc = fft_.nc();
        const double ih2 = 1.0 / (g_.dy() * g_.dy());
        proj_fac_.resize(nc);
        for (int k = 0; k < nc; ++k) {
            if (proj_sym_[k] > 0.0) {
                std::vector<double> a(ny), e(ny - 1, -ih2);
                for (int j = 0; j < ny; ++j) {
                    double d = 2.0 * ih2;
                    if (j == 0 || j == ny - 1) d = ih2;
                    a[j] = proj_sym_[k] + d;
                }
                proj_fac_[k].factor(a, e);
            } else {
                // pinned system on rows 1..ny-1
                std::vector<double> a(ny - 1), e(ny - 2, -ih2);
                for (int j = 0; j < ny - 1; ++j)
                    a[j] = (j == ny - 2) ? ih2 : 2.0 * ih2;
                proj_fac_[k].factor(a, e);
            }
        }
    }

    void ensure_neumann_factors() {
        if (!neu_fac_.empty()) return;
        const int ny = g_.ny(), nc = fft_.nc();
        const double ih2 = 1.0 / (g_.dy() * g_.dy());
        neu_fac_.resize(nc);
        for (int k = 0; k < nc; ++k) {
            if (k2_[k] > 0.0) {
                std::vector<double> a(ny), e(ny - 1, -ih2);
                for (int j = 0; j < ny; ++j) {
                    double d = 2.0 * ih2;
                    if (j == 0 || j == ny - 1) d = ih2;
                    a[j] = k2_[k] + d;
                }
                neu_fac_[k].factor(a, e);
            } else {
                std::vector<double> a(ny - 1), e(ny - 2, -ih2);
                for (int j = 0; j < ny - 1; ++j)
                    a[j] = (j == ny - 2) ? ih2 : 2.0 * ih2;
                neu_fac_[k].factor(a, e);
            }
        }
    }

    void ensure_elliptic_factors() {
        if (!ell_fac_.empty()) return;
        const int nc = fft_.nc();
        ell_fac_.reserve(nc);
        for (int k = 0; k < nc; ++k)
            ell_fac_.emplace_back(build_wall_matrix(k, true).ldlt());
    }

    void ensure_canon_factors() {
        if (!canon_fac_.empty()) return;
        const int nc = fft_.nc(), ny = g_.ny(), N = ny + 2;
        canon_fac_.reserve(nc);
        for (int k = 0; k < nc; ++k)
            canon_fac_.emplace_back(build_wall_matrix(k, false).ldlt());
        // bordered k=0 system enforcing zero bulk mean on the representative
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N + 1, N + 1);
        B.topLeftCorner(N, N) = build_wall_matrix(0, false);
        for (int j = 0; j < ny; ++j) {
            B(j, N) = g_.dy();
            B(N, j) = g_.dy();
        }
        canon0_fac_ = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(B);
    }

    void ensure_stokes_modes() {
        if (!stokes_.empty()) return;
        const int ny = g_.ny(), nc = fft_.nc(), nx = g_.nx();
        const double h = g_.dy(), ih = 1.0 / h;
        // tangential (no-slip) stiffness on ny cells
        Eigen::MatrixXd KT = Eigen::MatrixXd::Zero(ny, ny);
        for (int j = 0; j + 1 < ny; ++j) {
            KT(j, j) += ih; KT(j + 1, j + 1) += ih;
            KT(j, j + 1) -= ih; KT(j + 1, j) -= ih;
        }
        KT(0, 0) += 2.0 * ih;
        KT(ny - 1, ny - 1) += 2.0 * ih;
        // normal (Dirichlet) stiffness on ny-1 interior faces
        Eigen::MatrixXd KD = Eigen::MatrixXd::Zero(ny - 1, ny - 1);
        for (int j = 0; j + 1 < ny - 1; ++j) {
            KD(j, j) += ih; KD(j + 1, j + 1) += ih;
            KD(j, j + 1) -= ih; KD(j + 1, j) -= ih;
        }
        KD(0, 0) += ih;
        KD(ny - 2, ny - 2) += ih;
        // face-difference map b (interior faces) -> cells
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(ny, ny - 1);
        for (int j = 0; j < ny; ++j) {
            if (j < ny - 1) D(j, j) += ih;       // b_{j+1} enters cell j with +
            if (j >= 1) D(j, j - 1) -= ih;       // b_j enters cell j with -
        }
        stokes_.resize(nc);
        for (int k = 0; k < nc; ++k) {
            StokesMode& sm = stokes_[k];
            const bool nyq = (k == nx / 2);
            if (k == 0 || nyq) {
                sm.reduced = false;
                Eigen::MatrixXd S = KT / h;
                if (nyq) S += k2_[k] * Eigen::MatrixXd::Identity(ny, ny);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
                sm.kappa = es.eigenvalues();
                sm.B = es.eigenvectors() / std::sqrt(h);
            } else {
                sm.reduced = true;
                sm.mx = deriv_shift_f2c(k, nx, g_.Lx());
                sm.D = D;
                const double ik2 = 1.0 / k2_[k];
                Eigen::MatrixXd P = D.transpose() * D * ik2
                                  + Eigen::MatrixXd::Identity(ny - 1, ny - 1);
                Eigen::MatrixXd M = h * P;
                Eigen::MatrixXd S = h * k2_[k] * P
                                  + D.transpose() * KT * D * ik2 + KD;
                Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, M);
                sm.kappa = es.eigenvalues();
                sm.B = es.eigenvectors();
            }
        }
    }

    Grid g_;
    double alpha_, beta_;
    FourierX fft_;
    std::vector<double> k2_, kfd2_, proj_sym_;
    std::vector<TriFactor> proj_fac_, neu_fac_;
    std::vector<Eigen::LDLT<Eigen::MatrixXd>> ell_fac_, canon_fac_;
    std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> canon0_fac_;
    std::vector<StokesMode> stokes_;
};

} // namespace chns
