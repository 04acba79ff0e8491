#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "operators.hpp"
#include "physics.hpp"
#include "state.hpp"

namespace chns {

struct SchemeConfig {
    double dt = 1e-3;
    double S_bulk = 2.0;   // >= max |f'| over the working range
    double S_wall = 2.0;   // >= max |g'|
    enum class Mode { ProjectionFD, SpectralGalerkin } mode = Mode::ProjectionFD;
    int n_modes = 0;       // Galerkin truncation, spectral mode only
    bool pin_velocity = false;  // hold u ≡ given; pure-diffusion studies

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("scheme.dt must be > 0");
        if (S_bulk < 0.0 || S_wall < 0.0)
            throw std::invalid_argument("stabilization constants must be >= 0");
    }
};

struct RunResult {
    std::vector<FieldState> snapshots;
};

// One IMEX step: the phase-field update (implicit -Δ, wall coupling and
// surface terms, explicit f, g with convexity stabilization) solves a single
// per-mode linear system in (φ, μ, φ_Γ); velocity then takes an implicit
// viscous step with explicit convection and capillary force λ φⁿ∇μⁿ⁺¹,
// followed by an exact projection.  Bulk mean of φ and the discrete
// divergence constraint are conserved to roundoff by construction.
class Stepper {
public:
    Stepper(Operators& ops, const ModelParams& par, const SchemeConfig& sc)
        : ops_(ops), par_(par), sc_(sc) {
        par_.validate();
        sc_.validate();
        build_ch_factors();
        build_viscous_factors();
        hforce_ = par_.forcing.evaluate(ops_.grid());
    }

    const ModelParams& params() const { return par_; }
    const SchemeConfig& scheme() const { return sc_; }

    FieldState step(const FieldState& s) {
        const Grid& g = ops_.grid();
        const int nx = g.nx(), ny = g.ny(), nc = ops_.nc();
        const double dt = sc_.dt, h = g.dy(), ih = 1.0 / h;
        FieldState out(g);
        out.t = s.t + dt;

        // ---- phase-field step -------------------------------------------
        Array2D conv = convection_phi(s.u, s.phi);
        Array2D fex(nx, ny);
        for (size_t m = 0; m < fex.v.size(); ++m)
            fex.v[m] = par_.hyp.f(s.phi.bulk.v[m]) - sc_.S_bulk * s.phi.bulk.v[m];
        WallArray gl(nx), gu(nx);
        for (int i = 0; i < nx; ++i) {
            gl[i] = s.phi.lower[i] * (1.0 / dt + sc_.S_wall) - par_.hyp.g(s.phi.lower[i]);
            gu[i] = s.phi.upper[i] * (1.0 / dt + sc_.S_wall) - par_.hyp.g(s.phi.upper[i]);
        }
        Spectrum sphi = ops_.to_spectrum(s.phi.bulk);
        Spectrum sconv = ops_.to_spectrum(conv);
        Spectrum sfex = ops_.to_spectrum(fex);
        std::vector<cplx> sgl(nc), sgu(nc);
        ops_.fft().forward_row(gl.data(), sgl.data());
        ops_.fft().forward_row(gu.data(), sgu.data());

        const int N = 2 * ny + 2;
        Eigen::VectorXd re(N), im(N);
        Spectrum nphi(nc, ny), nmu(nc, ny);
        std::vector<cplx> nl(nc), nu(nc);
        for (int k = 0; k < nc; ++k) {
            for (int j = 0; j < ny; ++j) {
                const cplx r1 = sphi(k, j) / dt - sconv(k, j);
                const cplx r2 = sfex(k, j);
                re[j] = r1.real(); im[j] = r1.imag();
                re[ny + j] = r2.real(); im[ny + j] = r2.imag();
            }
            re[2 * ny] = sgl[k].real(); im[2 * ny] = sgl[k].imag();
            re[2 * ny + 1] = sgu[k].real(); im[2 * ny + 1] = sgu[k].imag();
            Eigen::VectorXd xr = ch_fac_[k].solve(re);
            Eigen::VectorXd xi = ch_fac_[k].solve(im);
            for (int j = 0; j < ny; ++j) {
                nphi(k, j) = cplx(xr[j], xi[j]);
                nmu(k, j) = cplx(xr[ny + j], xi[ny + j]);
            }
            nl[k] = cplx(xr[2 * ny], xi[2 * ny]);
            nu[k] = cplx(xr[2 * ny + 1], xi[2 * ny + 1]);
        }
        ops_.fft().inverse(nphi, out.phi.bulk);
        ops_.fft().inverse(nmu, out.mu);
        ops_.fft().inverse_wall(nl, out.phi.lower);
        ops_.fft().inverse_wall(nu, out.phi.upper);

        // ---- velocity step ----------------------------------------------
        if (sc_.pin_velocity) {
            out.u = s.u;
            guard(out);
            return out;
        }
        VectorField rhs(g);
        momentum_convection(s.u, rhs);                 // rhs = conv(u)
        VectorField cap = capillary(s.phi, out.mu);    // φⁿ ∇μⁿ⁺¹ at faces
        for (size_t m = 0; m < rhs.ux.v.size(); ++m)
            rhs.ux.v[m] = s.u.ux.v[m] / dt - rhs.ux.v[m]
                        - par_.lambda * cap.ux.v[m] + hforce_.ux.v[m];
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                rhs.uy(i, j) = s.u.uy(i, j) / dt - rhs.uy(i, j)
                             - par_.lambda * cap.uy(i, j) + hforce_.uy(i, j);

        Spectrum sx = ops_.to_spectrum(rhs.ux);
        std::vector<cplx> col(ny);
        for (int k = 0; k < nc; ++k) {
            for (int j = 0; j < ny; ++j) col[j] = sx(k, j);
            visc_ux_[k].solve(col.data());
            for (int j = 0; j < ny; ++j) sx(k, j) = col[j];
        }
        ops_.fft().inverse(sx, out.u.ux);
        if (ny > 1) {
            Array2D ryi(nx, ny - 1);
            for (int j = 1; j < ny; ++j)
                for (int i = 0; i < nx; ++i) ryi(i, j - 1) = rhs.uy(i, j);
            Spectrum sy = ops_.to_spectrum(ryi);
            std::vector<cplx> coly(ny - 1);
            for (int k = 0; k < nc; ++k) {
                for (int j = 0; j < ny - 1; ++j) coly[j] = sy(k, j);
                visc_uy_[k].solve(coly.data());
                for (int j = 0; j < ny - 1; ++j) sy(k, j) = coly[j];
            }
            Array2D uyi(nx, ny - 1);
            ops_.fft().inverse(sy, uyi);
            for (int j = 1; j < ny; ++j)
                for (int i = 0; i < nx; ++i) out.u.uy(i, j) = uyi(i, j - 1);
        }
        Array2D q;
        ops_.leray_project(out.u, &q);
        out.p = q;
        out.p *= 1.0 / dt;

        guard(out);
        return out;
    }

    // Advances n steps; snapshot every `cadence` steps (snapshot 0 is the
    // initial state).  Callback, if set, sees every step.
    RunResult run(const FieldState& initial, double T, int cadence = 1,
                  const std::function<void(const FieldState&, int)>& cb = {}) {
        if (T < sc_.dt) throw std::invalid_argument("horizon shorter than one step");
        if (cadence < 1) throw std::invalid_argument("cadence must be >= 1");
        const int nsteps = (int)std::llround(T / sc_.dt);
        RunResult r;
        r.snapshots.reserve(nsteps / cadence + 1);
        FieldState s = initial;
        r.snapshots.push_back(s);
        if (cb) cb(s, 0);
        for (int n = 1; n <= nsteps; ++n) {
            s = step(s);
            if (cb) cb(s, n);
            if (n % cadence == 0) r.snapshots.push_back(s);
        }
        return r;
    }

    // flux-form u·∇φ with face averages; exactly conservative
    Array2D convection_phi(const VectorField& u, const ScalarWithTrace& phi) {
        const Grid& g = ops_.grid();
        const int nx = g.nx(), ny = g.ny(), nc = ops_.nc();
        Array2D fx(nx, ny);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int im1 = (i + nx - 1) % nx;
                fx(i, j) = u.ux(i, j) * 0.5 * (phi.bulk(im1, j) + phi.bulk(i, j));
            }
        Spectrum s = ops_.to_spectrum(fx);
        for (int k = 0; k < nc; ++k) {
            const cplx m = deriv_shift_f2c(k, nx, g.Lx());
            for (int j = 0; j < ny; ++j) s(k, j) *= m;
        }
        Array2D out(nx, ny);
        ops_.fft().inverse(s, out);
        const double ih = 1.0 / g.dy();
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double flo = 0.0, fhi = 0.0;
                if (j > 0) flo = u.uy(i, j) * 0.5 * (phi.bulk(i, j - 1) + phi.bulk(i, j));
                if (j < ny - 1) fhi = u.uy(i, j + 1) * 0.5 * (phi.bulk(i, j) + phi.bulk(i, j + 1));
                out(i, j) += (fhi - flo) * ih;
            }
        return out;
    }

    // φ ∇μ at faces, with the same face averages as convection_phi so the
    // discrete energy exchange between the two couplings cancels
    VectorField capillary(const ScalarWithTrace& phi, const Array2D& mu) {
        const Grid& g = ops_.grid();
        const int nx = g.nx(), ny = g.ny(), nc = ops_.nc();
        VectorField cap(g);
        Spectrum s = ops_.to_spectrum(mu);
        for (int k = 0; k < nc; ++k) {
            const cplx m = deriv_shift_c2f(k, nx, g.Lx());
            for (int j = 0; j < ny; ++j) s(k, j) *= m;
        }
        Array2D gx(nx, ny);
        ops_.fft().inverse(s, gx);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int im1 = (i + nx - 1) % nx;
                cap.ux(i, j) = 0.5 * (phi.bulk(im1, j) + phi.bulk(i, j)) * gx(i, j);
            }
        const double ih = 1.0 / g.dy();
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                cap.uy(i, j) = 0.5 * (phi.bulk(i, j - 1) + phi.bulk(i, j))
                             * (mu(i, j) - mu(i, j - 1)) * ih;
        return cap;
    }

private:
    void guard(const FieldState& s) const {
        double m = 0.0;
        for (double x : s.phi.bulk.v) m = std::max(m, std::abs(x));
        for (double x : s.u.ux.v) m = std::max(m, std::abs(x));
        for (double x : s.u.uy.v) m = std::max(m, std::abs(x));
        if (!(m < 1e10))
            throw std::runtime_error("blow-up detected: field magnitude " + std::to_string(m)
                                     + " at t = " + std::to_string(s.t));
    }

    // centered divergence-form (u·∇)u on the staggered grid
    void momentum_convection(const VectorField& u, VectorField& out) {
        const Grid& g = ops_.grid();
        const int nx = g.nx(), ny = g.ny(), nc = ops_.nc();
        const double ih = 1.0 / g.dy();
        // corner fluxes (x-face lines, y-face rows): ubar_x * ubar_y
        Array2D corner(nx, ny + 1, 0.0);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int im1 = (i + nx - 1) % nx;
                const double uxb = 0.5 * (u.ux(i, j - 1) + u.ux(i, j));
                const double uyb = 0.5 * (u.uy(im1, j) + u.uy(i, j));
                corner(i, j) = uxb * uyb;
            }
        // ux component: d/dx (uc^2) + d/dy (corner)
        Array2D uc2(nx, ny);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int ip1 = (i + 1) % nx;
                const double uc = 0.5 * (u.ux(i, j) + u.ux(ip1, j));
                uc2(i, j) = uc * uc;
            }
        Spectrum s = ops_.to_spectrum(uc2);
        for (int k = 0; k < nc; ++k) {
            const cplx m = deriv_shift_c2f(k, nx, g.Lx());
            for (int j = 0; j < ny; ++j) s(k, j) *= m;
        }
        ops_.fft().inverse(s, out.ux);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                out.ux(i, j) += (corner(i, j + 1) - corner(i, j)) * ih;
        // uy component: d/dx (corner) + d/dy (vc^2)
        Spectrum sc = ops_.to_spectrum(corner);
        for (int k = 0; k < nc; ++k) {
            const cplx m = deriv_shift_f2c(k, nx, g.Lx());
            for (int j = 0; j < ny + 1; ++j) sc(k, j) *= m;
        }
        Array2D dcor(nx, ny + 1);
        ops_.fft().inverse(sc, dcor);
        out.uy.fill(0.0);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double vchi = 0.5 * (u.uy(i, j) + u.uy(i, j + 1));
                const double vclo = 0.5 * (u.uy(i, j - 1) + u.uy(i, j));
                out.uy(i, j) = dcor(i, j) + (vchi * vchi - vclo * vclo) * ih;
            }
    }

    void build_ch_factors() {
        const Grid& g = ops_.grid();
        const int ny = g.ny(), nc = ops_.nc(), N = 2 * ny + 2;
        const double dt = sc_.dt, h = g.dy(), ih = 1.0 / h, ih2 = ih * ih;
        const double gam = par_.gamma;
        ch_fac_.clear();
        ch_fac_.reserve(nc);
        for (int k = 0; k < nc; ++k) {
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
            const double k2 = ops_.k2(k);
            // cell rows: φ/dt + γ(k² μ - Δ_y^N μ) = rhs1
            for (int j = 0; j < ny; ++j) {
                M(j, j) += 1.0 / dt;
                M(j, ny + j) += gam * k2;
                double diag = 2.0;
                if (j == 0 || j == ny - 1) diag = 1.0;
                M(j, ny + j) += gam * diag * ih2;
                if (j > 0) M(j, ny + j - 1) -= gam * ih2;
                if (j < ny - 1) M(j, ny + j + 1) -= gam * ih2;
            }
            // μ rows: μ - (k²φ - Δ_y φ with wall trace) - S_b φ = rhs2
            for (int j = 0; j < ny; ++j) {
                M(ny + j, ny + j) += 1.0;
                M(ny + j, j) -= k2 + sc_.S_bulk;
                double diag = 2.0;
                if (j == 0) { diag = 3.0; M(ny + j, 2 * ny) += 2.0 * ih2; }
                else if (j == ny - 1) { diag = 3.0; M(ny + j, 2 * ny + 1) += 2.0 * ih2; }
                M(ny + j, j) -= diag * ih2;
                if (j > 0) M(ny + j, j - 1) += ih2;
                if (j < ny - 1) M(ny + j, j + 1) += ih2;
            }
            // wall rows: φ_Γ(1/dt + β + S_w + α k_Γ²) + ∂φ/∂n = rhs3
            const double wallc = 1.0 / dt + par_.beta + sc_.S_wall + par_.alpha * ops_.kfd2(k);
            M(2 * ny, 2 * ny) = wallc + 2.0 * ih;
            M(2 * ny, 0) = -2.0 * ih;
            M(2 * ny + 1, 2 * ny + 1) = wallc + 2.0 * ih;
            M(2 * ny + 1, ny - 1) = -2.0 * ih;
            ch_fac_.emplace_back(M);
        }
    }

    void build_viscous_factors() {
        const Grid& g = ops_.grid();
        const int ny = g.ny(), nc = ops_.nc();
        const double ih2 = 1.0 / (g.dy() * g.dy());
        const double nu = par_.nu, idt = 1.0 / sc_.dt;
        visc_ux_.resize(nc);
        visc_uy_.resize(nc);
        for (int k = 0; k < nc; ++k) {
            const double k2 = ops_.k2(k);
            std::vector<double> a(ny), e(ny - 1, -nu * ih2);
            for (int j = 0; j < ny; ++j) {
                double d = (j == 0 || j == ny - 1) ? 3.0 : 2.0;
                a[j] = idt + nu * (k2 + d * ih2);
            }
            visc_ux_[k].factor(a, e);
            std::vector<double> ay(ny - 1), ey(ny - 2, -nu * ih2);
            for (int j = 0; j < ny - 1; ++j) ay[j] = idt + nu * (k2 + 2.0 * ih2);
            visc_uy_[k].factor(ay, ey);
        }
    }

    Operators& ops_;
    ModelParams par_;
    SchemeConfig sc_;
    VectorField hforce_;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> ch_fac_;
    std::vector<TriFactor> visc_ux_, visc_uy_;
};

} // namespace chns
