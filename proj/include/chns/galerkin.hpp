#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "operators.hpp"
#include "solver.hpp"

namespace chns {

// Spectral truncation bases: divergence-free Stokes eigenmodes for the
// velocity and eigenmodes of the bulk-surface H1 form (against the σ mass)
// for the scalar.  Modes are ranked globally by eigenvalue, so a truncation
// level n keeps the n smoothest modes across all wavenumbers.
class GalerkinBasis {
public:
    explicit GalerkinBasis(Operators& ops) : ops_(ops) {
        const Grid& g = ops.grid();
        const int ny = g.ny(), nc = ops.nc();
        const double h = g.dy();
        // scalar eigenpairs per mode
        Eigen::VectorXd mass(ny + 2);
        for (int j = 0; j < ny; ++j) mass[j] = h;
        mass[ny] = mass[ny + 1] = 1.0;
        scal_.resize(nc);
        for (int k = 0; k < nc; ++k) {
            Eigen::MatrixXd A = ops.canonical_form_matrix(k);
            // strip the β wall mass so constants span the kernel and the
            // truncation conserves the scalar mean
            A(ny, ny) -= ops.beta();
            A(ny + 1, ny + 1) -= ops.beta();
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
                A, mass.asDiagonal().toDenseMatrix());
            scal_[k].lambda = es.eigenvalues();
            scal_[k].Z = es.eigenvectors();  // mass-orthonormal columns
            for (int i = 0; i < es.eigenvalues().size(); ++i)
                scal_rank_.push_back({es.eigenvalues()[i], k, i});
        }
        std::sort(scal_rank_.begin(), scal_rank_.end());
        for (int k = 0; k < nc; ++k) {
            const auto& sm = ops.stokes_mode(k);
            for (int i = 0; i < sm.kappa.size(); ++i)
                vel_rank_.push_back({sm.kappa[i], k, i});
        }
        std::sort(vel_rank_.begin(), vel_rank_.end());
        mass_ = mass;
    }

    int velocity_size() const { return (int)vel_rank_.size(); }
    int scalar_size() const { return (int)scal_rank_.size(); }

    void project_velocity(VectorField& u, int n) {
        if (n < 1 || n > velocity_size())
            throw std::invalid_argument("n_modes exceeds available basis");
        const Grid& g = ops_.grid();
        const int nx = g.nx(), ny = g.ny(), nc = ops_.nc();
        const double h = g.dy();
        ops_.leray_project(u);
        auto keep = build_keep(vel_rank_, n, nc);
        Spectrum sx = ops_.to_spectrum(u.ux);
        Array2D uyi(nx, ny - 1);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) uyi(i, j - 1) = u.uy(i, j);
        Spectrum sy = ops_.to_spectrum(uyi);
        for (int k = 0; k < nc; ++k) {
            const auto& sm = ops_.stokes_mode(k);
            if (!sm.reduced) {
                Eigen::VectorXcd a(ny);
                for (int j = 0; j < ny; ++j) a[j] = sx(k, j);
                Eigen::VectorXcd c = sm.B.transpose() * a * h;
                Eigen::VectorXcd ap = Eigen::VectorXcd::Zero(ny);
                for (int i : keep[k]) ap += sm.B.col(i) * c[i];
                for (int j = 0; j < ny; ++j) sx(k, j) = ap[j];
                for (int j = 0; j < ny - 1; ++j) sy(k, j) = 0.0;
            } else {
                Eigen::VectorXcd b(ny - 1);
                for (int j = 0; j < ny - 1; ++j) b[j] = sy(k, j);
                Eigen::VectorXcd Mb = h * ((sm.D.transpose() * (sm.D * b)) / ops_.k2(k) + b);
                Eigen::VectorXcd c = sm.B.transpose() * Mb;
                Eigen::VectorXcd bp = Eigen::VectorXcd::Zero(ny - 1);
                for (int i : keep[k]) bp += sm.B.col(i) * c[i];
                for (int j = 0; j < ny - 1; ++j) sy(k, j) = bp[j];
                Eigen::VectorXcd ap = -(sm.D * bp) / sm.mx;
                for (int j = 0; j < ny; ++j) sx(k, j) = ap[j];
            }
        }
        ops_.fft().inverse(sx, u.ux);
        ops_.fft().inverse(sy, uyi);
        u.uy.fill(0.0);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) u.uy(i, j) = uyi(i, j - 1);
    }

    void project_scalar(ScalarWithTrace& phi, int n) {
        if (n < 1 || n > scalar_size())
            throw std::invalid_argument("n_modes exceeds available basis");
        const Grid& g = ops_.grid();
        const int nx = g.nx(), ny = g.ny(), nc = ops_.nc();
        auto keep = build_keep(scal_rank_, n, nc);
        Spectrum s = ops_.to_spectrum(phi.bulk);
        std::vector<cplx> sl(nc), su(nc);
        ops_.fft().forward_row(phi.lower.data(), sl.data());
        ops_.fft().forward_row(phi.upper.data(), su.data());
        for (int k = 0; k < nc; ++k) {
            Eigen::VectorXcd z(ny + 2);
            for (int j = 0; j < ny; ++j) z[j] = s(k, j);
            z[ny] = sl[k];
            z[ny + 1] = su[k];
            Eigen::VectorXcd c = scal_[k].Z.transpose() * (mass_.asDiagonal() * z);
            Eigen::VectorXcd zp = Eigen::VectorXcd::Zero(ny + 2);
            for (int i : keep[k]) zp += scal_[k].Z.col(i) * c[i];
            for (int j = 0; j < ny; ++j) s(k, j) = zp[j];
            sl[k] = zp[ny];
            su[k] = zp[ny + 1];
        }
        ops_.fft().inverse(s, phi.bulk);
        ops_.fft().inverse_wall(sl, phi.lower);
        ops_.fft().inverse_wall(su, phi.upper);
    }

private:
    struct Rank3 {
        double lambda;
        int k, i;
        bool operator<(const Rank3& o) const {
            return lambda != o.lambda ? lambda < o.lambda
                                      : (k != o.k ? k < o.k : i < o.i);
        }
    };
    struct ScalModes {
        Eigen::VectorXd lambda;
        Eigen::MatrixXd Z;
    };

    static std::vector<std::vector<int>> build_keep(const std::vector<Rank3>& rank,
                                                    int n, int nc) {
        std::vector<std::vector<int>> keep(nc);
        for (int m = 0; m < n; ++m) keep[rank[m].k].push_back(rank[m].i);
        return keep;
    }

    Operators& ops_;
    std::vector<ScalModes> scal_;
    std::vector<Rank3> vel_rank_, scal_rank_;
    Eigen::VectorXd mass_;
};

inline FieldState galerkin_project(GalerkinBasis& basis, const FieldState& s, int n_modes) {
    FieldState out = s;
    basis.project_velocity(out.u, n_modes);
    basis.project_scalar(out.phi, n_modes);
    return out;
}

// One truncated update: full-space step followed by truncation to H_n × W_n.
inline FieldState galerkin_step(GalerkinBasis& basis, Stepper& st,
                                const FieldState& s, int n_modes) {
    return galerkin_project(basis, st.step(s), n_modes);
}

inline RunResult galerkin_run(GalerkinBasis& basis, Stepper& st,
                              const FieldState& initial, double T,
                              int n_modes, int cadence = 1) {
    if (T < st.scheme().dt) throw std::invalid_argument("horizon shorter than one step");
    const int nsteps = (int)std::llround(T / st.scheme().dt);
    RunResult r;
    FieldState s = galerkin_project(basis, initial, n_modes);
    s.t = initial.t;
    r.snapshots.push_back(s);
    for (int n = 1; n <= nsteps; ++n) {
        s = galerkin_step(basis, st, s, n_modes);
        if (n % cadence == 0) r.snapshots.push_back(s);
    }
    return r;
}

} // namespace chns
