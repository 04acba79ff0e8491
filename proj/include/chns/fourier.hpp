#pragma once

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "field.hpp"

namespace chns {

inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

// Real 1D FFT along x for one grid size.  Transforms go through internal
// aligned buffers so callers can pass arbitrary row pointers.  Forward is
// unnormalized; inverse divides by n.  Not thread-safe per instance: each
// worker owns its own FourierX.
class FourierX {
public:
    explicit FourierX(int n) : n_(n), nc_(n / 2 + 1) {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex());
        rbuf_ = fftw_alloc_real(n_);
        cbuf_ = fftw_alloc_complex(nc_);
        fwd_ = fftw_plan_dft_r2c_1d(n_, rbuf_, cbuf_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(n_, cbuf_, rbuf_, FFTW_ESTIMATE);
    }
    ~FourierX() {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(rbuf_);
        fftw_free(cbuf_);
    }
    FourierX(const FourierX&) = delete;
    FourierX& operator=(const FourierX&) = delete;

    int n() const { return n_; }
    int nc() const { return nc_; }

    void forward_row(const double* in, std::complex<double>* out) {
        for (int i = 0; i < n_; ++i) rbuf_[i] = in[i];
        fftw_execute(fwd_);
        for (int k = 0; k < nc_; ++k)
            out[k] = std::complex<double>(cbuf_[k][0], cbuf_[k][1]);
    }

    void inverse_row(const std::complex<double>* in, double* out) {
        for (int k = 0; k < nc_; ++k) {
            cbuf_[k][0] = in[k].real();
            cbuf_[k][1] = in[k].imag();
        }
        fftw_execute(bwd_);
        const double s = 1.0 / n_;
        for (int i = 0; i < n_; ++i) out[i] = rbuf_[i] * s;
    }

    void forward(const Array2D& f, Spectrum& s) {
        if (s.nc != nc_ || s.ny != f.ny) s = Spectrum(nc_, f.ny);
        for (int j = 0; j < f.ny; ++j) forward_row(f.row(j), s.row(j));
    }

    void inverse(const Spectrum& s, Array2D& f) {
        for (int j = 0; j < f.ny; ++j) inverse_row(s.row(j), f.row(j));
    }

    void forward_wall(const WallArray& w, std::vector<std::complex<double>>& s) {
        s.resize(nc_);
        forward_row(w.data(), s.data());
    }

    void inverse_wall(const std::vector<std::complex<double>>& s, WallArray& w) {
        w.resize(n_);
        inverse_row(s.data(), w.data());
    }

private:
    int n_, nc_;
    double* rbuf_;
    fftw_complex* cbuf_;
    fftw_plan fwd_, bwd_;
};

// Physical wavenumber of mode kk on period Lx.
inline double wavenumber(int kk, double Lx) {
    return 2.0 * M_PI * kk / Lx;
}

// Parseval weight: sum_i f_i^2 = sum_k pw_k |fhat_k|^2 for real f of length n.
inline double parseval_weight(int kk, int n) {
    const int nyq = n / 2;
    return ((kk == 0 || kk == nyq) ? 1.0 : 2.0) / n;
}

// Multiplier of d/dx with a half-cell shift center->face: ik * exp(-ik dx/2).
// Zero at Nyquist (odd derivative of the real representative is ambiguous).
inline std::complex<double> deriv_shift_c2f(int kk, int n, double Lx) {
    if (kk == n / 2) return {0.0, 0.0};
    const double k = wavenumber(kk, Lx);
    const double dx = Lx / n;
    return std::complex<double>(0.0, k) * std::exp(std::complex<double>(0.0, -k * dx / 2));
}

// d/dx face->center: ik * exp(+ik dx/2); adjoint-compatible with c2f so that
// the composite divergence(gradient) symbol is exactly -k^2 (0 at Nyquist).
inline std::complex<double> deriv_shift_f2c(int kk, int n, double Lx) {
    if (kk == n / 2) return {0.0, 0.0};
    const double k = wavenumber(kk, Lx);
    const double dx = Lx / n;
    return std::complex<double>(0.0, k) * std::exp(std::complex<double>(0.0, k * dx / 2));
}

} // namespace chns
