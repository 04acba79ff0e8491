#pragma once

#include <vector>
#include <complex>
#include <stdexcept>
#include <cstddef>

namespace chns {

// Cell- or face-sampled 2D array, row-major in j with x contiguous:
// idx = j*nx + i.  x is the periodic (FFT) direction.
struct Array2D {
    int nx = 0, ny = 0;
    std::vector<double> v;

    Array2D() = default;
    Array2D(int nx_, int ny_, double fill = 0.0) : nx(nx_), ny(ny_), v((size_t)nx_ * ny_, fill) {}

    double& operator()(int i, int j) { return v[(size_t)j * nx + i]; }
    double operator()(int i, int j) const { return v[(size_t)j * nx + i]; }
    double* row(int j) { return v.data() + (size_t)j * nx; }
    const double* row(int j) const { return v.data() + (size_t)j * nx; }
    size_t size() const { return v.size(); }

    void fill(double c) { std::fill(v.begin(), v.end(), c); }

    Array2D& operator+=(const Array2D& o) {
        check_same(o);
        for (size_t m = 0; m < v.size(); ++m) v[m] += o.v[m];
        return *this;
    }
    Array2D& operator-=(const Array2D& o) {
        check_same(o);
        for (size_t m = 0; m < v.size(); ++m) v[m] -= o.v[m];
        return *this;
    }
    Array2D& operator*=(double a) {
        for (double& x : v) x *= a;
        return *this;
    }
    void check_same(const Array2D& o) const {
        if (nx != o.nx || ny != o.ny) throw std::invalid_argument("shape mismatch");
    }
};

// Complex x-spectrum of an Array2D: nc = nx/2+1 modes per row.
struct Spectrum {
    int nc = 0, ny = 0;
    std::vector<std::complex<double>> v;

    Spectrum() = default;
    Spectrum(int nc_, int ny_) : nc(nc_), ny(ny_), v((size_t)nc_ * ny_) {}

    std::complex<double>& operator()(int k, int j) { return v[(size_t)j * nc + k]; }
    std::complex<double> operator()(int k, int j) const { return v[(size_t)j * nc + k]; }
    std::complex<double>* row(int j) { return v.data() + (size_t)j * nc; }
    const std::complex<double>* row(int j) const { return v.data() + (size_t)j * nc; }
};

// Scalar sampled on one wall: periodic array of nx nodes at cell-center x.
using WallArray = std::vector<double>;

} // namespace chns
