#pragma once

// Manufactured-solution convergence probes for the discrete operators.  The
// x direction is spectral, so single-mode data isolates the O(Δy²) error of
// the wall-normal discretization.

#include <cmath>

#include "operators.hpp"

namespace chns {

inline double mms_neumann_laplacian(int ny) {
    const int nx = 16;
    Grid g({1.0, 1.0, nx, ny});
    Operators ops(g, 1.0, 1.0);
    Array2D f(nx, ny);
    const double ky = M_PI / g.Ly();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            f(i, j) = (4 * M_PI * M_PI + ky * ky) * std::cos(2 * M_PI * g.xc(i))
                    * std::cos(ky * g.yc(j));
    Array2D u = ops.neumann_inverse(f);
    double err = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            err = std::max(err, std::abs(u(i, j) - std::cos(2 * M_PI * g.xc(i))
                                         * std::cos(ky * g.yc(j))));
    return err;
}

inline double mms_laplace_beltrami(int nx) {
    Grid g({1.0, 1.0, nx, 16});
    Operators ops(g, 1.0, 1.0);
    WallArray w(nx);
    for (int i = 0; i < nx; ++i) w[i] = std::cos(2 * M_PI * g.xc(i));
    WallArray out = ops.laplace_beltrami(w);
    double err = 0.0;
    for (int i = 0; i < nx; ++i)
        err = std::max(err, std::abs(out[i] + 4 * M_PI * M_PI * w[i]));
    return err;
}

inline double mms_coupled_elliptic(int ny) {
    const int nx = 16;
    const double alpha = 1.0, beta = 1.0, Ly = 1.0;
    Grid g({1.0, Ly, nx, ny});
    Operators ops(g, alpha, beta);
    Array2D j1(nx, ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            j1(i, j) = (4 * M_PI * M_PI - 1.0) * std::cos(2 * M_PI * g.xc(i))
                     * std::cosh(g.yc(j));
    // wall loads built with the discrete tangential symbol so the ladder sees
    // only the wall-normal error
    const double kfd2 = ops.kfd2(1);
    WallArray j2l(nx), j2u(nx);
    for (int i = 0; i < nx; ++i) {
        const double cx = std::cos(2 * M_PI * g.xc(i));
        j2l[i] = alpha * kfd2 * cx + beta * cx;
        j2u[i] = (alpha * kfd2 + beta) * cx * std::cosh(Ly) + cx * std::sinh(Ly);
    }
    ScalarWithTrace phi = ops.solve_coupled_elliptic(j1, j2l, j2u);
    double err = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            err = std::max(err, std::abs(phi.bulk(i, j) - std::cos(2 * M_PI * g.xc(i))
                                         * std::cosh(g.yc(j))));
    for (int i = 0; i < nx; ++i) {
        const double cx = std::cos(2 * M_PI * g.xc(i));
        err = std::max(err, std::abs(phi.lower[i] - cx));
        err = std::max(err, std::abs(phi.upper[i] - cx * std::cosh(Ly)));
    }
    return err;
}

inline double mms_projection(int ny) {
    const int nx = 16;
    Grid g({1.0, 1.0, nx, ny});
    Operators ops(g, 1.0, 1.0);
    // analytic gradient field: projection must annihilate it to O(Δy²)
    VectorField v(g);
    const double ky = M_PI / g.Ly();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            v.ux(i, j) = -2 * M_PI * std::sin(2 * M_PI * g.xf(i)) * std::cos(ky * g.yc(j));
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            v.uy(i, j) = -ky * std::cos(2 * M_PI * g.xc(i)) * std::sin(ky * g.yf(j));
    ops.leray_project(v);
    double err = 0.0;
    for (double x : v.ux.v) err = std::max(err, std::abs(x));
    for (double x : v.uy.v) err = std::max(err, std::abs(x));
    return err;
}

// resolved mode through the full transform pipeline: -d²/dx² symbol
inline double fourier_roundoff() {
    const int nx = 32, ny = 16;
    Grid g({1.0, 1.0, nx, ny});
    Operators ops(g, 1.0, 1.0);
    Array2D f(nx, ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) f(i, j) = std::sin(6 * M_PI * g.xc(i));
    Spectrum s = ops.to_spectrum(f);
    for (int k = 0; k < ops.nc(); ++k)
        for (int j = 0; j < ny; ++j) s(k, j) *= ops.k2(k);
    Array2D out(nx, ny);
    ops.fft().inverse(s, out);
    double err = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            err = std::max(err, std::abs(out(i, j) - 36 * M_PI * M_PI
                                         * std::sin(6 * M_PI * g.xc(i))) / (36 * M_PI * M_PI));
    return err;
}

} // namespace chns
