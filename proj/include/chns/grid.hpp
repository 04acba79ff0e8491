#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "field.hpp"

namespace chns {

struct ChannelDomain {
    double Lx = 1.0;
    double Ly = 1.0;
    int Nx = 16;
    int Ny = 16;
};

enum class WallSide { Lower, Upper, Both };

// Periodic channel [0,Lx) x [0,Ly].  Cells are uniform; cell centers at
// ((i+1/2)dx, (j+1/2)dy).  Walls at y=0 and y=Ly carry Nx nodes each,
// aligned with cell-center x.  Immutable after construction.
class Grid {
public:
    explicit Grid(const ChannelDomain& d) : dom_(d) {
        if (!(d.Lx > 0.0) || !(d.Ly > 0.0))
            throw std::invalid_argument("Lx and Ly must be > 0");
        if (d.Nx % 2 != 0) throw std::invalid_argument("Nx must be even");
        if (d.Nx < 8) throw std::invalid_argument("Nx must be >= 8");
        if (d.Ny < 8) throw std::invalid_argument("Ny must be >= 8");
        dx_ = d.Lx / d.Nx;
        dy_ = d.Ly / d.Ny;
    }

    const ChannelDomain& dom() const { return dom_; }
    int nx() const { return dom_.Nx; }
    int ny() const { return dom_.Ny; }
    double Lx() const { return dom_.Lx; }
    double Ly() const { return dom_.Ly; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }

    double cell_weight() const { return dx_ * dy_; }
    double wall_weight() const { return dx_; }

    double area() const { return dom_.Lx * dom_.Ly; }           // |Omega|
    double perimeter() const { return 2.0 * dom_.Lx; }          // |Gamma|
    double sigma_measure() const { return area() + perimeter(); }

    // Sample locations.
    double xc(int i) const { return (i + 0.5) * dx_; }  // cell center
    double xf(int i) const { return i * dx_; }          // x-face
    double yc(int j) const { return (j + 0.5) * dy_; }
    double yf(int j) const { return j * dy_; }

    double integrate_bulk(const Array2D& f) const {
        if (f.nx != nx() || f.ny != ny()) throw std::invalid_argument("shape mismatch");
        double s = 0.0;
        for (double x : f.v) s += x;
        return s * cell_weight();
    }

    double integrate_boundary(const WallArray& f) const {
        if ((int)f.size() != nx()) throw std::invalid_argument("shape mismatch");
        double s = 0.0;
        for (double x : f) s += x;
        return s * wall_weight();
    }

    double integrate_boundary(const WallArray& lower, const WallArray& upper,
                              WallSide side = WallSide::Both) const {
        double s = 0.0;
        if (side == WallSide::Lower || side == WallSide::Both) s += integrate_boundary(lower);
        if (side == WallSide::Upper || side == WallSide::Both) s += integrate_boundary(upper);
        return s;
    }

    double bulk_mean(const Array2D& f) const { return integrate_bulk(f) / area(); }

private:
    ChannelDomain dom_;
    double dx_ = 0.0, dy_ = 0.0;
};

} // namespace chns
