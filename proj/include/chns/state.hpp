#pragma once

#include "field.hpp"
#include "grid.hpp"

namespace chns {

// MAC-staggered velocity: ux at x-faces (i*dx, (j+1/2)*dy), shape (Nx, Ny);
// uy at y-faces ((i+1/2)*dx, j*dy), shape (Nx, Ny+1).  Rows j=0 and j=Ny of
// uy are the walls and stay identically zero (no penetration).
struct VectorField {
    Array2D ux, uy;

    VectorField() = default;
    explicit VectorField(const Grid& g)
        : ux(g.nx(), g.ny()), uy(g.nx(), g.ny() + 1) {}

    void fill(double c) { ux.fill(c); uy.fill(c); }
    VectorField& operator+=(const VectorField& o) { ux += o.ux; uy += o.uy; return *this; }
    VectorField& operator-=(const VectorField& o) { ux -= o.ux; uy -= o.uy; return *this; }
    VectorField& operator*=(double a) { ux *= a; uy *= a; return *this; }
};

// Cell-centered scalar with its own boundary values on both walls.  The wall
// arrays are the single source of truth for the boundary trace.
struct ScalarWithTrace {
    Array2D bulk;
    WallArray lower, upper;

    ScalarWithTrace() = default;
    explicit ScalarWithTrace(const Grid& g)
        : bulk(g.nx(), g.ny()), lower(g.nx(), 0.0), upper(g.nx(), 0.0) {}

    void fill(double c) {
        bulk.fill(c);
        std::fill(lower.begin(), lower.end(), c);
        std::fill(upper.begin(), upper.end(), c);
    }
    ScalarWithTrace& operator-=(const ScalarWithTrace& o) {
        bulk -= o.bulk;
        for (size_t i = 0; i < lower.size(); ++i) lower[i] -= o.lower[i];
        for (size_t i = 0; i < upper.size(); ++i) upper[i] -= o.upper[i];
        return *this;
    }
};

struct FieldState {
    double t = 0.0;
    VectorField u;
    ScalarWithTrace phi;   // order parameter, bulk + dynamic wall values
    Array2D mu;            // chemical potential
    Array2D p;             // pressure

    FieldState() = default;
    explicit FieldState(const Grid& g) : u(g), phi(g), mu(g.nx(), g.ny()), p(g.nx(), g.ny()) {}
};

} // namespace chns
