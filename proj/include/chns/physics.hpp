#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "operators.hpp"
#include "state.hpp"

namespace chns {

// Dense polynomial, ascending coefficients.
struct Polynomial {
    std::vector<double> c;

    Polynomial() = default;
    Polynomial(std::initializer_list<double> init) : c(init) {}
    explicit Polynomial(std::vector<double> init) : c(std::move(init)) {}

    static Polynomial double_well() { return Polynomial{0.0, -1.0, 0.0, 1.0}; }  // s^3 - s

    double operator()(double s) const {
        double r = 0.0;
        for (size_t i = c.size(); i-- > 0;) r = r * s + c[i];
        return r;
    }

    Polynomial derivative() const {
        if (c.size() <= 1) return Polynomial{0.0};
        Polynomial d;
        d.c.resize(c.size() - 1);
        for (size_t i = 1; i < c.size(); ++i) d.c[i - 1] = c[i] * (double)i;
        return d;
    }

    // antiderivative vanishing at 0
    Polynomial primitive() const {
        Polynomial p;
        p.c.resize(c.size() + 1);
        p.c[0] = 0.0;
        for (size_t i = 0; i < c.size(); ++i) p.c[i + 1] = c[i] / (double)(i + 1);
        return p;
    }

    int degree() const {
        for (size_t i = c.size(); i-- > 0;)
            if (c[i] != 0.0) return (int)i;
        return 0;
    }
};

// Polynomial nonlinearities with certified growth/Lipschitz constants on a
// sampling radius R.  Constants are stored, not derived; check_hypotheses
// certifies or refutes them by dense sampling.
struct GrowthHypothesis {
    Polynomial f = Polynomial::double_well();
    Polynomial g = Polynomial::double_well();
    int p = 4;
    int q = 4;
    double c1 = 0.5, c2 = 1.0, c3 = 0.5, c4 = 1.0;
    double k1 = 0.5, k2 = 0.5;
    double C1 = 3.0, C2 = 3.0;
    double sample_radius = 4.0;

    GrowthHypothesis() = default;
    void validate() const {
        if (p < 3) throw std::invalid_argument("growth exponent p must be >= 3");
        if (q <= 2) throw std::invalid_argument("growth exponent q must be > 2");
    }
};

struct HypothesisReport {
    bool satisfied = true;
    bool lipschitz_f = true, growth_f = true, lipschitz_g = true, growth_g = true;
    double witness_u = 0.0, witness_v = 0.0;
    std::string failed_condition;
};

// Certifies the stored constants on a uniform sample of [-R,R] (pairs for
// the Lipschitz-type bounds).  First violation is recorded as a witness.
inline HypothesisReport check_hypotheses(const GrowthHypothesis& hyp, double R, int N) {
    if (!(R > 0.0)) throw std::invalid_argument("sample radius must be > 0");
    if (N < 1000) throw std::invalid_argument("need at least 1000 samples");
    hyp.validate();
    HypothesisReport rep;
    const Polynomial fp = hyp.f.derivative();
    auto sample = [&](int i) { return -R + 2.0 * R * i / (N - 1); };
    const double slack = 1e-9;  // roundoff guard on large powers

    for (int i = 0; i < N && rep.growth_f; ++i) {
        const double u = sample(i);
        const double fu = hyp.f(u) * u, au = std::pow(std::abs(u), hyp.p);
        const double tol = slack * (1.0 + au);
        if (fu < hyp.c1 * au - hyp.k1 - tol || fu > hyp.c2 * au + hyp.k1 + tol) {
            rep.growth_f = false;
            rep.witness_u = u;
            rep.failed_condition = "growth bound on f";
        }
    }
    for (int i = 0; i < N && rep.growth_g; ++i) {
        const double u = sample(i);
        const double gu = hyp.g(u) * u, au = std::pow(std::abs(u), hyp.q);
        const double tol = slack * (1.0 + au);
        if (gu < hyp.c3 * au - hyp.k2 - tol || gu > hyp.c4 * au + hyp.k2 + tol) {
            rep.growth_g = false;
            rep.witness_u = u;
            rep.failed_condition = "growth bound on g";
        }
    }
    const int M = std::min(N, 1500);  // pair sampling density
    auto psample = [&](int i) { return -R + 2.0 * R * i / (M - 1); };
    for (int i = 0; i < M && rep.lipschitz_f; ++i) {
        const double u = psample(i);
        const double fpu = fp(u), wu = std::pow(std::abs(u), hyp.p - 3);
        for (int j = 0; j < M; ++j) {
            const double v = psample(j);
            const double lhs = std::abs(fpu - fp(v));
            const double rhs = hyp.C1 * std::abs(u - v) * (wu + std::pow(std::abs(v), hyp.p - 3) + 1.0);
            if (lhs > rhs + slack * (1.0 + rhs)) {
                rep.lipschitz_f = false;
                rep.witness_u = u;
                rep.witness_v = v;
                rep.failed_condition = "Lipschitz bound on f'";
                break;
            }
        }
    }
    for (int i = 0; i < M && rep.lipschitz_g; ++i) {
        const double u = psample(i);
        const double gu = hyp.g(u), wu = std::pow(std::abs(u), hyp.q - 2);
        for (int j = 0; j < M; ++j) {
            const double v = psample(j);
            const double lhs = std::abs(gu - hyp.g(v));
            const double rhs = hyp.C2 * std::abs(u - v) * (wu + std::pow(std::abs(v), hyp.q - 2) + 1.0);
            if (lhs > rhs + slack * (1.0 + rhs)) {
                rep.lipschitz_g = false;
                rep.witness_u = u;
                rep.witness_v = v;
                rep.failed_condition = "Lipschitz bound on g";
                break;
            }
        }
    }
    rep.satisfied = rep.growth_f && rep.growth_g && rep.lipschitz_f && rep.lipschitz_g;
    return rep;
}

// Body force on the staggered grid, from a closed-form family.
struct Forcing {
    enum class Kind { Zero, Shear, Cellular };
    Kind kind = Kind::Zero;
    double amplitude = 0.0;
    int mode_x = 1;
    int mode_y = 1;

    VectorField evaluate(const Grid& g) const {
        VectorField h(g);
        if (kind == Kind::Zero || amplitude == 0.0) return h;
        const double Lx = g.Lx(), Ly = g.Ly();
        if (kind == Kind::Shear) {
            for (int j = 0; j < g.ny(); ++j)
                for (int i = 0; i < g.nx(); ++i)
                    h.ux(i, j) = amplitude * std::sin(2.0 * M_PI * mode_y * g.yc(j) / Ly);
        } else {
            for (int j = 0; j < g.ny(); ++j)
                for (int i = 0; i < g.nx(); ++i)
                    h.ux(i, j) = amplitude * std::cos(2.0 * M_PI * mode_x * g.xf(i) / Lx)
                               * std::sin(2.0 * M_PI * mode_y * g.yc(j) / Ly);
            for (int j = 1; j < g.ny(); ++j)
                for (int i = 0; i < g.nx(); ++i)
                    h.uy(i, j) = amplitude * std::sin(2.0 * M_PI * mode_x * g.xc(i) / Lx)
                               * std::sin(M_PI * g.yf(j) / Ly);
        }
        return h;
    }
};

struct ModelParams {
    double nu = 1.0;
    double lambda = 1.0;
    double gamma = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    Forcing forcing;
    GrowthHypothesis hyp;

    void validate() const {
        if (!(nu > 0.0)) throw std::invalid_argument("params.nu must be > 0");
        if (!(lambda > 0.0)) throw std::invalid_argument("params.lambda must be > 0");
        if (!(gamma > 0.0)) throw std::invalid_argument("params.gamma must be > 0");
        if (!(alpha > 0.0)) throw std::invalid_argument("params.alpha must be > 0");
        if (!(beta > 0.0)) throw std::invalid_argument("params.beta must be > 0");
        hyp.validate();
    }
};

// mu = -Δφ + f(φ), wall trace closing the stencil
inline Array2D chemical_potential(Operators& ops, const ScalarWithTrace& phi,
                                  const GrowthHypothesis& hyp) {
    Array2D mu = ops.neg_laplacian(phi);
    for (size_t m = 0; m < mu.v.size(); ++m) mu.v[m] += hyp.f(phi.bulk.v[m]);
    return mu;
}

struct EnergyBreakdown {
    double kinetic = 0.0;       // ||u||^2
    double h1sigma = 0.0;       // λ ||φ||^2 in the bulk-surface H1 form
    double potential_bulk = 0.0;   // 2λ ∫ F(φ)
    double potential_wall = 0.0;   // 2λ ∫_Γ G(φ)
    double total = 0.0;
};

inline EnergyBreakdown energy_J(Operators& ops, const FieldState& s, const ModelParams& par) {
    const Grid& g = ops.grid();
    EnergyBreakdown e;
    e.kinetic = ops.l2_sq_velocity(s.u);
    e.h1sigma = par.lambda * ops.h1sigma_sq(s.phi);
    const Polynomial F = par.hyp.f.primitive();
    const Polynomial G = par.hyp.g.primitive();
    Array2D Fphi(g.nx(), g.ny());
    for (size_t m = 0; m < Fphi.v.size(); ++m) Fphi.v[m] = F(s.phi.bulk.v[m]);
    e.potential_bulk = 2.0 * par.lambda * g.integrate_bulk(Fphi);
    double gw = 0.0;
    for (double x : s.phi.lower) gw += G(x);
    for (double x : s.phi.upper) gw += G(x);
    e.potential_wall = 2.0 * par.lambda * gw * g.wall_weight();
    e.total = e.kinetic + e.h1sigma + e.potential_bulk + e.potential_wall;
    return e;
}

} // namespace chns
