#include <catch2/catch_amalgamated.hpp>

#include <chns/physics.hpp>
#include <chns/solver.hpp>

#include <cmath>
#include <random>

using namespace chns;

namespace {

FieldState smooth_state(const Grid& g, double amp) {
    FieldState s(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            s.phi.bulk(i, j) = amp * std::cos(2 * M_PI * g.xc(i))
                             * std::cos(M_PI * g.yc(j) / g.Ly());
    for (int i = 0; i < g.nx(); ++i) {
        s.phi.lower[i] = amp * std::cos(2 * M_PI * g.xc(i));
        s.phi.upper[i] = -amp * std::cos(2 * M_PI * g.xc(i));
    }
    return s;
}

void add_solenoidal(Operators& ops, FieldState& s, double amp, unsigned seed) {
    const Grid& g = ops.grid();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    for (auto& x : s.u.ux.v) x = amp * U(rng);
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) s.u.uy(i, j) = amp * U(rng);
    ops.leray_project(s.u);
}

} // namespace

TEST_CASE("zero state is a fixed point") {
    Grid g({1.0, 1.0, 16, 16});
    Operators ops(g, 1.0, 1.0);
    ModelParams par;
    SchemeConfig sc;
    sc.dt = 1e-3;
    Stepper st(ops, par, sc);
    FieldState z(g);
    FieldState n = st.step(z);
    for (double x : n.phi.bulk.v) CHECK(x == 0.0);
    for (double x : n.phi.lower) CHECK(x == 0.0);
    for (double x : n.phi.upper) CHECK(x == 0.0);
    for (double x : n.u.ux.v) CHECK(x == 0.0);
    for (double x : n.u.uy.v) CHECK(x == 0.0);
    CHECK(n.t == Catch::Approx(1e-3));
}

TEST_CASE("mass conservation and incompressibility") {
    Grid g({1.0, 1.0, 32, 32});
    Operators ops(g, 1.0, 1.0);
    ModelParams par;
    par.gamma = 0.1;
    SchemeConfig sc;
    sc.dt = 2e-4;
    sc.S_bulk = 2.0;
    sc.S_wall = 2.0;
    Stepper st(ops, par, sc);
    FieldState s = smooth_state(g, 0.4);
    for (auto& x : s.phi.bulk.v) x += 0.1;  // nonzero mean
    add_solenoidal(ops, s, 0.5, 11);
    const double m0 = g.bulk_mean(s.phi.bulk);
    for (int n = 0; n < 200; ++n) {
        s = st.step(s);
        CHECK(ops.max_divergence(s.u) <= 1e-10);
    }
    CHECK(std::abs(g.bulk_mean(s.phi.bulk) - m0) <= 1e-11 * std::max(1.0, std::abs(m0)));
}

TEST_CASE("dispersion relation of the phase-field operator") {
    // single bulk mode about zero: rate -γ k²(k² + f'(0)) with f'(0) = -1
    Grid g({1.0, 1.0, 32, 64});
    Operators ops(g, 1.0, 1.0);
    ModelParams par;
    par.gamma = 1e-3;
    SchemeConfig sc;
    sc.dt = 1e-5;
    sc.S_bulk = 2.0;
    sc.S_wall = 2.0;
    Stepper st(ops, par, sc);
    FieldState s(g);
    const double eps = 1e-6;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < 32; ++i)
            s.phi.bulk(i, j) = eps * std::cos(2 * M_PI * g.xc(i));
    for (int i = 0; i < 32; ++i)
        s.phi.lower[i] = s.phi.upper[i] = eps * std::cos(2 * M_PI * g.xc(i));
    const int nsteps = 10;
    const int jmid = g.ny() / 2;
    const double a0 = s.phi.bulk(0, jmid);
    for (int n = 0; n < nsteps; ++n) s = st.step(s);
    const double a1 = s.phi.bulk(0, jmid);
    const double measured = -std::log(a1 / a0) / (nsteps * sc.dt);
    const double k2 = 4 * M_PI * M_PI;
    const double expect = par.gamma * k2 * (k2 - 1.0);
    CHECK(measured == Catch::Approx(expect).epsilon(0.01));
}

TEST_CASE("run bookkeeping and determinism") {
    Grid g({1.0, 1.0, 16, 16});
    Operators ops(g, 1.0, 1.0);
    ModelParams par;
    SchemeConfig sc;
    sc.dt = 1e-3;
    Stepper st(ops, par, sc);
    FieldState s = smooth_state(g, 0.2);
    add_solenoidal(ops, s, 0.3, 5);

    RunResult r1 = st.run(s, 10 * sc.dt, 1);
    CHECK(r1.snapshots.size() == 11);

    RunResult r2 = st.run(s, 10 * sc.dt, 1);
    REQUIRE(r2.snapshots.size() == 11);
    for (size_t n = 0; n < r1.snapshots.size(); ++n) {
        const auto& a = r1.snapshots[n];
        const auto& b = r2.snapshots[n];
        for (size_t m = 0; m < a.phi.bulk.v.size(); ++m)
            CHECK(a.phi.bulk.v[m] == b.phi.bulk.v[m]);
        for (size_t m = 0; m < a.u.ux.v.size(); ++m)
            CHECK(a.u.ux.v[m] == b.u.ux.v[m]);
    }
}

TEST_CASE("energy dissipation without forcing") {
    Grid g({1.0, 1.0, 32, 32});
    Operators ops(g, 1.0, 1.0);
    ModelParams par;
    par.gamma = 0.1;
    par.lambda = 0.5;
    SchemeConfig sc;
    sc.dt = 5e-4;
    sc.S_bulk = 3.0;
    sc.S_wall = 3.0;
    Stepper st(ops, par, sc);
    FieldState s = smooth_state(g, 0.5);
    add_solenoidal(ops, s, 0.5, 23);
    ops.leray_project(s.u);
    double Jprev = energy_J(ops, s, par).total;
    const double ctol = 50.0;  // per-step splitting slack C·dt²
    for (int n = 0; n < 100; ++n) {
        s = st.step(s);
        const double J = energy_J(ops, s, par).total;
        CHECK(J <= Jprev + ctol * sc.dt * sc.dt);
        Jprev = J;
    }
}

TEST_CASE("blow-up guard") {
    Grid g({1.0, 1.0, 16, 16});
    Operators ops(g, 1.0, 1.0);
    ModelParams par;
    SchemeConfig sc;
    sc.dt = 1e-3;
    Stepper st(ops, par, sc);
    FieldState s(g);
    for (auto& x : s.phi.bulk.v) x = 1e11;
    CHECK_THROWS_AS(st.step(s), std::runtime_error);
}
