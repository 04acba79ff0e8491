#include <catch2/catch_amalgamated.hpp>

#include <chns/physics.hpp>

#include <cmath>

using namespace chns;

TEST_CASE("polynomial evaluation and primitives") {
    Polynomial f = Polynomial::double_well();
    CHECK(f(2.0) == 6.0);
    Polynomial F = f.primitive();
    CHECK(F(2.0) == 2.0);  // 16/4 - 4/2
    CHECK(F(0.0) == 0.0);
    Polynomial G = Polynomial::double_well().primitive();
    CHECK(G(0.0) == 0.0);

    // F' = f by centered differences
    const double eps = 1e-5;
    for (double s : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        const double fd = (F(s + eps) - F(s - eps)) / (2 * eps);
        CHECK(fd == Catch::Approx(f(s)).margin(1e-8));
    }
}

TEST_CASE("hypothesis checker certifies the double well") {
    GrowthHypothesis hyp;  // defaults: f=g=s^3-s, p=q=4, c1=1/2, k1=1/2, C1=3
    HypothesisReport rep = check_hypotheses(hyp, 4.0, 4001);
    CHECK(rep.satisfied);
    CHECK(rep.growth_f);
    CHECK(rep.lipschitz_f);
    CHECK(rep.growth_g);
    CHECK(rep.lipschitz_g);
}

TEST_CASE("hypothesis checker finds a witness for f = s^2") {
    GrowthHypothesis hyp;
    hyp.f = Polynomial{0.0, 0.0, 1.0};  // s^2
    hyp.p = 3;
    HypothesisReport rep = check_hypotheses(hyp, 4.0, 4001);
    CHECK_FALSE(rep.satisfied);
    CHECK_FALSE(rep.growth_f);
    CHECK(rep.witness_u < 0.0);  // f(s)s = s^3 unbounded below
    CHECK(rep.failed_condition == "growth bound on f");
}

TEST_CASE("hypothesis constructor constraints") {
    GrowthHypothesis hyp;
    hyp.p = 2;
    CHECK_THROWS(hyp.validate());
    hyp.p = 4;
    hyp.q = 2;
    CHECK_THROWS(hyp.validate());
}

TEST_CASE("chemical potential") {
    Grid g({1.0, 1.0, 16, 16});
    Operators ops(g, 1.0, 1.0);
    GrowthHypothesis hyp;

    SECTION("zero state") {
        ScalarWithTrace phi(g);
        Array2D mu = chemical_potential(ops, phi, hyp);
        for (double x : mu.v) CHECK(std::abs(x) < 1e-14);
    }

    SECTION("constant state") {
        ScalarWithTrace phi(g);
        phi.fill(2.0);
        Array2D mu = chemical_potential(ops, phi, hyp);
        for (double x : mu.v) CHECK(x == Catch::Approx(6.0).margin(1e-10));
        CHECK(g.bulk_mean(mu) == Catch::Approx(6.0).margin(1e-10));
    }

    SECTION("linearization about zero") {
        const double eps = 1e-6;
        ScalarWithTrace phi(g);
        for (int j = 0; j < 16; ++j)
            for (int i = 0; i < 16; ++i)
                phi.bulk(i, j) = eps * std::cos(2 * M_PI * g.xc(i));
        for (int i = 0; i < 16; ++i)
            phi.lower[i] = phi.upper[i] = eps * std::cos(2 * M_PI * g.xc(i));
        Array2D mu = chemical_potential(ops, phi, hyp);
        for (int j = 0; j < 16; ++j)
            for (int i = 0; i < 16; ++i) {
                const double expect = eps * (4 * M_PI * M_PI - 1.0) * std::cos(2 * M_PI * g.xc(i));
                CHECK(mu(i, j) == Catch::Approx(expect).margin(1e-12 + 2e-17));
            }
    }
}

TEST_CASE("energy functional") {
    Grid g({1.0, 1.0, 16, 16});
    Operators ops(g, 1.0, 1.0);
    ModelParams par;  // lambda = beta = 1, double well

    SECTION("zero state") {
        FieldState s(g);
        EnergyBreakdown e = energy_J(ops, s, par);
        CHECK(e.total == 0.0);
    }

    SECTION("constant phi = 1") {
        FieldState s(g);
        s.phi.fill(1.0);
        EnergyBreakdown e = energy_J(ops, s, par);
        // beta*1*|Γ| + 2(F(1)|Ω| + G(1)|Γ|) = 2 + 2(-1/4 - 1/2) = 0.5
        CHECK(e.total == Catch::Approx(0.5).margin(1e-12));
        CHECK(e.kinetic + e.h1sigma + e.potential_bulk + e.potential_wall ==
              Catch::Approx(e.total).margin(1e-14));
    }

    SECTION("x-translation invariance") {
        FieldState s(g);
        for (int j = 0; j < 16; ++j)
            for (int i = 0; i < 16; ++i)
                s.phi.bulk(i, j) = std::sin(2 * M_PI * g.xc(i)) + 0.3 * g.yc(j);
        for (int i = 0; i < 16; ++i) {
            s.phi.lower[i] = std::sin(2 * M_PI * g.xc(i));
            s.phi.upper[i] = std::sin(2 * M_PI * g.xc(i)) + 0.3;
        }
        for (int j = 0; j < 16; ++j)
            for (int i = 0; i < 16; ++i) s.u.ux(i, j) = std::cos(2 * M_PI * g.xf(i));
        const double e0 = energy_J(ops, s, par).total;
        // shift everything by 4 cells
        FieldState t(g);
        auto shift = [&](int i) { return (i + 4) % 16; };
        for (int j = 0; j < 16; ++j)
            for (int i = 0; i < 16; ++i) {
                t.phi.bulk(shift(i), j) = s.phi.bulk(i, j);
                t.u.ux(shift(i), j) = s.u.ux(i, j);
            }
        for (int i = 0; i < 16; ++i) {
            t.phi.lower[shift(i)] = s.phi.lower[i];
            t.phi.upper[shift(i)] = s.phi.upper[i];
        }
        CHECK(energy_J(ops, t, par).total == Catch::Approx(e0).margin(1e-11));
    }
}

TEST_CASE("forcing fields respect wall constraints") {
    Grid g({1.0, 1.0, 16, 16});
    Forcing f;
    f.kind = Forcing::Kind::Cellular;
    f.amplitude = 2.0;
    VectorField h = f.evaluate(g);
    for (int i = 0; i < 16; ++i) {
        CHECK(h.uy(i, 0) == 0.0);
        CHECK(h.uy(i, 16) == 0.0);
    }
}
