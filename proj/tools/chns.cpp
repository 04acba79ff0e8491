// Command-line driver: simulation runs, operator verification, and the
// post-processing reports (energy ledger, absorbing-set fit, continuous
// dependence, trajectory dimension, hypothesis check).

#include <CLI11.hpp>
#include <json.hpp>

#include <chns/config.hpp>
#include <chns/diagnostics.hpp>
#include <chns/dimension.hpp>
#include <chns/galerkin.hpp>
#include <chns/io.hpp>
#include <chns/rng.hpp>
#include <chns/trajectory.hpp>
#include <chns/verify.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace chns;

namespace {

FieldState make_initial(Operators& ops, const RunConfig& cfg, double amp_scale = 1.0) {
    const Grid& g = ops.grid();
    const double amp = cfg.run.init_amplitude * amp_scale;
    CounterRng rng{cfg.run.seed};
    FieldState s(g);
    uint64_t ctr = 0;
    for (auto& x : s.phi.bulk.v) x = amp * rng.symmetric(ctr++);
    for (int i = 0; i < g.nx(); ++i) {
        s.phi.lower[i] = s.phi.bulk(i, 0);
        s.phi.upper[i] = s.phi.bulk(i, g.ny() - 1);
    }
    ctr = 1ull << 32;
    for (auto& x : s.u.ux.v) x = amp * rng.symmetric(ctr++);
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) s.u.uy(i, j) = amp * rng.symmetric(ctr++);
    ops.leray_project(s.u);
    s.mu = chemical_potential(ops, s.phi, cfg.params.hyp);
    return s;
}

int cmd_run(const RunConfig& cfg, const fs::path& outdir, const std::string& resume) {
    Grid g(cfg.domain);
    Operators ops(g, cfg.params.alpha, cfg.params.beta);
    Stepper st(ops, cfg.params, cfg.scheme);
    std::unique_ptr<GalerkinBasis> basis;
    int nv = 0, ns = 0;
    if (cfg.scheme.mode == SchemeConfig::Mode::SpectralGalerkin) {
        basis = std::make_unique<GalerkinBasis>(ops);
        nv = cfg.scheme.n_modes > 0 ? std::min(cfg.scheme.n_modes, basis->velocity_size())
                                    : basis->velocity_size();
        ns = cfg.scheme.n_modes > 0 ? std::min(cfg.scheme.n_modes, basis->scalar_size())
                                    : basis->scalar_size();
    }
    auto truncate = [&](FieldState& s) {
        if (!basis) return;
        basis->project_velocity(s.u, nv);
        basis->project_scalar(s.phi, ns);
    };

    fs::create_directories(outdir);
    const int nsteps = (int)std::llround(cfg.run.T / cfg.scheme.dt);
    const int cadence = cfg.run.snapshot_cadence;
    int start_step = 0;
    FieldState s(g);
    if (!resume.empty()) {
        std::ifstream mf(resume);
        if (!mf) throw std::runtime_error("cannot open manifest: " + resume);
        nlohmann::json j;
        mf >> j;
        const int have = j.at("n_snapshots").get<int>();
        s = read_snapshot(outdir, have - 1, g);
        start_step = (have - 1) * cadence;
        if (start_step >= nsteps) {
            std::cout << "run already complete (" << have << " snapshots)\n";
            return 0;
        }
    } else {
        s = make_initial(ops, cfg);
        truncate(s);
        write_snapshot(outdir, 0, s, g);
    }

    std::ofstream ecsv(outdir / "energy.csv",
                       start_step ? std::ios::app : std::ios::out);
    auto emit_row = [&](const FieldState* prev, const FieldState& cur) {
        EnergyReport r = ledger_row(ops, cfg.params, prev, cur);
        char buf[256];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.t, r.J, r.dJ_dt, r.wall_dissipation, r.chem_dissipation,
                      r.viscous_dissipation, r.residual);
        ecsv << buf;
    };
    if (start_step == 0) {
        ecsv << "t,J,dJ_dt,wall_dissipation,chem_dissipation,viscous_dissipation,residual\n";
        emit_row(nullptr, s);
    }
    int written = start_step / cadence + 1;
    for (int n = start_step + 1; n <= nsteps; ++n) {
        FieldState prev = s;
        s = st.step(prev);
        truncate(s);
        emit_row(&prev, s);
        if (n % cadence == 0) {
            write_snapshot(outdir, written, s, g);
            ++written;
            write_manifest(outdir, cfg, written);
        }
    }
    write_manifest(outdir, cfg, written);
    std::cout << "run complete: " << nsteps << " steps, " << written
              << " snapshots in " << outdir << "\n";
    return 0;
}

int cmd_energy_report(const fs::path& outdir) {
    std::ifstream mf(outdir / "manifest.json");
    if (!mf) throw std::runtime_error("no manifest.json in " + outdir.string());
    nlohmann::json j;
    mf >> j;
    RunConfig cfg = parse_config_text(j.at("config").get<std::string>());
    const int n = j.at("n_snapshots").get<int>();
    Grid g(cfg.domain);
    Operators ops(g, cfg.params.alpha, cfg.params.beta);
    std::vector<FieldState> snaps;
    snaps.reserve(n);
    for (int i = 0; i < n; ++i) snaps.push_back(read_snapshot(outdir, i, g));
    auto led = dissipation_ledger(ops, cfg.params, snaps);
    write_energy_csv(outdir / "energy_report.csv", led);
    std::cout << "ledger over " << n << " snapshots -> "
              << (outdir / "energy_report.csv") << "\n";
    return 0;
}

int cmd_absorption(const RunConfig& cfg, const fs::path& outdir, bool strict) {
    Grid g(cfg.domain);
    Operators ops(g, cfg.params.alpha, cfg.params.beta);
    Stepper st(ops, cfg.params, cfg.scheme);
    const double factors[3] = {0.31622776601683794, 3.1622776601683795, 10.0};
    std::vector<std::vector<double>> series;
    const int cadence = cfg.run.snapshot_cadence;
    for (double f : factors) {
        FieldState s = make_initial(ops, cfg, f);
        std::vector<double> J;
        J.push_back(energy_J(ops, s, cfg.params).total);
        const int nsteps = (int)std::llround(cfg.run.T / cfg.scheme.dt);
        for (int n = 1; n <= nsteps; ++n) {
            s = st.step(s);
            if (n % cadence == 0) J.push_back(energy_J(ops, s, cfg.params).total);
        }
        series.push_back(std::move(J));
    }
    AbsorptionFit fit = fit_absorption(series, cadence * cfg.scheme.dt);
    fs::create_directories(outdir);
    write_absorption_json(outdir / "absorption.json", fit);
    std::printf("delta = %g, rho/delta = %g, rho1 = %g, max_violation = %g\n",
                fit.delta, fit.rho_over_delta, fit.rho1, fit.max_violation);
    if (strict && fit.max_violation > 1e-6) {
        std::cerr << "{\"error\": \"absorption bound violated\", \"max_violation\": "
                  << fit.max_violation << "}\n";
        return 1;
    }
    return 0;
}

int cmd_gronwall(const RunConfig& cfg, const fs::path& outdir, double eps, double C,
                 bool strict) {
    Grid g(cfg.domain);
    Operators ops(g, cfg.params.alpha, cfg.params.beta);
    Stepper st(ops, cfg.params, cfg.scheme);
    FieldState a = make_initial(ops, cfg);
    FieldState b = a;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            b.phi.bulk(i, j) += eps * std::sin(2 * M_PI * g.xc(i) / g.Lx())
                              * std::sin(2 * M_PI * g.yc(j) / g.Ly());
    b.mu = chemical_potential(ops, b.phi, cfg.params.hyp);
    RunResult r1 = st.run(a, cfg.run.T, 1);
    RunResult r2 = st.run(b, cfg.run.T, 1);
    bool calibrated = false;
    if (C <= 0.0) {
        C = calibrate_gronwall_C(ops, cfg.params, r1.snapshots, r2.snapshots);
        calibrated = true;
    }
    GronwallReport rep = gronwall_check(ops, cfg.params, r1.snapshots, r2.snapshots, C);
    fs::create_directories(outdir);
    write_gronwall_json(outdir / "gronwall.json", rep, C, calibrated);
    std::printf("C = %g%s, M_T = %g, worst D/bound = %g, separation_ok = %s\n", C,
                calibrated ? " (calibrated here)" : "", rep.M_T, rep.worst_ratio,
                rep.separation_ok ? "yes" : "no");
    if (strict && !rep.separation_ok) {
        std::cerr << "{\"error\": \"Gronwall bound violated\", \"worst_ratio\": "
                  << rep.worst_ratio << "}\n";
        return 1;
    }
    return 0;
}

int cmd_trajectory_dim(const RunConfig& cfg, const fs::path& outdir, bool strict) {
    Grid g(cfg.domain);
    Operators ops(g, cfg.params.alpha, cfg.params.beta);
    Stepper st(ops, cfg.params, cfg.scheme);
    const double dt = cfg.scheme.dt;
    const int nsteps = (int)std::llround(cfg.run.T / dt);
    const int burn = (int)(cfg.trajectory.burn_in * nsteps);
    const int ell_steps = (int)std::llround(cfg.trajectory.ell / dt);
    const int M = cfg.trajectory.ensemble_size;
    const int avail = nsteps - burn - ell_steps;
    if (avail < M - 1)
        throw std::invalid_argument("horizon too short for the requested ensemble");
    const int stride = avail / (M - 1);

    FieldState s = make_initial(ops, cfg);
    std::vector<FieldState> starts;
    starts.reserve(M);
    for (int n = 0; n <= burn + (M - 1) * stride; ++n) {
        if (n >= burn && (n - burn) % stride == 0 && (int)starts.size() < M)
            starts.push_back(s);
        s = st.step(s);
    }

    StateFeatureMap fmap(ops, cfg.params);
    const int K = cfg.trajectory.K;
    std::vector<Eigen::MatrixXd> segf;  // per segment: (K+1) feature rows
    Eigen::MatrixXd endf(M, fmap.size());
    segf.reserve(M);
    for (int m = 0; m < M; ++m) {
        TrajectorySegment seg = lift_b(st, starts[m], cfg.trajectory.ell, K);
        segf.push_back(fmap.segment(seg));
        endf.row(m) = fmap(seg.snapshots.back()).transpose();
    }

    auto matrix = [&](auto&& distf) {
        std::vector<std::vector<double>> D(M, std::vector<double>(M, 0.0));
        for (int i = 0; i < M; ++i)
            for (int j = i + 1; j < M; ++j) D[i][j] = D[j][i] = distf(i, j);
        return D;
    };
    auto Dseg = matrix([&](int i, int j) { return (segf[i] - segf[j]).norm(); });
    auto De1 = matrix([&](int i, int j) { return (endf.row(i) - endf.row(j)).norm(); });

    fs::create_directories(outdir);
    write_distance_csv(outdir / "distances.csv", Dseg);
    DimensionReport rs = fractal_dimension(Dseg);
    DimensionReport re = fractal_dimension(De1);
    write_dimension_json(outdir / "dimension.json", rs);
    write_dimension_json(outdir / "dimension_e1.json", re);
    std::printf("segments: d = %g [%g, %g] over eps in [%g, %g] (box %g)\n",
                rs.slope, rs.ci_low, rs.ci_high, rs.fit_lo, rs.fit_hi, rs.box_count_slope);
    std::printf("endpoint image: d = %g [%g, %g] (box %g)\n", re.slope, re.ci_low,
                re.ci_high, re.box_count_slope);
    const bool nonincrease = re.slope <= rs.ci_high + (rs.ci_high - rs.ci_low) + 0.5;
    std::printf("Lipschitz non-increase within CI: %s\n", nonincrease ? "yes" : "no");
    if (strict && !nonincrease) {
        std::cerr << "{\"error\": \"endpoint image dimension exceeds segment dimension\"}\n";
        return 1;
    }
    return 0;
}

int cmd_check_hypotheses(const RunConfig& cfg, const fs::path& outdir, bool strict) {
    HypothesisReport rep = check_hypotheses(cfg.params.hyp, cfg.params.hyp.sample_radius, 4001);
    const GrowthHypothesis& h = cfg.params.hyp;
    std::printf("%-28s %s\n", "growth bound on f:", rep.growth_f ? "ok" : "FAIL");
    std::printf("%-28s %s\n", "Lipschitz bound on f':", rep.lipschitz_f ? "ok" : "FAIL");
    std::printf("%-28s %s\n", "growth bound on g:", rep.growth_g ? "ok" : "FAIL");
    std::printf("%-28s %s\n", "Lipschitz bound on g:", rep.lipschitz_g ? "ok" : "FAIL");
    std::printf("constants: p=%d q=%d c1=%g c2=%g c3=%g c4=%g k1=%g k2=%g C1=%g C2=%g\n",
                h.p, h.q, h.c1, h.c2, h.c3, h.c4, h.k1, h.k2, h.C1, h.C2);
    if (rep.satisfied) std::printf("satisfied\n");
    else std::printf("NOT satisfied: %s (witness u=%g, v=%g)\n",
                     rep.failed_condition.c_str(), rep.witness_u, rep.witness_v);
    fs::create_directories(outdir);
    nlohmann::json j;
    j["satisfied"] = rep.satisfied;
    j["growth_f"] = rep.growth_f;
    j["lipschitz_f"] = rep.lipschitz_f;
    j["growth_g"] = rep.growth_g;
    j["lipschitz_g"] = rep.lipschitz_g;
    j["failed_condition"] = rep.failed_condition;
    j["witness_u"] = rep.witness_u;
    j["witness_v"] = rep.witness_v;
    std::ofstream f(outdir / "hypotheses.json");
    f << j.dump(2) << "\n";
    return (strict && !rep.satisfied) ? 1 : 0;
}

int cmd_verify_operators(const fs::path& outdir, bool strict) {
    struct Ladder {
        const char* name;
        double (*fn)(int);
        std::vector<int> sizes;
    };
    std::vector<Ladder> ladders = {
        {"laplacian", mms_neumann_laplacian, {16, 32, 64, 128}},
        {"laplace_beltrami", mms_laplace_beltrami, {16, 32, 64, 128}},
        {"coupled_elliptic", mms_coupled_elliptic, {16, 32, 64, 128}},
        {"projection", mms_projection, {16, 32, 64, 128}},
    };
    fs::create_directories(outdir);
    std::ofstream csv(outdir / "convergence.csv");
    csv << "operator,level,n,error,order\n";
    bool ok = true;
    for (const auto& lad : ladders) {
        double prev = 0.0;
        for (size_t lev = 0; lev < lad.sizes.size(); ++lev) {
            const double err = lad.fn(lad.sizes[lev]);
            const double order = lev ? std::log2(prev / err) : 0.0;
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s,%zu,%d,%.6e,%.3f\n", lad.name, lev,
                          lad.sizes[lev], err, order);
            csv << buf;
            std::fputs(buf, stdout);
            if (lev + 1 == lad.sizes.size() && order < 1.9) ok = false;
            prev = err;
        }
    }
    const double ferr = fourier_roundoff();
    csv << "fourier,0,32," << ferr << ",\n";
    std::printf("fourier,0,32,%.6e,-\n", ferr);
    if (ferr > 1e-12) ok = false;
    if (strict && !ok) {
        std::cerr << "{\"error\": \"operator verification failed\"}\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"channel-flow phase-field simulator and attractor diagnostics"};
    app.require_subcommand(1);

    std::string config_path, outdir = "out", resume;
    bool strict = false;
    int threads = 1;
    double grw_eps = 1e-8, grw_C = 0.0;

    auto add_common = [&](CLI::App* c, bool need_config) {
        auto* opt = c->add_option("-c,--config", config_path, "INI configuration file");
        if (need_config) opt->required();
        c->add_option("-o,--outdir", outdir, "output directory");
        c->add_flag("--strict", strict, "nonzero exit on any failed check");
        c->add_option("--threads", threads,
                      "worker threads (wall-clock only; never affects results)");
        return c;
    };

    auto* c_run = add_common(app.add_subcommand("run", "integrate and emit snapshots"), true);
    c_run->add_option("--resume", resume, "manifest.json of a partial run to continue");
    auto* c_ver = add_common(app.add_subcommand("verify-operators",
                                                "MMS convergence ladders"), false);
    auto* c_erg = add_common(app.add_subcommand("energy-report",
                                                "ledger from stored snapshots"), false);
    auto* c_abs = add_common(app.add_subcommand("absorption",
                                                "absorbing-set fit over three runs"), true);
    auto* c_grw = add_common(app.add_subcommand("gronwall",
                                                "continuous-dependence check"), true);
    c_grw->add_option("--perturbation", grw_eps, "initial perturbation magnitude");
    c_grw->add_option("--constant", grw_C, "frozen constant C (0: calibrate here)");
    auto* c_dim = add_common(app.add_subcommand("trajectory-dim",
                                                "attractor dimension estimate"), true);
    auto* c_hyp = add_common(app.add_subcommand("check-hypotheses",
                                                "certify growth/Lipschitz constants"), true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_ver->parsed()) return cmd_verify_operators(outdir, strict);
        if (c_erg->parsed()) return cmd_energy_report(outdir);
        RunConfig cfg = parse_config(config_path);
        if (c_run->parsed()) return cmd_run(cfg, outdir, resume);
        if (c_abs->parsed()) return cmd_absorption(cfg, outdir, strict);
        if (c_grw->parsed()) return cmd_gronwall(cfg, outdir, grw_eps, grw_C, strict);
        if (c_dim->parsed()) return cmd_trajectory_dim(cfg, outdir, strict);
        if (c_hyp->parsed()) return cmd_check_hypotheses(cfg, outdir, strict);
    } catch (const std::exception& e) {
        std::cerr << "{\"error\": \"" << e.what() << "\"}\n";
        return 1;
    }
    return 0;
}
