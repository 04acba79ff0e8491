#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "physics.hpp"
#include "solver.hpp"

namespace chns {

struct RunConfig {
    ChannelDomain domain{1.0, 1.0, 64, 64};
    ModelParams params;
    SchemeConfig scheme;
    struct RunSection {
        double T = 1.0;
        int snapshot_cadence = 1;
        uint64_t seed = 0;
        double init_amplitude = 0.1;
    } run;
    struct TrajectorySection {
        double ell = 1.0;
        int K = 32;
        int ensemble_size = 200;
        double burn_in = 0.2;
    } trajectory;

    void validate() const {
        Grid check(domain);  // domain constraints
        params.validate();
        scheme.validate();
        if (!(run.T > 0.0)) throw std::invalid_argument("run.T must be > 0");
        if (run.snapshot_cadence < 1)
            throw std::invalid_argument("run.snapshot_cadence must be >= 1");
        if (!(trajectory.ell > 0.0))
            throw std::invalid_argument("trajectory.ell must be > 0");
        if (trajectory.K < 1) throw std::invalid_argument("trajectory.K must be >= 1");
        if (trajectory.ensemble_size < 2)
            throw std::invalid_argument("trajectory.ensemble_size must be >= 2");
        if (trajectory.burn_in < 0.0 || trajectory.burn_in >= 1.0)
            throw std::invalid_argument("trajectory.burn_in must lie in [0, 1)");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] inline void cfg_error(const std::string& what, int line,
                                   const std::string& text) {
    std::ostringstream os;
    os << what << " at line " << line << ": '" << text << "'";
    throw std::invalid_argument(os.str());
}

inline double to_double(const std::string& v, int line, const std::string& text) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) cfg_error("type mismatch", line, text);
        return x;
    } catch (const std::invalid_argument&) {
        cfg_error("type mismatch", line, text);
    } catch (const std::out_of_range&) {
        cfg_error("type mismatch", line, text);
    }
}

inline long to_int(const std::string& v, int line, const std::string& text) {
    try {
        size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) cfg_error("type mismatch", line, text);
        return x;
    } catch (const std::invalid_argument&) {
        cfg_error("type mismatch", line, text);
    } catch (const std::out_of_range&) {
        cfg_error("type mismatch", line, text);
    }
}

inline Polynomial to_poly(const std::string& v, int line, const std::string& text) {
    Polynomial p;
    p.c.clear();
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) cfg_error("type mismatch", line, text);
        p.c.push_back(to_double(tok, line, text));
    }
    if (p.c.empty()) cfg_error("type mismatch", line, text);
    return p;
}

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const size_t hash = s.find_first_of("#;");
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') detail::cfg_error("malformed section header", line, raw);
            section = detail::trim(s.substr(1, s.size() - 2));
            if (section != "domain" && section != "params" && section != "nonlinearity" &&
                section != "scheme" && section != "run" && section != "trajectory")
                detail::cfg_error("unknown section '" + section + "'", line, raw);
            continue;
        }
        const size_t eq = s.find('=');
        if (eq == std::string::npos) detail::cfg_error("expected 'key = value'", line, raw);
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (section.empty()) detail::cfg_error("key outside any section", line, raw);
        auto d = [&] { return detail::to_double(val, line, raw); };
        auto i = [&] { return detail::to_int(val, line, raw); };

        if (section == "domain") {
            if (key == "Lx") cfg.domain.Lx = d();
            else if (key == "Ly") cfg.domain.Ly = d();
            else if (key == "Nx") cfg.domain.Nx = (int)i();
            else if (key == "Ny") cfg.domain.Ny = (int)i();
            else detail::cfg_error("unknown key '" + key + "'", line, raw);
        } else if (section == "params") {
            if (key == "nu") cfg.params.nu = d();
            else if (key == "lambda") cfg.params.lambda = d();
            else if (key == "gamma") cfg.params.gamma = d();
            else if (key == "alpha") cfg.params.alpha = d();
            else if (key == "beta") cfg.params.beta = d();
            else if (key == "h_kind") {
                if (val == "zero") cfg.params.forcing.kind = Forcing::Kind::Zero;
                else if (val == "shear") cfg.params.forcing.kind = Forcing::Kind::Shear;
                else if (val == "cellular") cfg.params.forcing.kind = Forcing::Kind::Cellular;
                else detail::cfg_error("type mismatch", line, raw);
            } else if (key == "h_amplitude") cfg.params.forcing.amplitude = d();
            else if (key == "h_mode_x") cfg.params.forcing.mode_x = (int)i();
            else if (key == "h_mode_y") cfg.params.forcing.mode_y = (int)i();
            else detail::cfg_error("unknown key '" + key + "'", line, raw);
        } else if (section == "nonlinearity") {
            if (key == "poly_f") cfg.params.hyp.f = detail::to_poly(val, line, raw);
            else if (key == "poly_g") cfg.params.hyp.g = detail::to_poly(val, line, raw);
            else if (key == "p") cfg.params.hyp.p = (int)i();
            else if (key == "q") cfg.params.hyp.q = (int)i();
            else detail::cfg_error("unknown key '" + key + "'", line, raw);
        } else if (section == "scheme") {
            if (key == "dt") cfg.scheme.dt = d();
            else if (key == "S_bulk") cfg.scheme.S_bulk = d();
            else if (key == "S_wall") cfg.scheme.S_wall = d();
            else if (key == "n_modes") cfg.scheme.n_modes = (int)i();
            else if (key == "mode") {
                if (val == "projection_fd") cfg.scheme.mode = SchemeConfig::Mode::ProjectionFD;
                else if (val == "spectral_galerkin")
                    cfg.scheme.mode = SchemeConfig::Mode::SpectralGalerkin;
                else detail::cfg_error("type mismatch", line, raw);
            } else detail::cfg_error("unknown key '" + key + "'", line, raw);
        } else if (section == "run") {
            if (key == "T") cfg.run.T = d();
            else if (key == "snapshot_cadence") cfg.run.snapshot_cadence = (int)i();
            else if (key == "seed") cfg.run.seed = (uint64_t)i();
            else if (key == "init_amplitude") cfg.run.init_amplitude = d();
            else detail::cfg_error("unknown key '" + key + "'", line, raw);
        } else {  // trajectory
            if (key == "ell") cfg.trajectory.ell = d();
            else if (key == "K") cfg.trajectory.K = (int)i();
            else if (key == "ensemble_size") cfg.trajectory.ensemble_size = (int)i();
            else if (key == "burn_in") cfg.trajectory.burn_in = d();
            else detail::cfg_error("unknown key '" + key + "'", line, raw);
        }
    }
    cfg.validate();
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

inline std::string serialize_config(const RunConfig& c) {
    using detail::fmt;
    std::ostringstream o;
    o << "[domain]\n"
      << "Lx = " << fmt(c.domain.Lx) << "\nLy = " << fmt(c.domain.Ly)
      << "\nNx = " << c.domain.Nx << "\nNy = " << c.domain.Ny << "\n\n[params]\n"
      << "nu = " << fmt(c.params.nu) << "\nlambda = " << fmt(c.params.lambda)
      << "\ngamma = " << fmt(c.params.gamma) << "\nalpha = " << fmt(c.params.alpha)
      << "\nbeta = " << fmt(c.params.beta) << "\nh_kind = ";
    switch (c.params.forcing.kind) {
        case Forcing::Kind::Zero: o << "zero"; break;
        case Forcing::Kind::Shear: o << "shear"; break;
        case Forcing::Kind::Cellular: o << "cellular"; break;
    }
    o << "\nh_amplitude = " << fmt(c.params.forcing.amplitude)
      << "\nh_mode_x = " << c.params.forcing.mode_x
      << "\nh_mode_y = " << c.params.forcing.mode_y << "\n\n[nonlinearity]\npoly_f = ";
    for (size_t m = 0; m < c.params.hyp.f.c.size(); ++m)
        o << (m ? ", " : "") << fmt(c.params.hyp.f.c[m]);
    o << "\npoly_g = ";
    for (size_t m = 0; m < c.params.hyp.g.c.size(); ++m)
        o << (m ? ", " : "") << fmt(c.params.hyp.g.c[m]);
    o << "\np = " << c.params.hyp.p << "\nq = " << c.params.hyp.q << "\n\n[scheme]\n"
      << "dt = " << fmt(c.scheme.dt) << "\nS_bulk = " << fmt(c.scheme.S_bulk)
      << "\nS_wall = " << fmt(c.scheme.S_wall) << "\nmode = "
      << (c.scheme.mode == SchemeConfig::Mode::ProjectionFD ? "projection_fd"
                                                            : "spectral_galerkin")
      << "\nn_modes = " << c.scheme.n_modes << "\n\n[run]\n"
      << "T = " << fmt(c.run.T) << "\nsnapshot_cadence = " << c.run.snapshot_cadence
      << "\nseed = " << c.run.seed
      << "\ninit_amplitude = " << fmt(c.run.init_amplitude) << "\n\n[trajectory]\n"
      << "ell = " << fmt(c.trajectory.ell) << "\nK = " << c.trajectory.K
      << "\nensemble_size = " << c.trajectory.ensemble_size
      << "\nburn_in = " << fmt(c.trajectory.burn_in) << "\n";
    return o.str();
}

} // namespace chns
