#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "diagnostics.hpp"
#include "dimension.hpp"
#include "state.hpp"

namespace chns {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian");

inline constexpr const char* kCodeVersion = "chns 1.0.0";

inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string config_hash(const RunConfig& cfg) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  (unsigned long long)fnv1a64(serialize_config(cfg)));
    return buf;
}

namespace io_detail {

inline void write_raw(const std::filesystem::path& p, const double* data, size_t n) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f.write(reinterpret_cast<const char*>(data), (std::streamsize)(n * sizeof(double)));
}

inline std::vector<double> read_raw(const std::filesystem::path& p, size_t n) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    std::vector<double> v(n);
    f.read(reinterpret_cast<char*>(v.data()), (std::streamsize)(n * sizeof(double)));
    if ((size_t)f.gcount() != n * sizeof(double))
        throw std::runtime_error("short read: " + p.string());
    return v;
}

inline void write_sidecar(const std::filesystem::path& p, const std::string& field,
                          std::vector<int> shape, const std::string& stagger, double t) {
    nlohmann::json j;
    j["field"] = field;
    j["shape"] = shape;
    j["stagger"] = stagger;
    j["t"] = t;
    j["units"] = "dimensionless";
    std::ofstream f(p);
    f << j.dump(2) << "\n";
}

} // namespace io_detail

// One raw little-endian f64 file per field plus a JSON sidecar each.
inline void write_snapshot(const std::filesystem::path& dir, int index,
                           const FieldState& s, const Grid& g) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    char tag[32];
    std::snprintf(tag, sizeof tag, "%06d", index);
    auto emit = [&](const std::string& field, const double* data, std::vector<int> shape,
                    const std::string& stagger) {
        size_t n = 1;
        for (int d : shape) n *= (size_t)d;
        const fs::path base = dir / (field + "_" + tag);
        io_detail::write_raw(fs::path(base).concat(".f64"), data, n);
        io_detail::write_sidecar(fs::path(base).concat(".json"), field, shape, stagger, s.t);
    };
    emit("phi", s.phi.bulk.v.data(), {g.nx(), g.ny()}, "cell");
    emit("phi_lower", s.phi.lower.data(), {g.nx()}, "wall_lower");
    emit("phi_upper", s.phi.upper.data(), {g.nx()}, "wall_upper");
    emit("ux", s.u.ux.v.data(), {g.nx(), g.ny()}, "face_x");
    emit("uy", s.u.uy.v.data(), {g.nx(), g.ny() + 1}, "face_y");
    emit("mu", s.mu.v.data(), {g.nx(), g.ny()}, "cell");
    emit("p", s.p.v.data(), {g.nx(), g.ny()}, "cell");
}

inline FieldState read_snapshot(const std::filesystem::path& dir, int index, const Grid& g) {
    namespace fs = std::filesystem;
    char tag[32];
    std::snprintf(tag, sizeof tag, "%06d", index);
    FieldState s(g);
    auto load = [&](const std::string& field, double* data, size_t n) {
        const fs::path base = dir / (field + "_" + tag);
        std::vector<double> v = io_detail::read_raw(fs::path(base).concat(".f64"), n);
        std::copy(v.begin(), v.end(), data);
        std::ifstream jf(fs::path(base).concat(".json"));
        if (jf) {
            nlohmann::json j;
            jf >> j;
            s.t = j.at("t").get<double>();
        }
    };
    load("phi", s.phi.bulk.v.data(), s.phi.bulk.v.size());
    load("phi_lower", s.phi.lower.data(), s.phi.lower.size());
    load("phi_upper", s.phi.upper.data(), s.phi.upper.size());
    load("ux", s.u.ux.v.data(), s.u.ux.v.size());
    load("uy", s.u.uy.v.data(), s.u.uy.v.size());
    load("mu", s.mu.v.data(), s.mu.v.size());
    load("p", s.p.v.data(), s.p.v.size());
    return s;
}

inline void write_energy_csv(const std::filesystem::path& path,
                             const std::vector<EnergyReport>& led) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "t,J,dJ_dt,wall_dissipation,chem_dissipation,viscous_dissipation,residual\n";
    char buf[256];
    for (const auto& r : led) {
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.t, r.J, r.dJ_dt, r.wall_dissipation, r.chem_dissipation,
                      r.viscous_dissipation, r.residual);
        f << buf;
    }
}

inline void write_manifest(const std::filesystem::path& dir, const RunConfig& cfg,
                           int n_snapshots) {
    nlohmann::json j;
    j["code_version"] = kCodeVersion;
    j["config_hash"] = config_hash(cfg);
    j["config"] = serialize_config(cfg);
    j["grid"] = {{"Lx", cfg.domain.Lx}, {"Ly", cfg.domain.Ly},
                 {"Nx", cfg.domain.Nx}, {"Ny", cfg.domain.Ny}};
    j["n_snapshots"] = n_snapshots;
    std::ofstream f(dir / "manifest.json");
    f << j.dump(2) << "\n";
}

inline void write_absorption_json(const std::filesystem::path& path,
                                  const AbsorptionFit& fit) {
    nlohmann::json j;
    j["delta"] = fit.delta;
    j["rho_over_delta"] = fit.rho_over_delta;
    j["rho1"] = fit.rho1;
    j["max_violation"] = fit.max_violation;
    std::ofstream f(path);
    f << j.dump(2) << "\n";
}

inline void write_gronwall_json(const std::filesystem::path& path,
                                const GronwallReport& rep, double C, bool calibrated) {
    nlohmann::json j;
    j["C"] = C;
    j["calibrated_here"] = calibrated;
    j["M_T"] = rep.M_T;
    j["worst_ratio"] = rep.worst_ratio;
    j["separation_ok"] = rep.separation_ok;
    j["D0"] = rep.D.empty() ? 0.0 : rep.D.front();
    j["D_final"] = rep.D.empty() ? 0.0 : rep.D.back();
    std::ofstream f(path);
    f << j.dump(2) << "\n";
}

inline void write_dimension_json(const std::filesystem::path& path,
                                 const DimensionReport& rep) {
    nlohmann::json j;
    j["slope"] = rep.slope;
    j["ci_low"] = rep.ci_low;
    j["ci_high"] = rep.ci_high;
    j["fit_range"] = {rep.fit_lo, rep.fit_hi};
    j["n_points"] = rep.n_points;
    j["box_count_slope"] = rep.box_count_slope;
    std::ofstream f(path);
    f << j.dump(2) << "\n";
}

inline void write_distance_csv(const std::filesystem::path& path,
                               const std::vector<std::vector<double>>& d) {
    std::ofstream f(path);
    char buf[32];
    for (const auto& row : d) {
        for (size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            f << (i ? "," : "") << buf;
        }
        f << "\n";
    }
}

} // namespace chns
