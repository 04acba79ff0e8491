#include <catch2/catch_amalgamated.hpp>

#include <chns/fourier.hpp>
#include <chns/grid.hpp>

#include <cmath>
#include <random>

using namespace chns;

TEST_CASE("round trip") {
    const int n = 32;
    FourierX fft(n);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    Array2D f(n, 4), back(n, 4);
    for (auto& x : f.v) x = U(rng);
    Spectrum s;
    fft.forward(f, s);
    fft.inverse(s, back);
    for (size_t m = 0; m < f.size(); ++m)
        CHECK(back.v[m] == Catch::Approx(f.v[m]).margin(1e-13));
}

TEST_CASE("parseval") {
    const int n = 64;
    FourierX fft(n);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<double> f(n);
    for (auto& x : f) x = U(rng);
    std::vector<std::complex<double>> s(fft.nc());
    fft.forward_row(f.data(), s.data());
    double direct = 0.0;
    for (double x : f) direct += x * x;
    double spectral = 0.0;
    for (int k = 0; k < fft.nc(); ++k) spectral += parseval_weight(k, n) * std::norm(s[k]);
    CHECK(spectral == Catch::Approx(direct).epsilon(1e-13));
}

TEST_CASE("shifted derivative multipliers") {
    // exact for a resolved mode: d/dx sin(2 pi x) sampled at faces
    const int n = 32;
    const double Lx = 1.0;
    const double dx = Lx / n;
    FourierX fft(n);
    std::vector<double> f(n), out(n);
    for (int i = 0; i < n; ++i) f[i] = std::sin(2 * M_PI * (i + 0.5) * dx);
    std::vector<std::complex<double>> s(fft.nc());
    fft.forward_row(f.data(), s.data());
    for (int k = 0; k < fft.nc(); ++k) s[k] *= deriv_shift_c2f(k, n, Lx);
    fft.inverse_row(s.data(), out.data());
    for (int i = 0; i < n; ++i)
        CHECK(out[i] == Catch::Approx(2 * M_PI * std::cos(2 * M_PI * i * dx)).margin(1e-11));

    // composite c2f then f2c divergence symbol is exactly -k^2
    for (int k = 0; k < n / 2; ++k) {
        auto sym = deriv_shift_c2f(k, n, Lx) * deriv_shift_f2c(k, n, Lx);
        const double kphys = wavenumber(k, Lx);
        CHECK(sym.real() == Catch::Approx(-kphys * kphys).margin(1e-9));
        CHECK(std::abs(sym.imag()) < 1e-9);
    }
}
