#include <catch2/catch_amalgamated.hpp>

#include <chns/dimension.hpp>

#include <cmath>

using namespace chns;

namespace {

std::vector<std::vector<double>> pairwise(const std::vector<std::pair<double, double>>& pts) {
    const int n = (int)pts.size();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double dx = pts[i].first - pts[j].first;
            const double dy = pts[i].second - pts[j].second;
            d[i][j] = std::sqrt(dx * dx + dy * dy);
        }
    return d;
}

} // namespace

TEST_CASE("circle has dimension one") {
    std::vector<std::pair<double, double>> pts;
    const int n = 256;
    for (int i = 0; i < n; ++i) {
        const double th = 2 * M_PI * i / n;
        pts.emplace_back(std::cos(th), std::sin(th));
    }
    DimensionReport rep = fractal_dimension(pairwise(pts));
    CHECK(rep.n_points == n);
    CHECK(rep.slope == Catch::Approx(1.0).margin(0.3));
    CHECK(rep.ci_low <= rep.slope);
    CHECK(rep.ci_high >= rep.slope);
    CHECK(rep.fit_lo < rep.fit_hi);
    CHECK(rep.box_count_slope == Catch::Approx(1.0).margin(0.4));
}

TEST_CASE("filled square has dimension two") {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            pts.emplace_back(i / 16.0, j / 16.0);
    DimensionReport rep = fractal_dimension(pairwise(pts));
    CHECK(rep.slope == Catch::Approx(2.0).margin(0.4));
}

TEST_CASE("coincident points have dimension zero") {
    const int n = 200;
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    DimensionReport rep = fractal_dimension(d);
    CHECK(rep.slope == 0.0);
    CHECK(rep.ci_low == 0.0);
    CHECK(rep.ci_high == 0.0);
}

TEST_CASE("too few points is an error") {
    std::vector<std::vector<double>> d(10, std::vector<double>(10, 1.0));
    for (int i = 0; i < 10; ++i) d[i][i] = 0.0;
    CHECK_THROWS_WITH(fractal_dimension(d),
                      Catch::Matchers::ContainsSubstring("too few points"));
}

TEST_CASE("two coincident clusters have no scaling region") {
    const int n = 200;
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if ((i < n / 2) != (j < n / 2)) d[i][j] = 1.0;
    CHECK_THROWS_WITH(fractal_dimension(d),
                      Catch::Matchers::ContainsSubstring("no scaling region"));
}
