#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace chns {

struct DimensionReport {
    double slope = 0.0;     // correlation-dimension estimate
    double ci_low = 0.0;
    double ci_high = 0.0;
    double fit_lo = 0.0;    // ε range used for the fit
    double fit_hi = 0.0;
    int n_points = 0;
    double box_count_slope = 0.0;  // cross-check on an MDS embedding
};

namespace detail {

// least squares y = a + b x with the 95% interval of b
inline void linfit(const std::vector<double>& x, const std::vector<double>& y,
                   double& b, double& blo, double& bhi) {
    const int n = (int)x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i]; }
    const double den = n * sxx - sx * sx;
    b = (n * sxy - sx * sy) / den;
    const double a = (sy - b * sx) / n;
    double rss = 0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - a - b * x[i];
        rss += r * r;
    }
    const double se = (n > 2) ? std::sqrt(rss / (n - 2) * n / den) : 0.0;
    blo = b - 1.96 * se;
    bhi = b + 1.96 * se;
}

// box-counting slope on low-dimensional coordinates
inline double box_count_slope(const Eigen::MatrixXd& X) {
    const int n = (int)X.rows(), m = (int)X.cols();
    double extent = 0.0;
    for (int c = 0; c < m; ++c)
        extent = std::max(extent, X.col(c).maxCoeff() - X.col(c).minCoeff());
    if (extent <= 0.0) return 0.0;
    std::vector<double> lx, ly;
    for (int lev = 1; lev <= 7; ++lev) {
        const double size = extent / (1 << lev);
        std::set<std::vector<long>> boxes;
        for (int i = 0; i < n; ++i) {
            std::vector<long> key(m);
            for (int c = 0; c < m; ++c)
                key[c] = (long)std::floor((X(i, c) - X.col(c).minCoeff()) / size);
            boxes.insert(key);
        }
        const size_t cnt = boxes.size();
        if (cnt > 1 && (int)cnt < n / 2) {
            lx.push_back(std::log(1.0 / size));
            ly.push_back(std::log((double)cnt));
        }
    }
    if (lx.size() < 3) return 0.0;
    double b, lo, hi;
    linfit(lx, ly, b, lo, hi);
    return b;
}

} // namespace detail

// Correlation-dimension estimate from a full pairwise distance matrix, with
// a box-counting cross-check on a classical-MDS embedding.  The fit uses the
// scaling region where the pair-correlation sum lies in [0.01, 0.25].
inline DimensionReport fractal_dimension(const std::vector<std::vector<double>>& dist) {
    const int n = (int)dist.size();
    if (n < 200) throw std::invalid_argument("too few points");
    std::vector<double> d;
    d.reserve((size_t)n * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d.push_back(dist[i][j]);
    std::sort(d.begin(), d.end());
    DimensionReport rep;
    rep.n_points = n;
    if (d.back() < 1e-14) return rep;  // all points coincide: dimension 0

    const double dmax = d.back();
    double dmin = dmax;
    for (double x : d)
        if (x > 1e-14 * dmax) { dmin = x; break; }
    std::vector<double> lx, ly;
    const int grid = 48;
    for (int g = 0; g <= grid; ++g) {
        const double eps = dmin * std::pow(dmax / dmin, (double)g / grid);
        const size_t cnt = std::upper_bound(d.begin(), d.end(), eps) - d.begin();
        const double C = (double)cnt / d.size();
        if (C >= 0.01 && C <= 0.25) {
            lx.push_back(std::log(eps));
            ly.push_back(std::log(C));
        }
    }
    if (lx.size() < 5) throw std::runtime_error("no scaling region found");
    detail::linfit(lx, ly, rep.slope, rep.ci_low, rep.ci_high);
    rep.fit_lo = std::exp(lx.front());
    rep.fit_hi = std::exp(lx.back());

    // classical MDS: double-center the squared distances, top 3 components
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = -0.5 * dist[i][j] * dist[i][j];
    Eigen::VectorXd rm = B.rowwise().mean();
    const double tm = rm.mean();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) += tm - rm[i] - rm[j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    const int m = std::min(3, n);
    Eigen::MatrixXd X(n, m);
    for (int c = 0; c < m; ++c) {
        const double ev = std::max(0.0, es.eigenvalues()[n - 1 - c]);
        X.col(c) = es.eigenvectors().col(n - 1 - c) * std::sqrt(ev);
    }
    rep.box_count_slope = detail::box_count_slope(X);
    return rep;
}

} // namespace chns
