#pragma once

#include <complex>
#include <vector>

namespace chns {

// LDL^T factorization of a symmetric tridiagonal matrix (diag a, offdiag e).
// Solves real or complex right-hand sides in O(n).
struct TriFactor {
    std::vector<double> d;  // pivot diagonal
    std::vector<double> l;  // subdiagonal multipliers, l[0] unused

    void factor(const std::vector<double>& a, const std::vector<double>& e) {
        const int n = (int)a.size();
        d.assign(n, 0.0);
        l.assign(n, 0.0);
        d[0] = a[0];
        for (int j = 1; j < n; ++j) {
            l[j] = e[j - 1] / d[j - 1];
            d[j] = a[j] - l[j] * e[j - 1];
        }
        e_ = e;
    }

    template <class T>
    void solve(T* x) const {
        const int n = (int)d.size();
        for (int j = 1; j < n; ++j) x[j] -= l[j] * x[j - 1];
        x[n - 1] /= d[n - 1];
        for (int j = n - 2; j >= 0; --j) x[j] = (x[j] - e_[j] * x[j + 1]) / d[j];
    }

    int size() const { return (int)d.size(); }

private:
    std::vector<double> e_;
};

} // namespace chns
