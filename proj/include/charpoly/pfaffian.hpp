#pragma once

// Pfaffian of small dense skew-symmetric matrices by first-row expansion.
// Cost is (n-1)!! terms; fine for the n <= 10 sizes used here.

#include <cstddef>
#include <vector>

#include "charpoly/errors.hpp"

namespace charpoly {

namespace detail {

// Pfaffian of the submatrix of a (row-major, dim x dim) restricted to the
// active index set. Expansion along the first active row:
//   Pf = sum_j (-1)^j a(i0, ij) Pf(rest)
inline double pf_recursive(const std::vector<double>& a, int dim,
                           const std::vector<int>& idx) {
    const std::size_t m = idx.size();
    if (m == 0) return 1.0;
    double acc = 0.0;
    double sign = 1.0;
    std::vector<int> rest;
    rest.reserve(m - 2);
    for (std::size_t j = 1; j < m; ++j) {
        const double aij =
            a[static_cast<std::size_t>(idx[0]) * dim + idx[j]];
        if (aij != 0.0) {
            rest.clear();
            for (std::size_t t = 1; t < m; ++t)
                if (t != j) rest.push_back(idx[t]);
            acc += sign * aij * pf_recursive(a, dim, rest);
        }
        sign = -sign;
    }
    return acc;
}

}  // namespace detail

/// Pfaffian of an n x n skew-symmetric matrix, n even.
inline double pfaffian(const std::vector<double>& a, int n) {
    if (n < 0 || n % 2 != 0)
        throw std::domain_error("pfaffian: dimension must be even");
    if (a.size() != static_cast<std::size_t>(n) * n)
        throw std::domain_error("pfaffian: storage size mismatch");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return detail::pf_recursive(a, n, idx);
}

/// Pfaffian of the matrix with rows/columns r and c removed (n even, r != c).
/// Used for first-order error propagation through the Pfaffian.
inline double pfaffian_minor(const std::vector<double>& a, int n, int r, int c) {
    std::vector<int> idx;
    idx.reserve(n - 2);
    for (int i = 0; i < n; ++i)
        if (i != r && i != c) idx.push_back(i);
    return detail::pf_recursive(a, n, idx);
}

}  // namespace charpoly
