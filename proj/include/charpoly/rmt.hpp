#pragma once

// GOE sampling and spectral machinery: dense symmetric matrices, a
// Householder + implicit-shift QL eigensolver, the log-domain characteristic
// polynomial, semicircle density, and the saddle-point geometry.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "charpoly/errors.hpp"
#include "charpoly/rng.hpp"

namespace charpoly {

struct GOEConfig {
    int dim = 1;              // N
    double coupling = 1.0;    // J
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    void validate() const {
        if (dim < 1) throw std::domain_error("GOEConfig: dim must be >= 1");
        if (!(coupling > 0.0))
            throw std::domain_error("GOEConfig: coupling must be > 0");
    }
};

struct SpectralParams {
    double center = 0.0;  // mu
    double offset = 0.0;  // omega
    double reg = 0.0;     // delta
    std::complex<double> mu1{0.0, 0.0};       // mu + omega/2 + i delta
    std::complex<double> mu2_star{0.0, 0.0};  // mu - omega/2 - i delta
    std::complex<double> eps{0.0, 0.0};       // filled by epsilon_from_params
};

struct SpectralGeometry {
    double rho = 0.0;
    std::complex<double> q_plus{0.0, 0.0};
    std::complex<double> q_minus{0.0, 0.0};
};

inline SpectralParams make_spectral_params(double center, double offset,
                                           double reg) {
    if (!(reg > 0.0))
        throw std::domain_error("SpectralParams: regularizer must be > 0");
    SpectralParams sp;
    sp.center = center;
    sp.offset = offset;
    sp.reg = reg;
    sp.mu1 = std::complex<double>(center + 0.5 * offset, reg);
    sp.mu2_star = std::complex<double>(center - 0.5 * offset, -reg);
    return sp;
}

/// Semicircle density rho(mu) = sqrt(2J^2 - mu^2) / (pi J^2).
inline double mean_density(double mu, double J) {
    if (!(J > 0.0)) throw std::domain_error("mean_density: J must be > 0");
    const double disc = 2.0 * J * J - mu * mu;
    if (!(disc > 0.0))
        throw outside_bulk_error("mean_density: |mu| >= J*sqrt(2)");
    return std::sqrt(disc) / (3.14159265358979323846 * J * J);
}

/// Saddle points q_pm = (i mu pm sqrt(2J^2 - mu^2)) / (2J^2).
inline SpectralGeometry saddle_points(double mu, double J) {
    SpectralGeometry g;
    g.rho = mean_density(mu, J);  // validates the bulk condition
    const double root = std::sqrt(2.0 * J * J - mu * mu);
    const double den = 2.0 * J * J;
    g.q_plus = std::complex<double>(root / den, mu / den);
    g.q_minus = std::complex<double>(-root / den, mu / den);
    return g;
}

/// eps = -i N pi rho(mu) (mu1 - mu2*) / 2; real positive when omega = 0.
inline std::complex<double> epsilon_from_params(const GOEConfig& cfg,
                                                const SpectralParams& sp) {
    cfg.validate();
    const double rho = mean_density(sp.center, cfg.coupling);
    const std::complex<double> diff = sp.mu1 - sp.mu2_star;
    std::complex<double> eps = std::complex<double>(0.0, -1.0) *
                               (0.5 * cfg.dim * 3.14159265358979323846 * rho) *
                               diff;
    if (sp.offset == 0.0) eps = std::complex<double>(eps.real(), 0.0);
    return eps;
}

struct Matrix {
    int n = 0;
    std::vector<double> a;  // row-major, n*n

    Matrix() = default;
    explicit Matrix(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

/// Draw one GOE matrix: diagonal variance J^2/N, off-diagonal J^2/(2N).
/// Entry (i,j), i <= j, consumes Gaussian number tri(i,j) of the stream, so
/// the draw is bit-reproducible for fixed (seed, stream).
inline Matrix sample_goe(const GOEConfig& cfg) {
    cfg.validate();
    const int N = cfg.dim;
    const double sd_diag = cfg.coupling / std::sqrt(static_cast<double>(N));
    const double sd_off = cfg.coupling / std::sqrt(2.0 * N);
    CounterRng rng(cfg.seed, cfg.stream);
    Matrix H(N);
    std::uint64_t idx = 0;
    for (int i = 0; i < N; ++i) {
        for (int j = i; j < N; ++j, ++idx) {
            const double z = rng.normal(idx);
            const double v = (i == j ? sd_diag : sd_off) * z;
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return H;
}

namespace detail {

// Householder reduction of a symmetric matrix to tridiagonal form, eigenvalue
// variant of the classic tred2 (no eigenvector accumulation). The input is
// destroyed; d receives the diagonal, e the subdiagonal in e[1..n-1].
inline void tridiagonalize(Matrix& m, std::vector<double>& d,
                           std::vector<double>& e) {
    const int n = m.n;
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::abs(m(i, k));
            if (scale == 0.0) {
                e[i] = m(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    m(i, k) /= scale;
                    h += m(i, k) * m(i, k);
                }
                double f = m(i, l);
                double g = (f >= 0.0 ? -std::sqrt(h) : std::sqrt(h));
                e[i] = scale * g;
                h -= f * g;
                m(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += m(j, k) * m(i, k);
                    for (int k = j + 1; k <= l; ++k) g += m(k, j) * m(i, k);
                    e[j] = g / h;
                    f += e[j] * m(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = m(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k)
                        m(j, k) -= f * e[k] + g * m(i, k);
                }
            }
        } else {
            e[i] = m(i, l);
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) d[i] = m(i, i);
}

// Implicit-shift QL iteration on a tridiagonal matrix (eigenvalues only).
// Sweep budget 50*n; off-diagonal deflation threshold 1e-14 relative.
inline void ql_implicit(std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(d.size());
    if (n <= 1) return;
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    long iter_budget = 50L * n;
    for (int l = 0; l < n; ++l) {
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-14 * dd) break;
            }
            if (m != l) {
                if (--iter_budget < 0)
                    throw solver_failure(
                        "spectrum: QL iteration exceeded 50*N sweeps");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace detail

/// Eigenvalues of a symmetric matrix, ascending. Throws solver_failure if the
/// QL iteration does not converge within its sweep budget.
inline std::vector<double> spectrum(const Matrix& H) {
    Matrix work = H;
    std::vector<double> d, e;
    detail::tridiagonalize(work, d, e);
    detail::ql_implicit(d, e);
    std::sort(d.begin(), d.end());
    return d;
}

/// log Z(mu) = sum_i Log(mu - lambda_i), principal branch per factor.
/// For Im mu > 0 each summand has imaginary part in (0, pi).
inline std::complex<double> log_char_poly(const std::vector<double>& eigs,
                                          std::complex<double> mu) {
    if (mu.imag() == 0.0)
        throw std::domain_error("log_char_poly: Im(mu) must be nonzero");
    std::complex<double> acc(0.0, 0.0);
    for (const double lam : eigs) acc += std::log(mu - lam);
    return acc;
}

}  // namespace charpoly
