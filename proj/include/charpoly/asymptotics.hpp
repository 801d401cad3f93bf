#pragma once

// Closed-form asymptotic laws for the central integral, the moment exponent
// nu(k) with its integer-k crossover, and least-squares fitting helpers for
// recovering law parameters from numerical data.

#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "charpoly/errors.hpp"
#include "charpoly/rmt.hpp"
#include "charpoly/special.hpp"

namespace charpoly {

enum class LawRegime { SMALL_EPS, LARGE_EPS };

struct AsymptoticLaw {
    double power_exponent = 0.0;  // exponent of 1/eps
    int log_power = 0;            // power of log(1/eps)
    double constant = 0.0;
    LawRegime regime = LawRegime::SMALL_EPS;
};

/// Moment divergence exponent nu(k) = int(k) (k - (1+int(k))/2); piecewise
/// linear, equal to k(k-1)/2 at integer k.
inline double nu_exponent(double k) {
    if (!(k > 0.0)) throw std::domain_error("nu_exponent: k must be > 0");
    const double p = std::floor(k);
    return p * (k - 0.5 * (1.0 + p));
}

struct ClusterDominance {
    int p = 0;             // dominant cluster size; 0 signals no divergence
    bool at_crossover = false;
};

/// Cluster of size p = int(k) dominates the k-th moment; exactly at integer
/// k two sizes tie and the extra log factor appears. k < 1 carries no
/// divergence (p = 0).
inline ClusterDominance dominant_cluster(double k) {
    if (!(k > 0.0)) throw std::domain_error("dominant_cluster: k must be > 0");
    if (k < 1.0) return ClusterDominance{0, false};
    const double p = std::floor(k);
    return ClusterDominance{static_cast<int>(p), p == k};
}

/// Small-eps law: F~_n(eps) ~ constant * ln(1/eps), i.e. F_n has power
/// n(n-1)/2 of 1/eps and one log factor.
inline AsymptoticLaw small_eps_law(int n) {
    if (n < 1) throw std::domain_error("small_eps_law: n must be >= 1");
    double lg = (n - 1) * std::log(2.0) - 0.5 * n * std::log(3.14159265358979323846) +
                std::log(static_cast<double>(n));
    for (int j = 0; j < n; ++j)
        lg += log_gamma(1.0 + 0.5 * j) + log_gamma(0.5 * (j + 1));
    return AsymptoticLaw{0.5 * n * (n - 1), 1, std::exp(lg),
                         LawRegime::SMALL_EPS};
}

/// Large-eps law: F_n(eps) ~ constant / eps^{n^2/2} with
/// constant = n! (2pi)^{-n/2} [prod Gamma(j/2)]^2.
inline AsymptoticLaw large_eps_law(int n) {
    if (n < 1) throw std::domain_error("large_eps_law: n must be >= 1");
    double lg = log_gamma(n + 1.0) -
                0.5 * n * std::log(2.0 * 3.14159265358979323846);
    double gp = 0.0;
    for (int j = 1; j <= n; ++j) gp += log_gamma(0.5 * j);
    lg += 2.0 * gp;
    return AsymptoticLaw{0.5 * n * n, 0, std::exp(lg), LawRegime::LARGE_EPS};
}

/// Perturbative closed form for the moment ratio:
///   K_n = (pi rho(mu) J / (-i [mu1 - mu2*] / J))^{n^2/2}.
inline std::complex<double> perturbative_ratio(int n, double mu, double J,
                                               std::complex<double> mu1,
                                               std::complex<double> mu2_star) {
    if (n < 1) throw std::domain_error("perturbative_ratio: n must be >= 1");
    const std::complex<double> diff = mu1 - mu2_star;
    if (!(diff.imag() > 0.0))
        throw std::domain_error("perturbative_ratio: Im(mu1 - mu2*) must be > 0");
    const double rho = mean_density(mu, J);  // bulk check
    const std::complex<double> base =
        3.14159265358979323846 * rho * J * J /
        (std::complex<double>(0.0, -1.0) * diff);
    return std::exp(0.5 * static_cast<double>(n) * n * std::log(base));
}

struct FitResult {
    double fitted_exponent = 0.0;
    double fitted_constant = 0.0;
    double residual = 0.0;  // RMS of ln-space residuals
};

namespace detail {

// plain 2-parameter least squares y = c0 + c1 x
inline std::pair<double, double> linear_fit(const std::vector<double>& x,
                                            const std::vector<double>& y) {
    const std::size_t m = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = m * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("fit: degenerate grid");
    const double c1 = (m * sxy - sx * sy) / det;
    const double c0 = (sy - c1 * sx) / m;
    return {c0, c1};
}

inline void check_fit_grid(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 5)
        throw std::invalid_argument("fit: need at least 5 points");
    double lo = pts.front().first, hi = pts.front().first;
    for (const auto& p : pts) {
        if (!(p.first > 0.0) || !(p.second > 0.0))
            throw std::invalid_argument("fit: points must be positive");
        lo = std::min(lo, p.first);
        hi = std::max(hi, p.first);
    }
    if (hi / lo < 99.0)
        throw std::invalid_argument("fit: grid must span >= 2 decades");
}

}  // namespace detail

/// Fit ln(value) = ln(constant) + exponent * ln(1/eps) [+ ln ln(1/eps) when
/// with_log is set; the log power is pinned to 1, matching the laws here].
inline FitResult crossover_fit(const std::vector<std::pair<double, double>>& points,
                               bool with_log) {
    detail::check_fit_grid(points);
    std::vector<double> x, y;
    x.reserve(points.size());
    y.reserve(points.size());
    for (const auto& p : points) {
        const double linv = std::log(1.0 / p.first);
        if (with_log && !(linv > 1.0))
            throw std::invalid_argument(
                "fit: with_log requires eps well below 1/e");
        x.push_back(linv);
        y.push_back(std::log(p.second) - (with_log ? std::log(linv) : 0.0));
    }
    const auto [c0, c1] = detail::linear_fit(x, y);
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (c0 + c1 * x[i]);
        rss += r * r;
    }
    return FitResult{c1, std::exp(c0), std::sqrt(rss / x.size())};
}

struct LogLawFit {
    double slope = 0.0;      // coefficient of ln(1/eps)
    double intercept = 0.0;  // additive O(1) offset
    double residual = 0.0;
};

/// Fit value = slope * ln(1/eps) + intercept directly (linear in the value);
/// used for extracting the small-eps log-law constant of F~_n.
inline LogLawFit log_law_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3)
        throw std::invalid_argument("fit: need at least 3 points");
    std::vector<double> x, y;
    for (const auto& p : points) {
        if (!(p.first > 0.0))
            throw std::invalid_argument("fit: eps must be positive");
        x.push_back(std::log(1.0 / p.first));
        y.push_back(p.second);
    }
    const auto [b, a] = detail::linear_fit(x, y);
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (b + a * x[i]);
        rss += r * r;
    }
    return LogLawFit{a, b, std::sqrt(rss / x.size())};
}

}  // namespace charpoly
