#pragma once

// Scalar special functions: log-gamma, modified Bessel K0/K1 (plain and
// exponentially scaled), moments of the weight e^(-eps*x)(x^2-1)^(-1/2) on
// [1,inf), and the Gamma-product constant G_n.

#include <cmath>
#include <cstddef>
#include <vector>

#include "charpoly/errors.hpp"

namespace charpoly {

inline double log_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_gamma: requires x > 0");
    return std::lgamma(x);
}

namespace detail {

// Ascending series for K0, K1 on x <= 2 (Abramowitz & Stegun 9.6.10-9.6.11):
//   K0 = -(ln(x/2)+gamma) I0 + sum_{k>=1} H_k q^k/(k!)^2
//   K1 = 1/x + ln(x/2) I1 - (x/4) sum_{k>=0} [psi(k+1)+psi(k+2)] q^k/(k!(k+1)!)
// with q = (x/2)^2, psi(1) = -gamma. Converges geometrically for q <= 1.
inline void bessel_k01_series(double x, double& k0, double& k1) {
    constexpr double euler_gamma = 0.57721566490153286060651209;
    const double q = 0.25 * x * x;
    const double lh = std::log(0.5 * x);

    double term = 1.0;  // q^k / (k!)^2
    double i0 = 1.0;
    double hsum = 0.0;  // harmonic number H_k
    double k0sum = 0.0;
    for (int k = 1; k < 64; ++k) {
        term *= q / (static_cast<double>(k) * k);
        hsum += 1.0 / k;
        i0 += term;
        k0sum += term * hsum;
        if (term < 1e-18 * i0) break;
    }
    k0 = -(lh + euler_gamma) * i0 + k0sum;

    double t = 1.0;  // q^k / (k!(k+1)!)
    double i1r = 0.0;
    double psum = 0.0;
    double psi_a = -euler_gamma;       // psi(k+1)
    double psi_b = 1.0 - euler_gamma;  // psi(k+2)
    for (int k = 0; k < 64; ++k) {
        i1r += t;
        psum += t * (psi_a + psi_b);
        if (k > 2 && t < 1e-18 * i1r) break;
        t *= q / (static_cast<double>(k + 1) * (k + 2));
        psi_a += 1.0 / (k + 1);
        psi_b += 1.0 / (k + 2);
    }
    const double i1 = 0.5 * x * i1r;
    k1 = 1.0 / x + lh * i1 - 0.25 * x * psum;
}

// Steed/Thompson-Barnett continued fraction for x > 2; returns the scaled
// values e^x K0(x), e^x K1(x). See Numerical Recipes' besselik (mu = 0).
inline void bessel_k01_cf2_scaled(double x, double& k0s, double& k1s) {
    constexpr double eps_tol = 1e-16;
    constexpr int max_iter = 1000;
    const double a1 = 0.25;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    double q = a1, c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i <= max_iter; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (a * d + b);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) <= eps_tol) break;
    }
    h = a1 * h;
    k0s = std::sqrt(3.14159265358979323846 / (2.0 * x)) / s;
    k1s = k0s * (x + 0.5 - h) / x;
}

// Scaled pair e^x K0(x), e^x K1(x) valid across both branches.
inline void bessel_k01_scaled(double x, double& k0s, double& k1s) {
    if (x <= 2.0) {
        double k0, k1;
        bessel_k01_series(x, k0, k1);
        const double ex = std::exp(x);
        k0s = k0 * ex;
        k1s = k1 * ex;
    } else {
        bessel_k01_cf2_scaled(x, k0s, k1s);
    }
}

}  // namespace detail

/// Modified Bessel function of the second kind, order 0 or 1.
inline double bessel_k(int order, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("bessel_k: requires eps > 0");
    if (order != 0 && order != 1)
        throw unsupported_order_error("bessel_k: order must be 0 or 1");
    double k0s, k1s;
    detail::bessel_k01_scaled(eps, k0s, k1s);
    return (order == 0 ? k0s : k1s) * std::exp(-eps);
}

/// Exponentially scaled variant e^eps * K_order(eps); safe for large eps.
inline double bessel_k_scaled(int order, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("bessel_k_scaled: requires eps > 0");
    if (order != 0 && order != 1)
        throw unsupported_order_error("bessel_k_scaled: order must be 0 or 1");
    double k0s, k1s;
    detail::bessel_k01_scaled(eps, k0s, k1s);
    return order == 0 ? k0s : k1s;
}

struct WeightedMoment {
    int order = 0;
    double epsilon = 0.0;
    double value = 0.0;
};

namespace detail {

// m_k(eps) = int_1^inf x^k e^(-eps x) (x^2-1)^(-1/2) dx satisfies
// m_{k+1} = -d m_k/d eps, m_0 = K0, m_1 = K1. Writing m_k = a_k(u) K0 +
// b_k(u) K1 with u = 1/eps, the derivative rule gives the polynomial
// recurrence below (all coefficients nonnegative, so evaluation never
// cancels). Tables are built once up to the order cap.
inline constexpr int kMomentOrderCap = 16;  // supports n up to 8

struct MomentCoeffTables {
    std::vector<std::vector<double>> a, b;
    MomentCoeffTables() {
        a.assign(kMomentOrderCap + 1, {});
        b.assign(kMomentOrderCap + 1, {});
        a[0] = {1.0};
        for (int k = 0; k < kMomentOrderCap; ++k) {
            std::vector<double> na(k + 2, 0.0), nb(k + 2, 0.0);
            const auto& ak = a[k];
            const auto& bk = b[k];
            for (std::size_t j = 0; j < ak.size(); ++j) {
                na[j + 1] += static_cast<double>(j) * ak[j];  // -a_k'
                nb[j] += ak[j];                               // +a_k
            }
            for (std::size_t j = 0; j < bk.size(); ++j) {
                na[j] += bk[j];                                        // +b_k
                nb[j + 1] += static_cast<double>(j + 1) * bk[j];       // -b_k' + u b_k
            }
            while (!na.empty() && na.back() == 0.0) na.pop_back();
            while (!nb.empty() && nb.back() == 0.0) nb.pop_back();
            a[k + 1] = std::move(na);
            b[k + 1] = std::move(nb);
        }
    }
};

inline const MomentCoeffTables& moment_tables() {
    static const MomentCoeffTables t;
    return t;
}

inline double poly_eval(const std::vector<double>& c, double u) {
    double r = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) r = r * u + c[i];
    return r;
}

// Scaled moment e^eps * m_k(eps), i.e. the k-th moment of the shifted weight
// e^(-eps(x-1)) (x^2-1)^(-1/2). This is the overflow-safe form the Pfaffian
// route works with.
inline double weighted_moment_scaled(int order, double eps) {
    if (!(eps > 0.0))
        throw std::domain_error("weighted_moment: requires eps > 0");
    if (order < 0 || order > kMomentOrderCap)
        throw unsupported_order_error(
            "weighted_moment: order exceeds supported cap 16");
    const auto& t = moment_tables();
    const double u = 1.0 / eps;
    double k0s, k1s;
    bessel_k01_scaled(eps, k0s, k1s);
    return poly_eval(t.a[order], u) * k0s + poly_eval(t.b[order], u) * k1s;
}

}  // namespace detail

/// k-th moment of the weight e^(-eps*x)(x^2-1)^(-1/2) on [1,inf).
inline WeightedMoment weighted_moment(int order, double eps) {
    const double scaled = detail::weighted_moment_scaled(order, eps);
    return WeightedMoment{order, eps, scaled * std::exp(-eps)};
}

/// G_n = pi^{n(n+1)/4} / prod_{j=1..n} Gamma(j/2); G_1 = 1, G_2 = pi.
inline double g_n_constant(int n) {
    if (n < 1) throw std::domain_error("g_n_constant: requires n >= 1");
    double lg = 0.25 * n * (n + 1) * std::log(3.14159265358979323846);
    for (int j = 1; j <= n; ++j) lg -= log_gamma(0.5 * j);
    return std::exp(lg);
}

}  // namespace charpoly
