#pragma once

// Evaluation of the central integrals over [1,inf)^n with weight
// (lambda^2-1)^(-1/2) and |Vandermonde| repulsion: direct quadrature,
// Pfaffian reduction, the GUE counterpart, the truncated small-eps form,
// the derivative identity, and the cluster integrals I_p.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "charpoly/errors.hpp"
#include "charpoly/pfaffian.hpp"
#include "charpoly/quadrature.hpp"
#include "charpoly/rng.hpp"
#include "charpoly/special.hpp"

namespace charpoly {

enum class FnMethod { QUADRATURE, PFAFFIAN, CLOSED_FORM, MONTE_CARLO };

inline const char* to_string(FnMethod m) {
    switch (m) {
        case FnMethod::QUADRATURE: return "quadrature";
        case FnMethod::PFAFFIAN: return "pfaffian";
        case FnMethod::CLOSED_FORM: return "closed_form";
        case FnMethod::MONTE_CARLO: return "monte_carlo";
    }
    return "?";
}

struct FnEvaluation {
    int n_order = 0;
    double epsilon = 0.0;
    double value = 0.0;
    double abs_error = 0.0;
    FnMethod method = FnMethod::QUADRATURE;
};

struct ClusterResult {
    int p = 0;
    double k = 0.0;
    double cutoff_X = 0.0;
    double epsilon = 0.0;
    double i_value = 0.0;
    double m_exponent = 0.0;
};

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline void check_fn_args(const char* who, int n, double eps, int n_cap) {
    if (n < 1 || n > n_cap)
        throw unsupported_order_error(std::string(who) + ": n out of range");
    if (!(eps >= 1e-7 && eps <= 1e3))
        throw std::domain_error(std::string(who) +
                                ": eps must lie in [1e-7, 1e3]");
}

// Truncation point for the cosh-substituted weight: beyond psi_max the factor
// e^{-eps(cosh psi - 1)} is below tail_frac.
inline double psi_cutoff(double eps, double tail_frac) {
    return std::acosh(1.0 + std::log(1.0 / tail_frac) / eps);
}

// --- importance-sampled fallback for n >= 4 ------------------------------
//
// Coordinates are independent under the proposal; each coordinate uses a
// 50/50 mixture of
//   (a) density prop. to sinh(psi) e^{-eps(cosh psi - 1)} on [0, psi_max],
//       sampled by inverse CDF in cosh psi, and
//   (b) the uniform density on [0, psi_a], psi_a = min(1, psi_max).
// Component (a) alone matches the integrand's decay but its weight carries
// 1/sinh(psi) which makes the second moment diverge logarithmically at the
// origin; the uniform component bounds the weight there.
struct MixtureProposal {
    double eps, psi_max, psi_a, za;

    MixtureProposal(double eps_, double psi_max_)
        : eps(eps_), psi_max(psi_max_), psi_a(std::min(1.0, psi_max_)),
          za(-std::expm1(-eps_ * (std::cosh(psi_max_) - 1.0))) {}

    double sample(double u_sel, double u, double& density) const {
        double psi;
        if (u_sel < 0.5) {
            const double c = 1.0 - std::log1p(-u * za) / eps;
            psi = std::acosh(std::max(1.0, c));
        } else {
            psi = u * psi_a;
        }
        density = pdf(psi);
        return psi;
    }

    double pdf(double psi) const {
        const double comp_a =
            eps * std::sinh(psi) * std::exp(-eps * (std::cosh(psi) - 1.0)) / za;
        const double comp_b = (psi <= psi_a) ? 1.0 / psi_a : 0.0;
        return 0.5 * comp_a + 0.5 * comp_b;
    }
};

inline FnEvaluation fn_goe_monte_carlo(int n, double eps, double tol) {
    const double psi_max = psi_cutoff(eps, 1e-3 * tol);
    const MixtureProposal prop(eps, psi_max);
    const CounterRng rng(0xF0E1D2C3B4A59687ull + static_cast<std::uint64_t>(n),
                         0);

    std::vector<double> psi(n), ch(n);
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    constexpr std::size_t batch = 50000;
    constexpr std::size_t budget = 4000000;

    while (count < budget) {
        for (std::size_t s = 0; s < batch; ++s, ++count) {
            const CounterRng draw(rng.seed(), count + 1);
            double logq = 0.0;
            for (int c = 0; c < n; ++c) {
                const auto u = draw.uniform2(static_cast<std::uint64_t>(c));
                double q;
                psi[c] = prop.sample(u[0], u[1], q);
                ch[c] = std::cosh(psi[c]);
                logq += std::log(q);
            }
            double vdm = 1.0, expo = 0.0;
            for (int i = 0; i < n; ++i) {
                expo += ch[i] - 1.0;
                for (int j = i + 1; j < n; ++j) vdm *= std::abs(ch[j] - ch[i]);
            }
            const double w = vdm * std::exp(-eps * expo - logq);
            sum += w;
            sum2 += w * w;
        }
        const double mean = sum / static_cast<double>(count);
        const double var =
            std::max(0.0, sum2 / count - mean * mean) / (count - 1.0);
        const double err3 = 3.0 * std::sqrt(var);
        if (err3 <= tol * std::abs(mean)) {
            return FnEvaluation{n, eps, mean, err3, FnMethod::MONTE_CARLO};
        }
    }
    const double mean = sum / static_cast<double>(count);
    const double var = std::max(0.0, sum2 / count - mean * mean) / (count - 1.0);
    throw accuracy_failure("fn_goe_quadrature: MC budget exhausted", mean,
                           3.0 * std::sqrt(var));
}

}  // namespace detail

/// F_n(eps) by direct quadrature of the cosh-substituted integral over the
/// ordered simplex (times n!); importance-sampled MC for n >= 4. tol is a
/// relative target; abs_error reports an absolute bound.
inline FnEvaluation fn_goe_quadrature(int n, double eps, double tol) {
    detail::check_fn_args("fn_goe_quadrature", n, eps, 8);
    if (!(tol >= 1e-10))
        throw std::domain_error("fn_goe_quadrature: tol must be >= 1e-10");

    if (n >= 4) return detail::fn_goe_monte_carlo(n, eps, tol);

    const double psi_max = detail::psi_cutoff(eps, 1e-3 * tol);
    auto f = [n, eps](const std::vector<double>& psi) {
        double c[3];
        double expo = 0.0;
        for (int i = 0; i < n; ++i) {
            c[i] = std::cosh(psi[i]);
            expo += c[i] - 1.0;
        }
        double vdm = 1.0;  // psi ordered ascending, so all factors >= 0
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) vdm *= c[j] - c[i];
        return vdm * std::exp(-eps * expo);
    };
    const std::size_t budget = (n == 1 ? 4000 : n == 2 ? 1200 : 320);
    QuadResult r = integrate_simplex(f, n, 0.0, psi_max, tol, budget);
    const double nf = detail::factorial(n);
    FnEvaluation out{n, eps, r.value * nf, r.error * nf, FnMethod::QUADRATURE};
    if (!r.converged)
        throw accuracy_failure("fn_goe_quadrature: tolerance not reached",
                               out.value, out.abs_error);
    return out;
}

namespace detail {

// Scaled skew entries for the Pfaffian reduction:
//   A~_{ij} = int dy cosh^{j-1} e^{-eps(cosh-1)} [2 M~_{i-1}(y) - m~_{i-1}]
// in cosh-substituted coordinates, with M~ the partial scaled moment.
inline QuadResult pfaffian_entry(int i, int j, double eps, double phi_max,
                                 double m_scaled_i) {
    auto inner = [i, eps](double phi) {
        auto g = [i, eps](double psi) {
            return std::pow(std::cosh(psi), i - 1) *
                   std::exp(-eps * (std::cosh(psi) - 1.0));
        };
        QuadResult r = integrate_adaptive(g, 0.0, phi, 5e-13, 1e-300, 1200);
        return r.value;
    };
    auto outer = [&](double phi) {
        return std::pow(std::cosh(phi), j - 1) *
               std::exp(-eps * (std::cosh(phi) - 1.0)) *
               (2.0 * inner(phi) - m_scaled_i);
    };
    return integrate_adaptive(outer, 0.0, phi_max, 1e-11, 1e-300, 3000);
}

}  // namespace detail

/// F_n(eps) via the de Bruijn reduction: n! times the Pfaffian of the skew
/// matrix of pairwise ordered double integrals (bordered by the plain
/// moments when n is odd). Entries use the eps-scaled weight, which cancels
/// the e^{n eps} prefactor exactly.
inline FnEvaluation fn_goe_pfaffian(int n, double eps) {
    detail::check_fn_args("fn_goe_pfaffian", n, eps, 8);

    const double phi_max = detail::psi_cutoff(eps, 1e-20);
    const int dim = (n % 2 == 0) ? n : n + 1;
    std::vector<double> a(static_cast<std::size_t>(dim) * dim, 0.0);
    std::vector<double> entry_err(static_cast<std::size_t>(dim) * dim, 0.0);

    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            const double mi = detail::weighted_moment_scaled(i - 1, eps);
            QuadResult r = detail::pfaffian_entry(i, j, eps, phi_max, mi);
            a[static_cast<std::size_t>(i - 1) * dim + (j - 1)] = r.value;
            a[static_cast<std::size_t>(j - 1) * dim + (i - 1)] = -r.value;
            entry_err[static_cast<std::size_t>(i - 1) * dim + (j - 1)] = r.error;
        }
    }
    if (n % 2 == 1) {
        for (int i = 1; i <= n; ++i) {
            const double b = detail::weighted_moment_scaled(i - 1, eps);
            a[static_cast<std::size_t>(i - 1) * dim + n] = b;
            a[static_cast<std::size_t>(n) * dim + (i - 1)] = -b;
            entry_err[static_cast<std::size_t>(i - 1) * dim + n] = 1e-13 * b;
        }
    }

    const double pf = pfaffian(a, dim);
    // first-order error propagation: |dPf/dA_ij| = |Pf(minor_ij)|
    double err = 0.0;
    for (int r = 0; r < dim; ++r)
        for (int c = r + 1; c < dim; ++c) {
            const double de = entry_err[static_cast<std::size_t>(r) * dim + c];
            if (de > 0.0) err += de * std::abs(pfaffian_minor(a, dim, r, c));
        }

    const double nf = detail::factorial(n);
    return FnEvaluation{n, eps, nf * pf, nf * err, FnMethod::PFAFFIAN};
}

/// GUE counterpart: closed form prod j!(j+1)! / eps^{n^2}, or the simplex
/// quadrature of the squared-Vandermonde integral (n <= 5).
inline FnEvaluation fn_gue(int n, double eps, FnMethod mode) {
    if (n < 1) throw unsupported_order_error("fn_gue: n must be >= 1");
    if (!(eps > 0.0)) throw std::domain_error("fn_gue: eps must be > 0");

    if (mode == FnMethod::CLOSED_FORM) {
        double lg = -static_cast<double>(n) * n * std::log(eps);
        for (int j = 0; j < n; ++j)
            lg += log_gamma(j + 1.0) + log_gamma(j + 2.0);
        const double v = std::exp(lg);
        return FnEvaluation{n, eps, v, 4e-16 * v, FnMethod::CLOSED_FORM};
    }
    if (mode != FnMethod::QUADRATURE)
        throw std::invalid_argument("fn_gue: mode must be CLOSED_FORM or QUADRATURE");
    if (n > 5)
        throw unsupported_order_error("fn_gue: quadrature mode supports n <= 5");
    if (!(eps >= 1e-7 && eps <= 1e3))
        throw std::domain_error("fn_gue: quadrature eps must lie in [1e-7, 1e3]");

    const double tol = (n <= 3) ? 1e-8 : 1e-6;
    const double lam_max = 1.0 + std::log(1e3 / tol) / eps;
    auto f = [n, eps](const std::vector<double>& lam) {
        double expo = 0.0, vdm = 1.0;
        for (int i = 0; i < n; ++i) {
            expo += lam[i] - 1.0;
            for (int j = i + 1; j < n; ++j) {
                const double d = lam[j] - lam[i];
                vdm *= d * d;
            }
        }
        return vdm * std::exp(-eps * expo);
    };
    const std::size_t budget = (n == 1 ? 4000 : n == 2 ? 1200 : n == 3 ? 320 : 120);
    QuadResult r = integrate_simplex(f, n, 1.0, lam_max, tol, budget);
    const double nf = detail::factorial(n);
    FnEvaluation out{n, eps, r.value * nf, r.error * nf, FnMethod::QUADRATURE};
    if (!r.converged)
        throw accuracy_failure("fn_gue: tolerance not reached", out.value,
                               out.abs_error);
    return out;
}

/// Truncated small-eps form: eps^{-n(n-1)/2} int_{[eps,inf)^n} prod dy/y
/// |Vandermonde| e^{-sum y}. Computed in logarithmic coordinates y = eps e^u,
/// where the eps prefactor cancels exactly against the Vandermonde scaling.
inline FnEvaluation fn_goe_truncated(int n, double eps, double tol = 0.0) {
    if (n < 1 || n > 4)
        throw unsupported_order_error("fn_goe_truncated: n must be in [1,4]");
    if (eps <= 0.0)
        throw divergence_error(
            "fn_goe_truncated: lower limit 0 diverges logarithmically");
    if (eps > 0.1)
        throw std::domain_error("fn_goe_truncated: eps must be <= 0.1");
    if (tol <= 0.0) tol = (n <= 2) ? 1e-9 : (n == 3 ? 1e-7 : 1e-4);

    const double y_max = 46.0;  // e^{-46} ~ 1e-20 tail
    const double u_max = std::log(y_max / eps);
    auto f = [n, eps](const std::vector<double>& u) {
        double y[4];
        double expo = 0.0, vdm = 1.0;
        for (int i = 0; i < n; ++i) {
            y[i] = std::exp(u[i]);  // y/eps, ascending with u
            expo += y[i];
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) vdm *= y[j] - y[i];
        return vdm * std::exp(-eps * expo);
    };
    const std::size_t budget = (n == 1 ? 4000 : n == 2 ? 1000 : n == 3 ? 300 : 90);
    QuadResult r = integrate_simplex(f, n, 0.0, u_max, tol, budget);
    const double nf = detail::factorial(n);
    FnEvaluation out{n, eps, r.value * nf, r.error * nf, FnMethod::QUADRATURE};
    if (!r.converged)
        throw accuracy_failure("fn_goe_truncated: tolerance not reached",
                               out.value, out.abs_error);
    return out;
}

struct FtildeDerivative {
    double value = 0.0;              // d/d eps of eps^{n(n-1)/2} F_n(eps)
    double limit_coefficient = 0.0;  // limit of eps * value as eps -> 0
    double abs_error = 0.0;
};

/// Derivative identity for F~_n(eps) = eps^{n(n-1)/2} F_n(eps):
///   dF~/deps = -(n/eps) e^{-eps} int_{[eps,inf)^{n-1}} prod (dy/y) e^{-y}
///              (y-eps) |Vandermonde|
/// evaluated in logarithmic coordinates. Also reports the exact eps -> 0
/// limit coefficient of eps * dF~/deps.
inline FtildeDerivative ftilde_derivative(int n, double eps) {
    if (n < 1 || n > 4)
        throw unsupported_order_error("ftilde_derivative: n must be in [1,4]");
    if (!(eps > 0.0) || eps > 0.1)
        throw std::domain_error("ftilde_derivative: eps must lie in (0, 0.1]");

    double lg = 0.0;
    for (int j = 0; j <= n - 2; ++j)
        lg += log_gamma(0.5 * (3 + j)) + log_gamma(0.5 * (2 + j)) -
              log_gamma(1.5);
    FtildeDerivative out;
    out.limit_coefficient = -n * std::exp(lg);

    if (n == 1) {
        out.value = -std::exp(-eps) / eps;
        out.abs_error = 1e-16 / eps;
        return out;
    }

    const int dim = n - 1;
    const double y_max = 46.0;
    const double u_max = std::log(y_max / eps);
    auto f = [dim, eps](const std::vector<double>& u) {
        double y[3];
        double expo = 0.0, w = 1.0;
        for (int i = 0; i < dim; ++i) {
            y[i] = std::exp(u[i]);  // y/eps
            expo += y[i];
            w *= y[i] - 1.0;        // (y - eps)/eps
        }
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) w *= y[j] - y[i];
        return w * std::exp(-eps * expo);
    };
    const double tol = (dim == 1) ? 1e-9 : (dim == 2 ? 1e-7 : 1e-4);
    const std::size_t budget = (dim == 1 ? 2000 : dim == 2 ? 320 : 90);
    QuadResult r = integrate_simplex(f, dim, 0.0, u_max, tol, budget);
    if (!r.converged)
        throw accuracy_failure("ftilde_derivative: tolerance not reached",
                               r.value, r.error);
    // restore eps powers: (n-1) factors of (y-eps) and the Vandermonde give
    // eps^{(n-1) + (n-1)(n-2)/2}; the du measure is free of eps.
    const double pow_eps =
        std::pow(eps, (n - 1) + 0.5 * (n - 1) * (n - 2));
    const double integral = detail::factorial(dim) * r.value * pow_eps;
    out.value = -(n / eps) * std::exp(-eps) * integral;
    out.abs_error = (n / eps) * std::exp(-eps) * detail::factorial(dim) *
                    r.error * pow_eps;
    return out;
}

namespace detail {

// Stratified Monte Carlo for the p = 3, 4 cluster integrals, in coordinates
// s = asinh(u): the factor (u^2+1)^{-k/2} du becomes cosh^{1-k}(s) ds, which
// is bounded on the whole box when k >= p - 1.
inline double cluster_mc(int p, double k, double S, std::uint64_t seed) {
    const int strata = (p == 3) ? 12 : 8;
    const int per_cell = 16;
    const double cell_w = 2.0 * S / strata;

    long cells = 1;
    for (int i = 0; i < p; ++i) cells *= strata;

    double total = 0.0;
    std::vector<double> s(p), u(p);
    for (long cell = 0; cell < cells; ++cell) {
        long c = cell;
        int base[4];
        for (int i = 0; i < p; ++i) {
            base[i] = static_cast<int>(c % strata);
            c /= strata;
        }
        const CounterRng rng(seed, static_cast<std::uint64_t>(cell));
        double cell_sum = 0.0;
        for (int t = 0; t < per_cell; ++t) {
            for (int i = 0; i < p; ++i) {
                const auto uu =
                    rng.uniform2(static_cast<std::uint64_t>(t) * p + i);
                s[i] = -S + (base[i] + uu[0]) * cell_w;
                u[i] = std::sinh(s[i]);
            }
            double w = 1.0;
            for (int i = 0; i < p; ++i) {
                w *= std::pow(std::cosh(s[i]), 1.0 - k);
                for (int j = i + 1; j < p; ++j) w *= std::abs(u[j] - u[i]);
            }
            cell_sum += w;
        }
        total += cell_sum / per_cell;
    }
    const double cell_vol = std::pow(cell_w, p);
    return total * cell_vol;
}

}  // namespace detail

/// Cluster integral I_p = int_{[-X/eps, X/eps]^p} prod du |Vandermonde| /
/// prod (u^2+1)^{k/2}; deterministic quadrature for p <= 2 (tangent
/// substitution), stratified MC for p in {3,4}. m_exponent carries the
/// predicted eps power p(p+1)/2 - p k.
inline ClusterResult cluster_integral(int p, double k, double X, double eps) {
    if (p < 1 || p > 4)
        throw unsupported_order_error("cluster_integral: p must be in [1,4]");
    if (!(k > 0.0)) throw std::domain_error("cluster_integral: k must be > 0");
    if (!(X > 0.0)) throw std::domain_error("cluster_integral: X must be > 0");
    if (!(eps > 0.0) || !(eps < X))
        throw std::domain_error("cluster_integral: need 0 < eps < X");

    ClusterResult out;
    out.p = p;
    out.k = k;
    out.cutoff_X = X;
    out.epsilon = eps;
    out.m_exponent = 0.5 * p * (p + 1) - p * k;

    const double L = X / eps;
    if (p <= 2) {
        const double T = std::atan(L);
        if (p == 1) {
            auto f = [k](double th) { return std::pow(std::cos(th), k - 2.0); };
            QuadResult r = integrate_adaptive(f, 0.0, T, 1e-10, 1e-300, 4000);
            if (!r.converged)
                throw accuracy_failure("cluster_integral: tolerance not reached",
                                       2.0 * r.value, 2.0 * r.error);
            out.i_value = 2.0 * r.value;
        } else {
            // u = tan(theta): |u1-u2| prod cos^{k-2} -> sin(th2-th1)
            // cos^{k-3}(th1) cos^{k-3}(th2) on the ordered wedge, times 2!.
            auto f = [k](const std::vector<double>& th) {
                return std::sin(th[1] - th[0]) *
                       std::pow(std::cos(th[0]), k - 3.0) *
                       std::pow(std::cos(th[1]), k - 3.0);
            };
            QuadResult r = integrate_simplex(f, 2, -T, T, 1e-7, 700);
            if (!r.converged)
                throw accuracy_failure("cluster_integral: tolerance not reached",
                                       2.0 * r.value, 2.0 * r.error);
            out.i_value = 2.0 * r.value;
        }
    } else {
        const double S = std::asinh(L);
        out.i_value = detail::cluster_mc(
            p, k, S, 0xC1B2A39485760FEDull + static_cast<std::uint64_t>(p));
    }
    return out;
}

}  // namespace charpoly
