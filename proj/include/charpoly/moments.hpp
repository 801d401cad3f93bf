#pragma once

// Monte Carlo estimation of the negative moments of the characteristic
// polynomial, the universal moment ratio, and the large-N saddle-point
// prediction used as an independent cross-check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "charpoly/errors.hpp"
#include "charpoly/fn_eval.hpp"
#include "charpoly/log_complex.hpp"
#include "charpoly/rmt.hpp"
#include "charpoly/special.hpp"

namespace charpoly {

enum class MomentKind { K1, K2, RATIO };

struct MomentEstimate {
    LogComplex mean;
    double std_error = 0.0;  // absolute, along the direction of the mean
    LogComplex robust_mean;  // componentwise median of block means
    std::size_t samples = 0;
    int n_order = 0;
    MomentKind kind = MomentKind::K1;
    bool heavy_tail = false;
};

struct SaddlePrediction {
    std::complex<double> value{0.0, 0.0};
    double gaussian_width_t = 0.0;  // Re of the Gaussian width parameter
    int n_order = 0;
};

namespace detail {

inline constexpr int kBlocks = 20;

struct BlockStats {
    std::vector<LogComplexSum> blocks{static_cast<std::size_t>(kBlocks)};

    void add(int block, const LogComplex& term) { blocks[block].add(term); }

    LogComplex grand_mean() const {
        double ref = -std::numeric_limits<double>::infinity();
        for (const auto& b : blocks) ref = std::max(ref, b.total().log_abs);
        std::complex<double> s{0.0, 0.0};
        std::size_t n = 0;
        for (const auto& b : blocks) {
            s += b.total().value_scaled(ref);
            n += b.count();
        }
        if (n == 0 || s == std::complex<double>(0.0, 0.0)) return LogComplex{};
        return LogComplex{ref + std::log(std::abs(s)) -
                              std::log(static_cast<double>(n)),
                          std::arg(s)};
    }

    // block means as plain complex numbers scaled by e^{-ref}
    std::vector<std::complex<double>> scaled_block_means(double ref) const {
        std::vector<std::complex<double>> v;
        v.reserve(blocks.size());
        for (const auto& b : blocks) v.push_back(b.mean().value_scaled(ref));
        return v;
    }
};

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return (m % 2 == 1) ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

inline LogComplex robust_from_blocks(
    const std::vector<std::complex<double>>& x, double ref) {
    std::vector<double> re, im;
    re.reserve(x.size());
    im.reserve(x.size());
    for (const auto& z : x) {
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    const std::complex<double> med(median_of(re), median_of(im));
    if (med == std::complex<double>(0.0, 0.0)) return LogComplex{};
    return LogComplex{ref + std::log(std::abs(med)), std::arg(med)};
}

// standard error of the block means projected on the mean direction
inline double radial_stderr(const std::vector<std::complex<double>>& x) {
    const std::size_t B = x.size();
    std::complex<double> xbar{0.0, 0.0};
    for (const auto& z : x) xbar += z;
    xbar /= static_cast<double>(B);
    const double nb = std::abs(xbar);
    const std::complex<double> dir =
        (nb > 0.0) ? xbar / nb : std::complex<double>(1.0, 0.0);
    double ss = 0.0;
    for (const auto& z : x) {
        const double r = ((z - xbar) * std::conj(dir)).real();
        ss += r * r;
    }
    return std::sqrt(ss / (static_cast<double>(B) * (B - 1)));
}

inline void check_mc_args(const GOEConfig& cfg, const SpectralParams& sp,
                          int n, std::size_t samples, int min_dim_excess) {
    cfg.validate();
    if (n < 0) throw std::domain_error("moment order n must be >= 0");
    if (cfg.dim < min_dim_excess * n + 1)
        throw std::domain_error(
            "matrix dimension too small for the requested moment order");
    if (!(sp.mu1.imag() > 0.0))
        throw std::domain_error("regularizer delta must be > 0");
    if (samples < 100)
        throw std::invalid_argument("need at least 100 samples");
}

}  // namespace detail

/// <Z(mu1)^{-n/2}> over `samples` independent draws; stream i of the config's
/// base stream produces draw i, so estimates are reproducible and
/// parallel-partitionable by construction.
inline MomentEstimate estimate_K1(const GOEConfig& cfg, const SpectralParams& sp,
                                  int n, std::size_t samples) {
    detail::check_mc_args(cfg, sp, n, samples, 1);
    detail::BlockStats stats;
    const double half_n = 0.5 * n;
    for (std::size_t i = 0; i < samples; ++i) {
        GOEConfig ci = cfg;
        ci.stream = cfg.stream + i;
        const auto eigs = spectrum(sample_goe(ci));
        const auto w = log_char_poly(eigs, sp.mu1);
        const int block = static_cast<int>(i * detail::kBlocks / samples);
        stats.add(block, LogComplex{-half_n * w.real(), -half_n * w.imag()});
    }
    MomentEstimate out;
    out.mean = stats.grand_mean();
    const auto xs = stats.scaled_block_means(out.mean.log_abs);
    out.std_error = detail::radial_stderr(xs) * std::exp(out.mean.log_abs);
    out.robust_mean = detail::robust_from_blocks(xs, out.mean.log_abs);
    out.samples = samples;
    out.n_order = n;
    out.kind = MomentKind::K1;
    return out;
}

/// <[Z(mu1) Z(mu2*)]^{-n/2}>; at omega = 0 the per-draw integrand reduces to
/// exp(-n Re log Z(mu1)) exactly (real H forces Z(mu*) = Z(mu)*).
inline MomentEstimate estimate_K2(const GOEConfig& cfg, const SpectralParams& sp,
                                  int n, std::size_t samples) {
    detail::check_mc_args(cfg, sp, n, samples, 2);
    detail::BlockStats stats;
    const double half_n = 0.5 * n;
    for (std::size_t i = 0; i < samples; ++i) {
        GOEConfig ci = cfg;
        ci.stream = cfg.stream + i;
        const auto eigs = spectrum(sample_goe(ci));
        const auto w1 = log_char_poly(eigs, sp.mu1);
        LogComplex term;
        if (sp.offset == 0.0) {
            term = LogComplex{-static_cast<double>(n) * w1.real(), 0.0};
        } else {
            const auto w2 = log_char_poly(eigs, sp.mu2_star);
            term = LogComplex{-half_n * (w1.real() + w2.real()),
                              -half_n * (w1.imag() + w2.imag())};
        }
        const int block = static_cast<int>(i * detail::kBlocks / samples);
        stats.add(block, term);
    }
    MomentEstimate out;
    out.mean = stats.grand_mean();
    const auto xs = stats.scaled_block_means(out.mean.log_abs);
    out.std_error = detail::radial_stderr(xs) * std::exp(out.mean.log_abs);
    out.robust_mean = detail::robust_from_blocks(xs, out.mean.log_abs);
    out.samples = samples;
    out.n_order = n;
    out.kind = MomentKind::K2;
    return out;
}

/// Universal ratio K_n = K2 / (K1(mu1) K1(mu2*)). All three averages come
/// from shared draws; the standard error is first-order (delta method) over
/// the shared block means. n = 0 returns the exact degenerate ratio 1.
inline MomentEstimate estimate_ratio_Kn(const GOEConfig& cfg,
                                        const SpectralParams& sp, int n,
                                        std::size_t samples) {
    detail::check_mc_args(cfg, sp, n, samples, 2);
    if (n == 0) {
        MomentEstimate out;
        out.mean = LogComplex{0.0, 0.0};
        out.robust_mean = out.mean;
        out.samples = samples;
        out.n_order = 0;
        out.kind = MomentKind::RATIO;
        return out;
    }

    detail::BlockStats sa, sb, sc;
    const double half_n = 0.5 * n;
    const bool conj_pair = (sp.offset == 0.0);
    for (std::size_t i = 0; i < samples; ++i) {
        GOEConfig ci = cfg;
        ci.stream = cfg.stream + i;
        const auto eigs = spectrum(sample_goe(ci));
        const auto w1 = log_char_poly(eigs, sp.mu1);
        LogComplex ta{-half_n * w1.real(), -half_n * w1.imag()};
        LogComplex tb, tc;
        if (conj_pair) {
            tb = LogComplex{ta.log_abs, -ta.arg};
            tc = LogComplex{-static_cast<double>(n) * w1.real(), 0.0};
        } else {
            const auto w2 = log_char_poly(eigs, sp.mu2_star);
            tb = LogComplex{-half_n * w2.real(), -half_n * w2.imag()};
            tc = ta * tb;
        }
        const int block = static_cast<int>(i * detail::kBlocks / samples);
        sa.add(block, ta);
        sb.add(block, tb);
        sc.add(block, tc);
    }

    const LogComplex ma = sa.grand_mean();
    const LogComplex mb = sb.grand_mean();
    const LogComplex mc = sc.grand_mean();
    const LogComplex ratio = mc / (ma * mb);

    const auto xa = sa.scaled_block_means(ma.log_abs);
    const auto xb = sb.scaled_block_means(mb.log_abs);
    const auto xc = sc.scaled_block_means(mc.log_abs);
    const std::complex<double> va = ma.value_scaled(ma.log_abs);
    const std::complex<double> vb = mb.value_scaled(mb.log_abs);
    const std::complex<double> vc = mc.value_scaled(mc.log_abs);

    // linearized relative deviation of the ratio per block
    std::vector<std::complex<double>> t(xa.size());
    std::vector<std::complex<double>> ratio_blocks(xa.size());
    for (std::size_t j = 0; j < xa.size(); ++j) {
        t[j] = (xc[j] - vc) / vc - (xa[j] - va) / va - (xb[j] - vb) / vb;
        ratio_blocks[j] = xc[j] / (xa[j] * xb[j]) * (va * vb / vc);
    }
    double ss = 0.0;
    for (const auto& z : t) ss += z.real() * z.real();
    const double rel_err =
        std::sqrt(ss / (static_cast<double>(t.size()) * (t.size() - 1)));

    // heavy-tail warning on the numerator blocks
    std::complex<double> cbar{0.0, 0.0};
    for (const auto& z : xc) cbar += z;
    cbar /= static_cast<double>(xc.size());
    double sdc = 0.0, maxdev = 0.0;
    for (const auto& z : xc) {
        const double d2 = std::norm(z - cbar);
        sdc += d2;
        maxdev = std::max(maxdev, std::sqrt(d2));
    }
    sdc = std::sqrt(sdc / (xc.size() - 1));
    const double stderr_c = sdc / std::sqrt(static_cast<double>(xc.size()));

    MomentEstimate out;
    out.mean = ratio;
    out.std_error = rel_err * std::exp(ratio.log_abs);
    out.robust_mean = detail::robust_from_blocks(ratio_blocks, 0.0);
    out.robust_mean.log_abs += ratio.log_abs;
    out.robust_mean.arg += ratio.arg;
    out.samples = samples;
    out.n_order = n;
    out.kind = MomentKind::RATIO;
    out.heavy_tail = stderr_c > 0.0 && maxdev > 10.0 * stderr_c;
    return out;
}

/// Theory value of the ratio: C * F_n(eps) with
/// C = (pi rho J)^{n^2} (N/2)^{n^2/2} (2pi)^{n/2} / (n! [prod Gamma(j/2)]^2).
/// Requires omega = 0 (real eps); F_n comes from the Pfaffian route.
inline std::complex<double> predicted_ratio(const GOEConfig& cfg,
                                            const SpectralParams& sp, int n) {
    cfg.validate();
    if (n < 1) throw std::domain_error("predicted_ratio: n must be >= 1");
    if (sp.offset != 0.0)
        throw std::domain_error(
            "predicted_ratio: only omega = 0 (real eps) is supported");
    const double rho = mean_density(sp.center, cfg.coupling);
    const double eps = epsilon_from_params(cfg, sp).real();

    const double pi = 3.14159265358979323846;
    double lc = static_cast<double>(n) * n * std::log(pi * rho * cfg.coupling) +
                0.5 * n * n * std::log(0.5 * cfg.dim) +
                0.5 * n * std::log(2.0 * pi) - log_gamma(n + 1.0);
    for (int j = 1; j <= n; ++j) lc -= 2.0 * log_gamma(0.5 * j);

    const FnEvaluation fn = fn_goe_pfaffian(n, eps);
    return std::exp(lc) * fn.value;
}

/// Closed Mehta-type integral int prod dxi |Vandermonde| e^{-(t/2) sum xi^2}
/// = (2pi)^{n/2} t^{-n(n+1)/4} prod_{j=1..n} Gamma(1+j/2)/Gamma(3/2).
inline double mehta_integral(int n, double t) {
    if (n < 1) throw std::domain_error("mehta_integral: n must be >= 1");
    if (!(t > 0.0)) throw std::domain_error("mehta_integral: t must be > 0");
    double lg = 0.5 * n * std::log(2.0 * 3.14159265358979323846) -
                0.25 * n * (n + 1) * std::log(t);
    for (int j = 1; j <= n; ++j) lg += log_gamma(1.0 + 0.5 * j) - log_gamma(1.5);
    return std::exp(lg);
}

/// Large-N saddle-point prediction for K1: prefactor (G_n/n!) (-iN)^{Nn/2}
/// pi^{-n(n-1)/4} / prod Gamma((N-j)/2), the q_+ power and exponential
/// factors, and the Mehta-type Gaussian integral of width t.
inline SaddlePrediction saddle_point_K1(const GOEConfig& cfg,
                                        const SpectralParams& sp, int n) {
    cfg.validate();
    if (n < 1) throw std::domain_error("saddle_point_K1: n must be >= 1");
    if (cfg.dim < n + 1)
        throw std::domain_error("saddle_point_K1: requires N >= n+1");
    const double pi = 3.14159265358979323846;
    const double N = cfg.dim;
    const double J = cfg.coupling;
    const SpectralGeometry geom = saddle_points(sp.center, J);
    const std::complex<double> q = geom.q_plus;
    const std::complex<double> q2 = q * q;
    const std::complex<double> t = N * (1.0 + 2.0 * J * J * q2) / (2.0 * q2);

    // log prefactor; Log(-iN) = ln N - i pi/2 on the principal branch
    std::complex<double> lg(std::log(g_n_constant(n)) - log_gamma(n + 1.0), 0.0);
    lg += 0.5 * N * n * std::complex<double>(std::log(N), -0.5 * pi);
    lg -= 0.25 * n * (n - 1) * std::log(pi);
    for (int j = 0; j < n; ++j) lg -= log_gamma(0.5 * (N - j));

    lg += 0.5 * (N - n - 1) * std::log(q);
    lg -= 0.5 * N * static_cast<double>(n) *
          (J * J * q2 - 2.0 * std::complex<double>(0.0, 1.0) * sp.mu1 * q);

    // Mehta integral with complex width
    std::complex<double> lm(0.5 * n * std::log(2.0 * pi), 0.0);
    lm -= 0.25 * n * (n + 1) * std::log(t);
    for (int j = 1; j <= n; ++j) lm += log_gamma(1.0 + 0.5 * j) - log_gamma(1.5);

    SaddlePrediction out;
    out.value = std::exp(lg + lm);
    out.gaussian_width_t = t.real();
    out.n_order = n;
    return out;
}

}  // namespace charpoly
