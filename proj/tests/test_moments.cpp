// Monte Carlo moment estimators against brute-force expectation integrals,
// exact degenerate cases, the closed Mehta integral, the theory prediction,
// and the saddle-point formula.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "charpoly/moments.hpp"

#include "oracles.hpp"

using namespace charpoly;
using Catch::Approx;
using cdouble = std::complex<double>;

namespace {
constexpr double kPi = std::numbers::pi;

// E[f(a,b,c)] for a 2x2 GOE draw H = [[a,b],[b,c]] by composite Simpson on
// [-5 sigma, 5 sigma]^3. Entry variances: diag J^2/N, off-diag J^2/(2N).
template <typename F>
cdouble goe2_expectation(F f, double J) {
    const double va = J * J / 2.0, vb = J * J / 4.0;
    const int m = 80;  // intervals per axis (even)
    auto nodes = [m](double sd, std::vector<double>& x, std::vector<double>& w,
                     double var) {
        const double T = 5.0 * sd, h = 2.0 * T / m;
        x.resize(m + 1);
        w.resize(m + 1);
        const double norm = 1.0 / std::sqrt(2.0 * kPi * var);
        for (int i = 0; i <= m; ++i) {
            x[i] = -T + i * h;
            const double simp = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            w[i] = simp * h / 3.0 * norm * std::exp(-x[i] * x[i] / (2.0 * var));
        }
    };
    std::vector<double> xa, wa, xb, wb;
    nodes(std::sqrt(va), xa, wa, va);
    nodes(std::sqrt(vb), xb, wb, vb);
    cdouble acc(0.0, 0.0);
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
            cdouble inner(0.0, 0.0);
            for (int k = 0; k <= m; ++k)
                inner += wb[k] * f(xa[i], xb[k], xa[j]);
            acc += wa[i] * wa[j] * inner;
        }
    return acc;
}
}  // namespace

TEST_CASE("estimate_K1 matches the brute-force 2x2 expectation") {
    const cdouble mu1(0.3, 0.7);
    // E[ exp(-1/2 log det(mu1 - H)) ] with per-factor principal logs
    const cdouble ref = goe2_expectation(
        [mu1](double a, double b, double c) {
            const double half = 0.5 * (a + c);
            const double r = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
            const cdouble l1 = std::log(mu1 - (half - r));
            const cdouble l2 = std::log(mu1 - (half + r));
            return std::exp(-0.5 * (l1 + l2));
        },
        1.0);

    GOEConfig cfg;
    cfg.dim = 2;
    cfg.seed = 2027;
    SpectralParams sp = make_spectral_params(0.3, 0.0, 0.7);
    const MomentEstimate est = estimate_K1(cfg, sp, 1, 20000);
    CHECK(est.samples == 20000);
    CHECK(est.kind == MomentKind::K1);
    CHECK(std::isfinite(est.std_error));
    CHECK(std::abs(est.mean.value() - ref) <
          4.0 * est.std_error + 1e-4 * std::abs(ref));
    // robust mean stays near the plain mean on a healthy distribution
    CHECK(std::abs(est.robust_mean.value() - est.mean.value()) <
          6.0 * est.std_error);
}

TEST_CASE("moment estimator preconditions") {
    GOEConfig cfg;
    cfg.dim = 1;
    SpectralParams sp = make_spectral_params(0.0, 0.0, 0.1);
    CHECK_THROWS_AS(estimate_K1(cfg, sp, 1, 1000), std::domain_error);
    cfg.dim = 2;
    CHECK_THROWS_AS(estimate_ratio_Kn(cfg, sp, 1, 1000), std::domain_error);
    cfg.dim = 4;
    CHECK_THROWS_AS(estimate_K2(cfg, sp, 2, 1000), std::domain_error);
    cfg.dim = 8;
    CHECK_THROWS_AS(estimate_K1(cfg, sp, 1, 99), std::invalid_argument);
    SpectralParams bad;  // default: mu1 = 0, no regularizer
    CHECK_THROWS_AS(estimate_K1(cfg, bad, 1, 1000), std::domain_error);
    cfg.dim = 0;
    CHECK_THROWS_AS(estimate_K1(cfg, sp, 1, 1000), std::domain_error);
}

TEST_CASE("far-field regularizer: K1 approaches mu1^{-nN/2}") {
    GOEConfig cfg;
    cfg.dim = 4;
    cfg.seed = 5;
    SpectralParams sp = make_spectral_params(0.0, 0.0, 100.0);
    const MomentEstimate est = estimate_K1(cfg, sp, 2, 1000);
    // mu1 = 100i, exponent -nN/2 = -4
    const cdouble dominant = std::exp(-4.0 * std::log(cdouble(0.0, 100.0)));
    const cdouble rel = est.mean.value() / dominant;
    CHECK(std::abs(rel - 1.0) < 0.01);
}

TEST_CASE("disjoint sample streams give compatible estimates") {
    GOEConfig cfg;
    cfg.dim = 20;
    cfg.seed = 7;
    SpectralParams sp = make_spectral_params(0.0, 0.0, 0.5);
    cfg.stream = 0;
    const MomentEstimate a = estimate_K1(cfg, sp, 1, 4000);
    cfg.stream = 10000;
    const MomentEstimate b = estimate_K1(cfg, sp, 1, 4000);
    const double gap = std::abs(a.mean.value() - b.mean.value());
    const double se = std::hypot(a.std_error, b.std_error);
    CHECK(gap < 3.0 * se);
}

TEST_CASE("estimate runs partition over streams") {
    GOEConfig cfg;
    cfg.dim = 10;
    cfg.seed = 99;
    SpectralParams sp = make_spectral_params(0.1, 0.0, 0.4);

    cfg.stream = 0;
    const cdouble whole = estimate_K1(cfg, sp, 1, 2000).mean.value();
    const cdouble first = estimate_K1(cfg, sp, 1, 1000).mean.value();
    cfg.stream = 1000;
    const cdouble second = estimate_K1(cfg, sp, 1, 1000).mean.value();
    const cdouble combined = 0.5 * (first + second);
    CHECK(std::abs(whole - combined) < 1e-12 * std::abs(whole));
}

TEST_CASE("standard error shrinks like 1/sqrt(samples)") {
    GOEConfig cfg;
    cfg.dim = 16;
    cfg.seed = 31;
    SpectralParams sp = make_spectral_params(0.0, 0.0, 0.5);
    const MomentEstimate small = estimate_K1(cfg, sp, 1, 5000);
    const MomentEstimate big = estimate_K1(cfg, sp, 1, 20000);
    const double shrink = small.std_error / big.std_error;
    CHECK(shrink > 1.7);
    CHECK(shrink < 2.3);
}

TEST_CASE("ratio at omega = 0 is exactly real and n = 0 degenerates to 1") {
    GOEConfig cfg;
    cfg.dim = 12;
    cfg.seed = 17;
    SpectralParams sp = make_spectral_params(0.0, 0.0, 0.2);
    const MomentEstimate r = estimate_ratio_Kn(cfg, sp, 1, 2000);
    CHECK(r.kind == MomentKind::RATIO);
    CHECK(r.mean.arg == 0.0);  // conjugate-pair cancellation is exact
    CHECK(r.mean.value().real() > 0.0);
    CHECK_FALSE(r.heavy_tail);

    const MomentEstimate r0 = estimate_ratio_Kn(cfg, sp, 0, 1000);
    CHECK(r0.mean.value() == cdouble(1.0, 0.0));
    CHECK(r0.std_error == 0.0);
}

TEST_CASE("K2 at omega = 0 averages |Z|^{-n} over the draws") {
    GOEConfig cfg;
    cfg.dim = 5;
    cfg.seed = 13;
    SpectralParams sp = make_spectral_params(0.0, 0.0, 0.3);
    const std::size_t samples = 200;
    cdouble acc(0.0, 0.0);
    for (std::size_t i = 0; i < samples; ++i) {
        GOEConfig ci = cfg;
        ci.stream = i;
        const auto eigs = spectrum(sample_goe(ci));
        acc += std::exp(-log_char_poly(eigs, sp.mu1).real());
    }
    acc /= static_cast<double>(samples);
    const MomentEstimate est = estimate_K2(cfg, sp, 1, samples);
    CHECK(est.mean.arg == 0.0);
    CHECK(std::abs(est.mean.value() - acc) < 1e-12 * std::abs(acc));
}

TEST_CASE("mehta integral: closed values and a 2D quadrature cross-check") {
    for (double t : {0.5, 1.0, 4.0}) {
        CHECK(mehta_integral(1, t) ==
              Approx(std::sqrt(2.0 * kPi / t)).epsilon(1e-13));
    }
    // n = 2, t = 1: (2 pi) Gamma(2)/Gamma(3/2) = 2 sqrt(2) sqrt(2 pi)
    CHECK(mehta_integral(2, 1.0) ==
          Approx(2.0 * std::sqrt(2.0) * std::sqrt(2.0 * kPi)).epsilon(1e-13));

    // direct integral of |x2 - x1| e^{-(x1^2+x2^2)/2} over the plane
    auto inner = [](double x1) {
        auto g = [x1](double x2) {
            return std::abs(x2 - x1) *
                   std::exp(-0.5 * (x1 * x1 + x2 * x2));
        };
        return oracle::simpson(g, -8.0, 8.0, 1e-10);
    };
    const double direct = oracle::simpson(inner, -8.0, 8.0, 1e-8);
    CHECK(mehta_integral(2, 1.0) == Approx(direct).epsilon(1e-6));

    // t-scaling: value scales as t^{-n(n+1)/4}
    CHECK(mehta_integral(3, 2.0) ==
          Approx(mehta_integral(3, 1.0) * std::pow(2.0, -3.0)).epsilon(1e-13));

    CHECK_THROWS_AS(mehta_integral(0, 1.0), std::domain_error);
    CHECK_THROWS_AS(mehta_integral(2, 0.0), std::domain_error);
}

TEST_CASE("predicted ratio carries the n = 1 prefactor C = rho J sqrt(pi N)") {
    GOEConfig cfg;
    cfg.dim = 100;
    cfg.coupling = 1.0;
    const double rho = mean_density(0.0, 1.0);
    const double delta = 1.0 / (cfg.dim * kPi * rho);  // makes eps = 1
    SpectralParams sp = make_spectral_params(0.0, 0.0, delta);

    const cdouble pred = predicted_ratio(cfg, sp, 1);
    const double C = rho * std::sqrt(kPi * cfg.dim);
    CHECK(C == Approx(7.97885).margin(1e-4));  // sqrt(200/pi)
    CHECK(pred.imag() == 0.0);
    CHECK(pred.real() ==
          Approx(C * bessel_k_scaled(0, 1.0)).epsilon(2e-4));

    SpectralParams off = make_spectral_params(0.0, 0.01, delta);
    CHECK_THROWS_AS(predicted_ratio(cfg, off, 1), std::domain_error);
    CHECK_THROWS_AS(predicted_ratio(cfg, sp, 0), std::domain_error);
}

TEST_CASE("mc ratio sits near the predicted value at moderate size") {
    GOEConfig cfg;
    cfg.dim = 50;
    cfg.seed = 2026;
    const double rho = mean_density(0.0, 1.0);
    const double eps = std::sqrt(2.0);
    SpectralParams sp = make_spectral_params(0.0, 0.0, eps / (cfg.dim * kPi * rho));
    const MomentEstimate mc = estimate_ratio_Kn(cfg, sp, 1, 3000);
    const double pred = predicted_ratio(cfg, sp, 1).real();
    // finite-N bias at N = 50 is a few percent; 5 sigma plus 10% headroom
    const double slack = 5.0 * mc.std_error + 0.10 * pred;
    CHECK(std::abs(mc.mean.value().real() - pred) < slack);
}

TEST_CASE("saddle-point prediction: width parameter and magnitude") {
    GOEConfig cfg;
    cfg.dim = 100;
    cfg.coupling = 1.0;
    SpectralParams sp = make_spectral_params(0.0, 0.0, 0.01);
    const SaddlePrediction s = saddle_point_K1(cfg, sp, 1);
    CHECK(s.n_order == 1);
    CHECK(s.gaussian_width_t == Approx(200.0).epsilon(1e-12));  // 2 N J^2
    CHECK(std::log(std::abs(s.value)) == Approx(41.2734).margin(0.02));

    GOEConfig tiny;
    tiny.dim = 1;
    CHECK_THROWS_AS(saddle_point_K1(tiny, sp, 1), std::domain_error);
    CHECK_THROWS_AS(saddle_point_K1(cfg, sp, 0), std::domain_error);
}
