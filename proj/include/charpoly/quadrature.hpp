#pragma once

// One-dimensional adaptive Gauss-Kronrod quadrature and a nested
// ordered-simplex driver used by the multi-dimensional integrals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

#include "charpoly/errors.hpp"

namespace charpoly {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;       // absolute error estimate
    std::size_t evals = 0;
    bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
// Nodes are the nonnegative abscissae; even indices are Kronrod-only points,
// odd indices carry the embedded Gauss rule.
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGK15WeightsK[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGK15WeightsG[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// Single Kronrod panel on [a,b]. Returns the Kronrod value and the
// QUADPACK-style error estimate (resasc-scaled difference to the Gauss rule).
template <class F>
inline Panel gk15_panel(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    double fv[15];
    const double fc = f(c);
    fv[7] = fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kGK15Nodes[i];
        fv[i] = f(c - dx);
        fv[14 - i] = f(c + dx);
    }

    double res_k = kGK15WeightsK[7] * fc;
    double res_g = kGK15WeightsG[3] * fc;
    double res_abs = kGK15WeightsK[7] * std::abs(fc);
    for (int i = 0; i < 7; ++i) {
        const double sum = fv[i] + fv[14 - i];
        res_k += kGK15WeightsK[i] * sum;
        res_abs += kGK15WeightsK[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
        if (i % 2 == 1) res_g += kGK15WeightsG[i / 2] * sum;
    }

    const double mean = 0.5 * res_k;
    double res_asc = kGK15WeightsK[7] * std::abs(fc - mean);
    for (int i = 0; i < 7; ++i)
        res_asc += kGK15WeightsK[i] *
                   (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));

    res_k *= h;
    res_g *= h;
    res_abs *= h;
    res_asc *= h;

    double err = std::abs(res_k - res_g);
    if (res_asc != 0.0 && err != 0.0)
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    const double min_err =
        50.0 * std::numeric_limits<double>::epsilon() * res_abs;
    err = std::max(err, min_err);

    return Panel{a, b, res_k, err};
}

}  // namespace detail

/// Adaptive 1-d integral of f over [a,b]. Bisects the worst panel until the
/// summed error estimate drops below max(abs_tol, rel_tol*|integral|) or the
/// panel budget runs out. Never throws; inspect .converged on the result.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol,
                              double abs_tol, std::size_t max_panels = 2000) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }

    std::priority_queue<detail::Panel> heap;
    detail::Panel p0 = detail::gk15_panel(f, a, b);
    out.evals = 15;
    double total = p0.value;
    double total_err = p0.error;
    heap.push(p0);

    std::size_t panels = 1;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) &&
           panels < max_panels) {
        detail::Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid == worst.a || mid == worst.b) {
            // interval at machine resolution; put it back and stop splitting
            heap.push(worst);
            break;
        }
        detail::Panel left = detail::gk15_panel(f, worst.a, mid);
        detail::Panel right = detail::gk15_panel(f, mid, worst.b);
        out.evals += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }

    out.value = total;
    out.error = total_err;
    out.converged =
        total_err <= std::max(abs_tol, rel_tol * std::abs(total));
    return out;
}

/// Nested adaptive integration over the ordered simplex
///   lo <= x[0] <= x[1] <= ... <= x[dim-1] <= hi.
/// The callback receives the full coordinate vector. Inner levels get the
/// absolute budget divided by the measure of the remaining outer variables,
/// so the per-level tolerances compose into the requested total.
template <class F>
class SimplexIntegrator {
  public:
    SimplexIntegrator(int dim, double lo, double hi, F f)
        : dim_(dim), lo_(lo), hi_(hi), f_(std::move(f)), point_(dim) {}

    QuadResult run(double rel_tol, double abs_tol,
                   std::size_t max_panels = 600) {
        max_panels_ = max_panels;
        evals_ = 0;
        abs_total_ = abs_tol;
        rel_level_ = std::max(0.25 * rel_tol, 1e-14);
        QuadResult r = level(dim_ - 1, hi_);
        r.evals = evals_;
        return r;
    }

  private:
    // Integrate x[k] over [lo_, upper]; deeper levels see upper as their cap.
    QuadResult level(int k, double upper) {
        // Absolute slack left after dividing by the measure the outer
        // variables can still multiply this level's result by.
        double outer_measure = 1.0;
        for (int j = k + 1; j < dim_; ++j) outer_measure *= (hi_ - lo_);
        const double abs_here =
            0.5 * abs_total_ / (outer_measure * static_cast<double>(dim_));

        auto g = [&](double x) {
            point_[k] = x;
            if (k == 0) {
                ++evals_;
                return f_(point_);
            }
            QuadResult inner = level(k - 1, x);
            return inner.value;
        };
        return integrate_adaptive(g, lo_, upper, rel_level_,
                                  std::max(abs_here, 1e-300), max_panels_);
    }

    int dim_;
    double lo_, hi_;
    F f_;
    std::vector<double> point_;
    std::size_t max_panels_ = 600;
    std::size_t evals_ = 0;
    double abs_total_ = 0.0;
    double rel_level_ = 1e-10;
};

/// Convenience wrapper: integral of f over the ordered simplex in [lo,hi]^dim
/// with a pilot pass (loose tolerance) to calibrate the absolute budget,
/// then a final pass at the requested relative tolerance.
template <class F>
QuadResult integrate_simplex(F&& f, int dim, double lo, double hi,
                             double rel_tol, std::size_t max_panels = 600) {
    if (dim < 1) throw unsupported_order_error("simplex dimension must be >= 1");
    SimplexIntegrator<std::decay_t<F>> si(dim, lo, hi, std::forward<F>(f));

    QuadResult pilot = si.run(3e-3, 1e-300, std::max<std::size_t>(max_panels / 4, 60));
    const double abs_budget = std::max(std::abs(pilot.value) * rel_tol * 0.5, 1e-300);
    QuadResult fin = si.run(rel_tol, abs_budget, max_panels);
    fin.evals += pilot.evals;
    // the driver's error covers the outer level; allow for the inner levels'
    // absolute floors on top of it
    fin.error += 0.5 * abs_budget;
    return fin;
}

}  // namespace charpoly
