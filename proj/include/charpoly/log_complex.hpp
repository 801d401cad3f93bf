#pragma once

// Complex values carried as (log-magnitude, phase) pairs, plus a rescaling
// accumulator for sums of terms whose magnitudes span hundreds of orders of
// magnitude (|Z|^(-n/2) at N = 200 does).

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>

namespace charpoly {

struct LogComplex {
    double log_abs = -std::numeric_limits<double>::infinity();
    double arg = 0.0;

    static LogComplex from_log(std::complex<double> log_value) {
        return LogComplex{log_value.real(), log_value.imag()};
    }

    static LogComplex from_value(std::complex<double> z) {
        if (z == std::complex<double>(0.0, 0.0)) return LogComplex{};
        return LogComplex{std::log(std::abs(z)), std::arg(z)};
    }

    std::complex<double> value() const {
        if (std::isinf(log_abs) && log_abs < 0.0) return {0.0, 0.0};
        return std::polar(std::exp(log_abs), arg);
    }

    /// Value after dividing the magnitude by e^{ref} (for safe extraction).
    std::complex<double> value_scaled(double ref) const {
        if (std::isinf(log_abs) && log_abs < 0.0) return {0.0, 0.0};
        return std::polar(std::exp(log_abs - ref), arg);
    }

    LogComplex operator*(const LogComplex& o) const {
        return LogComplex{log_abs + o.log_abs, arg + o.arg};
    }
    LogComplex operator/(const LogComplex& o) const {
        return LogComplex{log_abs - o.log_abs, arg - o.arg};
    }
};

/// Sum of LogComplex terms. Keeps a running reference magnitude and stores
/// the partial sum scaled by e^{-ref}; when a new term dwarfs the reference
/// the accumulated sum is rescaled. Exact up to ordinary rounding as long as
/// individual terms are finite in log form.
class LogComplexSum {
  public:
    void add(const LogComplex& t) {
        ++count_;
        if (std::isinf(t.log_abs) && t.log_abs < 0.0) return;  // adding zero
        if (t.log_abs > ref_) {
            // rescale existing sum to the new reference
            const double shift = ref_ - t.log_abs;
            sum_ *= std::exp(shift);
            ref_ = t.log_abs;
        }
        sum_ += std::polar(std::exp(t.log_abs - ref_), t.arg);
    }

    std::size_t count() const { return count_; }
    double reference() const { return ref_; }

    /// Total as LogComplex (exact even when e^{ref} would overflow).
    LogComplex total() const {
        if (count_ == 0 || sum_ == std::complex<double>(0.0, 0.0))
            return LogComplex{};
        return LogComplex{ref_ + std::log(std::abs(sum_)), std::arg(sum_)};
    }

    /// Mean over n added terms (including any exact zeros).
    LogComplex mean() const {
        LogComplex t = total();
        if (count_ > 0) t.log_abs -= std::log(static_cast<double>(count_));
        return t;
    }

  private:
    double ref_ = -std::numeric_limits<double>::infinity();
    std::complex<double> sum_{0.0, 0.0};
    std::size_t count_ = 0;
};

}  // namespace charpoly
