#pragma once

#include <stdexcept>
#include <string>

namespace charpoly {

/// Spectral parameter lies outside the semicircle bulk |mu| < J*sqrt(2).
class outside_bulk_error : public std::domain_error {
  public:
    explicit outside_bulk_error(const std::string& msg) : std::domain_error(msg) {}
};

/// Eigensolver failed to converge within its iteration budget.
class solver_failure : public std::runtime_error {
  public:
    explicit solver_failure(const std::string& msg) : std::runtime_error(msg) {}
};

/// Requested moment/integral order exceeds the supported cap.
class unsupported_order_error : public std::domain_error {
  public:
    explicit unsupported_order_error(const std::string& msg) : std::domain_error(msg) {}
};

/// An integral that is logarithmically divergent at the requested limit.
class divergence_error : public std::domain_error {
  public:
    explicit divergence_error(const std::string& msg) : std::domain_error(msg) {}
};

/// Numerical evaluation finished but missed the requested tolerance.
/// Carries the best value obtained and the error actually achieved.
class accuracy_failure : public std::runtime_error {
  public:
    accuracy_failure(const std::string& msg, double best, double achieved)
        : std::runtime_error(msg), best_value(best), achieved_error(achieved) {}

    double best_value;
    double achieved_error;
};

}  // namespace charpoly
