#pragma once

// Internal numerical helpers shared by the core translation units.

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "matchnet/error.hpp"

namespace matchnet::detail {

/// Neumaier-compensated running sum.
class KahanSum {
public:
    KahanSum& operator+=(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        return *this;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline constexpr double kQuadratureRelTol = 1e-10;

/// Adaptive 61-point Gauss-Kronrod on [a, b]; b may be +inf.
template <class F>
Bounded integrate(F&& f, double a, double b, double rel_tol = kQuadratureRelTol) {
    if (!(b > a)) return {0.0, 0.0};
    double error = 0.0;
    double l1 = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, rel_tol, &error, &l1);
    if (!std::isfinite(value)) throw NumericError("quadrature produced a non-finite value", error);
    if (error > std::max(1e3 * rel_tol * l1, 1e-14))
        throw NumericError("quadrature did not converge", error);
    return {value, error};
}

/// tanh-sinh on a finite [a, b]; copes with algebraic endpoint singularities.
template <class F>
Bounded integrate_endpoint(F&& f, double a, double b, double rel_tol = kQuadratureRelTol) {
    if (!(b > a)) return {0.0, 0.0};
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    double error = 0.0;
    double l1 = 0.0;
    const double value = ts.integrate(f, a, b, rel_tol, &error, &l1);
    if (!std::isfinite(value)) throw NumericError("quadrature produced a non-finite value", error);
    if (error > std::max(1e3 * rel_tol * l1, 1e-14)) throw NumericError("quadrature did not converge", error);
    return {value, error};
}

/// (1 - e^{-x}) / x with the removable singularity at 0 handled by its series.
inline double one_minus_exp_ratio(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x / 2.0 + x * x / 6.0;
    return -std::expm1(-x) / x;
}

}  // namespace matchnet::detail
