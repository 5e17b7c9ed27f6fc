#pragma once

#include <functional>
#include <optional>
#include <string>

#include "matchnet/error.hpp"
#include "matchnet/intensity.hpp"

namespace matchnet {

/// Large-market primitives: tightness theta = V/U and the intensity laws.
struct LargeMarketSpec {
    double theta = 1.0;
    std::optional<IntensityModel> applicant_intensity;  // G
    std::optional<IntensityModel> vacancy_intensity;    // Ghat
    std::optional<IntensityModel> location_size;        // H, integer-valued

    void validate() const;
};

/// Probability that a link to a vacancy yields an offer: (1 - e^{-x}) / x with
/// x = d_U / theta.
double phi(double mean_applicant_degree, double theta);

/// f = 1 - M_G(-phi).
double f_large(const IntensityModel& G, double theta);
Bounded f_large_bounded(const IntensityModel& G, double theta);
double f_large(const LargeMarketSpec& spec);

/// q = (1 - exp(-theta (1 - M_Ghat(-1)))) / theta.
double q_large(const IntensityModel& Ghat, double theta);
double q_large(const LargeMarketSpec& spec);

struct LocationsValue {
    double f = 0.0;
    double chi = 0.0;
    double error_bound = 0.0;
};

/// chi = E[min(1, v / (1 + X))], v ~ H, X ~ Poisson(vbar d_U / theta).
Bounded chi(const IntensityModel& G, const IntensityModel& H, double theta);
/// f = 1 - M_G(-chi).
LocationsValue f_locations_large(const IntensityModel& G, const IntensityModel& H, double theta);

/// min(1, theta).
double frictionless_f(double theta);

/// 1 - e^{-d_U phi}.
double f_taylor1(double mean_applicant_degree, double theta);
/// f_taylor1 - phi^2 e^{-phi d_U} var / 2.
double f_taylor2(double mean_applicant_degree, double variance, double theta);
/// Taylor series of 1 - M_G(-phi) around d_U through central moment K.
/// Throws DomainError if a required moment is infinite.
double f_taylor_series(const IntensityModel& G, double theta, int order);

/// theta -> 0 with d_U fixed is not covered; these are the two limit forms.
double f_dense(const NormalizedModel& G, double theta);
double f_abundant(const NormalizedModel& G, double mean_applicant_degree);

/// (1 + theta^{-gamma})^{-1/gamma}.
double ces_f(double theta, double gamma);
/// Mean intensity d_U for which the first-order form equals ces_f(theta, gamma).
/// Throws DomainError when the inner logarithm argument is not positive.
double ces_scaling_dbar(double theta, double gamma);

struct CompleteMonotonicityResult {
    bool pass = true;
    int failing_order = 0;      // 0 when pass
    double failing_point = 0.0;
    double failing_value = 0.0;  // (-1)^n Delta_h^n m at the failing point
    double boundary_value = 0.0;  // m evaluated just above 0
    bool boundary_ok = true;
};

/// Checks (-1)^n Delta_h^n m(x) >= -tol for n = 1..max_order on the grid
/// lo, lo + h, ..., hi, plus m(0+) ~ 1. Differences accumulated in long double.
CompleteMonotonicityResult complete_monotonicity_check(const std::function<double(double)>& m, double lo, double hi,
                                                       int max_order = 8, double step = 0.05, double tol = 1e-9);

}  // namespace matchnet
