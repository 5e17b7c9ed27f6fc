#include "matchnet/large_market.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "matchnet/distributions.hpp"
#include "numeric.hpp"

namespace matchnet {

void LargeMarketSpec::validate() const {
    if (!(theta > 0.0 && std::isfinite(theta))) throw DomainError("LargeMarketSpec: theta must be > 0");
    if (location_size && !location_size->is_integer_valued())
        throw DomainError("LargeMarketSpec: H must be integer-valued");
}

double phi(double mean_applicant_degree, double theta) {
    if (!(mean_applicant_degree >= 0.0)) throw DomainError("phi: mean degree must be >= 0");
    if (!(theta > 0.0)) throw DomainError("phi: theta must be > 0");
    return detail::one_minus_exp_ratio(mean_applicant_degree / theta);
}

Bounded f_large_bounded(const IntensityModel& G, double theta) {
    const Bounded m = mgf_neg_bounded(G, phi(mean(G), theta));
    return {1.0 - m.value, m.error_bound};
}

double f_large(const IntensityModel& G, double theta) { return f_large_bounded(G, theta).value; }

double f_large(const LargeMarketSpec& spec) {
    spec.validate();
    if (!spec.applicant_intensity) throw DomainError("f_large: spec has no applicant intensity G");
    return f_large(*spec.applicant_intensity, spec.theta);
}

double q_large(const IntensityModel& Ghat, double theta) {
    if (!(theta > 0.0)) throw DomainError("q_large: theta must be > 0");
    const double reach = 1.0 - mgf_neg(Ghat, 1.0);
    // (1 - e^{-theta c}) / theta = c * (1 - e^{-theta c}) / (theta c)
    return reach * detail::one_minus_exp_ratio(theta * reach);
}

double q_large(const LargeMarketSpec& spec) {
    spec.validate();
    if (!spec.vacancy_intensity) throw DomainError("q_large: spec has no vacancy intensity Ghat");
    return q_large(*spec.vacancy_intensity, spec.theta);
}

Bounded chi(const IntensityModel& G, const IntensityModel& H, double theta) {
    if (!(theta > 0.0)) throw DomainError("chi: theta must be > 0");
    if (!H.is_integer_valued()) throw DomainError("chi: H must be integer-valued");
    const double rivals_mean = mean(H) * mean(G) / theta;
    const DiscretePMF rivals = poisson_pmf(rivals_mean);
    detail::KahanSum acc;
    for (auto [v, w] : H.atoms()) {
        if (w == 0.0 || v == 0.0) continue;
        acc += w * expect_min_capacity(rivals, static_cast<long>(v)).value;
    }
    double err = rivals.truncation_mass();
    if (const auto* h = std::get_if<family::Integer>(&H.family())) err += h->pmf.truncation_mass();
    return {acc.value(), err};
}

LocationsValue f_locations_large(const IntensityModel& G, const IntensityModel& H, double theta) {
    const Bounded c = chi(G, H, theta);
    const Bounded m = mgf_neg_bounded(G, c.value);
    // |d f / d chi| = E[X e^{-chi X}] <= E[X].
    return {1.0 - m.value, c.value, m.error_bound + mean(G) * c.error_bound};
}

double frictionless_f(double theta) {
    if (!(theta >= 0.0)) throw DomainError("frictionless_f: theta must be >= 0");
    return std::min(1.0, theta);
}

double f_taylor1(double mean_applicant_degree, double theta) {
    const double x = mean_applicant_degree * phi(mean_applicant_degree, theta);
    return -std::expm1(-x);
}

double f_taylor2(double mean_applicant_degree, double variance, double theta) {
    if (!(variance >= 0.0)) throw DomainError("f_taylor2: variance must be >= 0");
    const double p = phi(mean_applicant_degree, theta);
    return f_taylor1(mean_applicant_degree, theta) - 0.5 * p * p * std::exp(-p * mean_applicant_degree) * variance;
}

double f_taylor_series(const IntensityModel& G, double theta, int order) {
    if (order < 1) throw DomainError("f_taylor_series: order must be >= 1");
    const double mu = mean(G);
    const double p = phi(mu, theta);
    const double base = std::exp(-p * mu);
    double f = 1.0 - base;
    double coeff = base;  // phi^k e^{-phi mu} / k!
    for (int k = 1; k <= order; ++k) {
        coeff *= p / k;
        const Moment m = central_moment(G, k);
        if (!m.finite) {
            std::ostringstream os;
            os << "f_taylor_series: central moment of order " << k << " of " << G.name() << " is infinite";
            throw DomainError(os.str());
        }
        f += ((k % 2 == 1) ? 1.0 : -1.0) * coeff * m.value;
    }
    return f;
}

double f_dense(const NormalizedModel& G, double theta) {
    if (!(theta >= 0.0)) throw DomainError("f_dense: theta must be >= 0");
    return 1.0 - mgf_neg(G.model(), theta);
}

double f_abundant(const NormalizedModel& G, double mean_applicant_degree) {
    if (!(mean_applicant_degree >= 0.0)) throw DomainError("f_abundant: mean degree must be >= 0");
    return 1.0 - mgf_neg(G.model(), mean_applicant_degree);
}

double ces_f(double theta, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("ces_f: gamma must be > 0");
    if (!(theta > 0.0)) throw DomainError("ces_f: theta must be > 0");
    // (1 + theta^{-gamma})^{-1/gamma}
    return std::exp(-std::log1p(std::pow(theta, -gamma)) / gamma);
}

double ces_scaling_dbar(double theta, double gamma) {
    const double f = ces_f(theta, gamma);
    const double inner = std::log1p(-f) / theta;  // ln(1 - f) / theta, the log argument is 1 + inner
    if (!(inner > -1.0)) {
        std::ostringstream os;
        os << "ces_scaling_dbar: log argument 1 + ln(1 - f)/theta = " << 1.0 + inner
           << " is not positive for (theta=" << theta << ", gamma=" << gamma << ")";
        throw DomainError(os.str());
    }
    return -theta * std::log1p(inner);
}

CompleteMonotonicityResult complete_monotonicity_check(const std::function<double(double)>& m, double lo, double hi,
                                                       int max_order, double step, double tol) {
    if (!(step > 0.0) || !(hi >= lo) || lo <= 0.0) throw DomainError("complete_monotonicity_check: bad domain");
    if (max_order < 1 || max_order > 10) throw DomainError("complete_monotonicity_check: order must be in 1..10");

    const auto points = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<long double> values(points + static_cast<std::size_t>(max_order));
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = lo + static_cast<double>(i) * step;
        const double v = m(x);
        if (!std::isfinite(v)) throw DomainError("complete_monotonicity_check: m not finite inside the domain");
        values[i] = v;
    }

    CompleteMonotonicityResult r;
    // diff[i] holds Delta_h^n m(lo + i h) for the current n.
    std::vector<long double> diff = values;
    for (int n = 1; n <= max_order && r.pass; ++n) {
        for (std::size_t i = 0; i + 1 < diff.size(); ++i) diff[i] = diff[i + 1] - diff[i];
        diff.pop_back();
        const long double sign = (n % 2 == 0) ? 1.0L : -1.0L;
        for (std::size_t i = 0; i < points; ++i) {
            const long double signed_diff = sign * diff[i];
            if (signed_diff < -static_cast<long double>(tol)) {
                r.pass = false;
                r.failing_order = n;
                r.failing_point = lo + static_cast<double>(i) * step;
                r.failing_value = static_cast<double>(signed_diff);
                break;
            }
        }
    }
    r.boundary_value = m(1e-8);
    r.boundary_ok = std::abs(r.boundary_value - 1.0) <= 1e-3;
    if (!r.boundary_ok) r.pass = false;
    return r;
}

}  // namespace matchnet
