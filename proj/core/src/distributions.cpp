#include "matchnet/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "matchnet/intensity.hpp"
#include "numeric.hpp"

namespace matchnet {

DiscretePMF::DiscretePMF(std::vector<double> probs, double truncation_mass)
    : probs_(std::move(probs)), truncation_mass_(truncation_mass) {
    if (probs_.empty()) throw DomainError("DiscretePMF: empty support");
    if (!(truncation_mass_ >= 0.0 && truncation_mass_ <= 1.0))
        throw DomainError("DiscretePMF: truncation mass outside [0,1]");
    for (double p : probs_) {
        if (!(p >= 0.0)) throw DomainError("DiscretePMF: negative or NaN probability");
    }
    const double total = total_mass() + truncation_mass_;
    if (std::abs(total - 1.0) > 1e-9)
        throw DomainError("DiscretePMF: probabilities sum to " + std::to_string(total));
}

DiscretePMF DiscretePMF::point_mass(std::size_t k) {
    std::vector<double> probs(k + 1, 0.0);
    probs[k] = 1.0;
    return DiscretePMF(std::move(probs));
}

double DiscretePMF::mean() const {
    detail::KahanSum s;
    for (std::size_t k = 1; k < probs_.size(); ++k) s += static_cast<double>(k) * probs_[k];
    return s.value();
}

double DiscretePMF::total_mass() const {
    detail::KahanSum s;
    for (double p : probs_) s += p;
    return s.value();
}

namespace {

void check_probability(double p, const char* where) {
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError(std::string(where) + ": probability " + std::to_string(p) + " outside [0,1]");
}

}  // namespace

DiscretePMF poisson_binomial_pmf(std::span<const double> p) {
    for (double pi : p) check_probability(pi, "poisson_binomial_pmf");
    std::vector<double> dist(p.size() + 1, 0.0);
    dist[0] = 1.0;
    std::size_t n = 0;
    for (double pi : p) {
        const double qi = 1.0 - pi;
        ++n;
        dist[n] = dist[n - 1] * pi;
        for (std::size_t k = n - 1; k > 0; --k) dist[k] = dist[k] * qi + dist[k - 1] * pi;
        dist[0] *= qi;
    }
    return DiscretePMF(std::move(dist));
}

DiscretePMF binomial_pmf(std::size_t n, double p) {
    check_probability(p, "binomial_pmf");
    if (p == 0.0 || p == 1.0) {
        std::vector<double> v(n + 1, 0.0);
        v[p == 0.0 ? 0 : n] = 1.0;
        return DiscretePMF(std::move(v));
    }
    std::vector<double> probs(n + 1);
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
    for (std::size_t k = 0; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double log_choose =
            log_n_fact - std::lgamma(kk + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0);
        probs[k] = std::exp(log_choose + kk * log_p + static_cast<double>(n - k) * log_q);
    }
    // Renormalise the rounding residue so the pmf is a probability vector.
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (auto& x : probs) x /= total;
    return DiscretePMF(std::move(probs));
}

DiscretePMF poisson_pmf(double mean, double tail_tol) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("poisson_pmf: mean must be finite and >= 0");
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw DomainError("poisson_pmf: tail_tol must be in (0,1)");
    if (mean == 0.0) return DiscretePMF::point_mass(0);

    const double log_mean = std::log(mean);
    std::vector<double> probs;
    double tail = 1.0;
    for (std::size_t k = 0;; ++k) {
        const double kk = static_cast<double>(k);
        probs.push_back(std::exp(kk * log_mean - mean - std::lgamma(kk + 1.0)));
        if (kk >= mean) {
            // P(X > k) = P(Gamma(k+1) < mean)
            tail = boost::math::gamma_p(kk + 1.0, mean);
            if (tail <= tail_tol) break;
        }
    }
    return DiscretePMF(std::move(probs), tail);
}

namespace {

double log_poisson_kernel(double x, std::size_t k) {
    const double kk = static_cast<double>(k);
    if (x <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return kk * std::log(x) - x - std::lgamma(kk + 1.0);
}

// E_G[Poisson(k; X)] for a continuous family.
double mixed_poisson_term(const IntensityModel& model, std::size_t k) {
    const double lo = model.support_lower();
    const double hi = model.support_upper();
    auto integrand = [&](double x) {
        const double density = model.pdf(x);
        if (density == 0.0) return 0.0;
        return std::exp(log_poisson_kernel(x, k)) * density;
    };
    // Split at the kernel mode and a few standard deviations either side so the
    // adaptive rule sees one smooth bump per panel.
    const double centre = static_cast<double>(k);
    const double width = 8.0 * std::sqrt(centre + 1.0);
    std::vector<double> cuts{lo};
    for (double c : {centre - width, centre, centre + width, centre + 4.0 * width}) {
        if (c > lo && c < hi) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(hi);

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += detail::integrate(integrand, cuts[i], cuts[i + 1]).value;
    }
    return total;
}

}  // namespace

DiscretePMF mixed_poisson_pmf(const IntensityModel& model, double tail_tol, std::size_t max_terms) {
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw DomainError("mixed_poisson_pmf: tail_tol must be in (0,1)");
    if (model.is_atomic()) {
        std::vector<double> probs;
        double trunc = 0.0;
        for (auto [value, weight] : model.atoms()) {
            if (weight == 0.0) continue;
            const DiscretePMF component = poisson_pmf(value, tail_tol);
            if (probs.size() < component.size()) probs.resize(component.size(), 0.0);
            for (std::size_t k = 0; k < component.size(); ++k) probs[k] += weight * component[k];
            trunc += weight * component.truncation_mass();
        }
        if (const auto* integer = std::get_if<family::Integer>(&model.family()))
            trunc += integer->pmf.truncation_mass();
        return DiscretePMF(std::move(probs), trunc);
    }

    std::vector<double> probs;
    detail::KahanSum accumulated;
    for (std::size_t k = 0; k < max_terms; ++k) {
        const double pk = mixed_poisson_term(model, k);
        probs.push_back(pk);
        accumulated += pk;
        const double remaining = 1.0 - accumulated.value();
        if (remaining <= tail_tol && static_cast<double>(k) >= mean(model)) {
            return DiscretePMF(std::move(probs), std::max(0.0, remaining));
        }
    }
    throw NumericError("mixed_poisson_pmf: tail above tolerance after " + std::to_string(max_terms) + " terms",
                       1.0 - accumulated.value());
}

Bounded expect_reciprocal_one_plus(const DiscretePMF& pmf) {
    detail::KahanSum s;
    const auto probs = pmf.probs();
    for (std::size_t k = 0; k < probs.size(); ++k) s += probs[k] / (1.0 + static_cast<double>(k));
    return {s.value(), pmf.truncation_mass()};
}

Bounded expect_min_capacity(const DiscretePMF& pmf, long capacity) {
    if (capacity < 1) throw DomainError("expect_min_capacity: capacity must be >= 1");
    detail::KahanSum s;
    const auto probs = pmf.probs();
    const double v = static_cast<double>(capacity);
    for (std::size_t k = 0; k < probs.size(); ++k) s += probs[k] * std::min(1.0, v / (1.0 + static_cast<double>(k)));
    return {s.value(), pmf.truncation_mass()};
}

double total_variation(const DiscretePMF& a, const DiscretePMF& b) {
    const std::size_t n = std::max(a.size(), b.size());
    detail::KahanSum s;
    for (std::size_t k = 0; k < n; ++k) s += std::abs(a[k] - b[k]);
    return 0.5 * (s.value() + a.truncation_mass() + b.truncation_mass());
}

}  // namespace matchnet
