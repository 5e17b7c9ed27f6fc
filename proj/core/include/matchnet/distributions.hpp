#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "matchnet/error.hpp"

namespace matchnet {

class IntensityModel;

/// Probability mass function over {0, 1, ..., n}. Support always starts at 0
/// (P(0) may be zero) so pmfs from different routes line up index by index.
/// Infinite-support laws are truncated; the dropped tail is kept in
/// truncation_mass so that sum(probs) + truncation_mass == 1.
class DiscretePMF {
public:
    DiscretePMF() : probs_{1.0} {}
    explicit DiscretePMF(std::vector<double> probs, double truncation_mass = 0.0);

    static DiscretePMF point_mass(std::size_t k);

    std::size_t size() const noexcept { return probs_.size(); }
    std::size_t max_support() const noexcept { return probs_.size() - 1; }
    double operator[](std::size_t k) const noexcept { return k < probs_.size() ? probs_[k] : 0.0; }
    std::span<const double> probs() const noexcept { return probs_; }
    double truncation_mass() const noexcept { return truncation_mass_; }

    double mean() const;
    double total_mass() const;

private:
    std::vector<double> probs_;
    double truncation_mass_ = 0.0;
};

/// Sum of independent Bernoulli(p_i). O(n^2) convolution recurrence, exact.
DiscretePMF poisson_binomial_pmf(std::span<const double> p);

DiscretePMF binomial_pmf(std::size_t n, double p);

inline constexpr double kDefaultTailTol = 1e-12;

/// Poisson(mean) truncated once the tail P(X > K) drops to tail_tol.
DiscretePMF poisson_pmf(double mean, double tail_tol = kDefaultTailTol);

/// P(d = k) = E_G[ e^{-X} X^k / k! ]. Point-mass families are summed exactly,
/// continuous families go through adaptive Gauss-Kronrod quadrature.
/// Throws NumericError if the tail cannot be pushed below tail_tol within
/// max_terms support points.
DiscretePMF mixed_poisson_pmf(const IntensityModel& model, double tail_tol = kDefaultTailTol,
                              std::size_t max_terms = 20000);

/// E[1 / (1 + X)]. The truncated tail contributes at most truncation_mass.
Bounded expect_reciprocal_one_plus(const DiscretePMF& pmf);

/// E[min(1, capacity / (1 + X))] for capacity >= 1.
Bounded expect_min_capacity(const DiscretePMF& pmf, long capacity);

/// Total-variation distance, counting truncation mass on either side as
/// unmatched.
double total_variation(const DiscretePMF& a, const DiscretePMF& b);

}  // namespace matchnet
