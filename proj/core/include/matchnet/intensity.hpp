#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "matchnet/distributions.hpp"
#include "matchnet/error.hpp"

namespace matchnet {

class CounterRng;

namespace family {

struct Degenerate {
    double value;
};
struct Exponential {
    double mean;
};
struct Gamma {
    double shape;
    double mean;
};
/// Support [scale, inf), P(X > x) = (scale / x)^shape. Mean finite for shape > 1.
struct Pareto {
    double scale;
    double shape;
};
struct Uniform {
    double lower;
    double upper;
};
/// Finitely many atoms; values need not be sorted on input.
struct PointMixture {
    std::vector<double> values;
    std::vector<double> weights;
};
/// Law on the non-negative integers (vacancies per location).
struct Integer {
    DiscretePMF pmf;
};

}  // namespace family

/// Search-intensity distribution: G (applicants), Ghat (vacancies) or H
/// (vacancies per location). Immutable; validated on construction.
class IntensityModel {
public:
    using Family = std::variant<family::Degenerate, family::Exponential, family::Gamma, family::Pareto,
                                family::Uniform, family::PointMixture, family::Integer>;

    explicit IntensityModel(Family f);

    static IntensityModel degenerate(double value) { return IntensityModel(family::Degenerate{value}); }
    static IntensityModel exponential(double mean) { return IntensityModel(family::Exponential{mean}); }
    static IntensityModel gamma(double shape, double mean) { return IntensityModel(family::Gamma{shape, mean}); }
    static IntensityModel pareto(double scale, double shape) { return IntensityModel(family::Pareto{scale, shape}); }
    static IntensityModel uniform(double lower, double upper) { return IntensityModel(family::Uniform{lower, upper}); }
    static IntensityModel point_mixture(std::vector<double> values, std::vector<double> weights) {
        return IntensityModel(family::PointMixture{std::move(values), std::move(weights)});
    }
    static IntensityModel integer(DiscretePMF pmf) { return IntensityModel(family::Integer{std::move(pmf)}); }

    const Family& family() const noexcept { return family_; }
    std::string name() const;

    /// True when every draw is a point mass (Degenerate, PointMixture, Integer).
    bool is_atomic() const noexcept;
    /// True for laws concentrated on one point.
    bool is_degenerate() const noexcept;
    /// Support is a subset of the non-negative integers.
    bool is_integer_valued() const noexcept;

    double support_lower() const;
    /// +inf for unbounded families.
    double support_upper() const;

    /// Atoms of an atomic model, sorted by value.
    std::vector<std::pair<double, double>> atoms() const;

    /// Density of a continuous family. Throws DomainError for atomic models.
    double pdf(double x) const;

private:
    Family family_;
};

/// Finite moment or an explicit "infinite" marker.
struct Moment {
    bool finite = true;
    double value = 0.0;

    static Moment infinite() { return {false, 0.0}; }
};

/// E[e^{-sX}], s >= 0.
double mgf_neg(const IntensityModel& model, double s);
/// Same, with the quadrature error estimate for the Pareto family (0 elsewhere).
Bounded mgf_neg_bounded(const IntensityModel& model, double s);
/// alpha (x_m s)^alpha Gamma(-alpha, x_m s) via the incomplete-gamma recurrence;
/// independent cross-check for the Pareto quadrature.
double pareto_mgf_incomplete_gamma(double scale, double shape, double s);

double mean(const IntensityModel& model);
Moment variance(const IntensityModel& model);
/// E[(X - mean)^order].
Moment central_moment(const IntensityModel& model, int order);

/// E|X - Y| / (2 E[X]).
double gini(const IntensityModel& model);

double cdf(const IntensityModel& model, double x);
/// Generalised inverse F^{-1}(u) = inf{x : F(x) >= u}, u in [0, 1).
double quantile(const IntensityModel& model, double u);
/// Inverse-transform draw.
double sample(const IntensityModel& model, CounterRng& rng);
/// E[(x - X)^+] = integral_0^x F(t) dt, in closed form per family.
double integrated_cdf(const IntensityModel& model, double x);

/// Law of rho * X.
IntensityModel scale_model(const IntensityModel& model, double rho);

/// Model rescaled to mean 1. Construction fails if the rescaled mean is not 1.
class NormalizedModel {
public:
    static NormalizedModel from(const IntensityModel& model);
    /// Accepts a model already at mean 1 (within 1e-12); throws otherwise.
    static NormalizedModel assume_normalized(const IntensityModel& model);

    const IntensityModel& model() const noexcept { return model_; }

private:
    explicit NormalizedModel(IntensityModel m) : model_(std::move(m)) {}
    IntensityModel model_;
};

// ---- FOSD / SOSD constructors -------------------------------------------

namespace sweep {

struct Degenerate {
    std::vector<double> means;
};
struct Gamma {
    double shape;
    std::vector<double> means;
};
/// Shape values are visited in the order given; means rise as shape falls.
struct Pareto {
    double scale;
    std::vector<double> shapes;
};
/// a = mean / 2, b = 3 mean / 2.
struct UniformProportional {
    std::vector<double> means;
};
/// Fixed width: a = mean - width/2, b = mean + width/2.
struct UniformShift {
    double width;
    std::vector<double> means;
};
/// Fixed lower bound: b = 2 mean - a.
struct UniformFixedLower {
    double lower;
    std::vector<double> means;
};

}  // namespace sweep

using FosdFamily = std::variant<sweep::Degenerate, sweep::Gamma, sweep::Pareto, sweep::UniformProportional,
                                sweep::UniformShift, sweep::UniformFixedLower>;

struct SweepPoint {
    double param;
    IntensityModel model;
};

/// Models ordered by increasing mean, each adjacent pair checked for first-order
/// stochastic dominance on a 1000-point cdf grid. Throws ConstructionError on a
/// violated pair.
std::vector<SweepPoint> fosd_sweep(const FosdFamily& family);

struct SosdReport {
    bool pass = false;
    double mean_gap = 0.0;
    /// min over the grid of integral_0^x [G'(t) - G(t)] dt (negative = violation).
    double min_integrated_gap = 0.0;
    double grid_upper = 0.0;
};

/// Checks that `spread` is a mean-preserving spread of `base`.
SosdReport verify_sosd(const IntensityModel& base, const IntensityModel& spread, std::size_t grid_size = 4000);

/// A (G, G') pair that passed verify_sosd.
class MpsPair {
public:
    const IntensityModel& base() const noexcept { return base_; }
    const IntensityModel& spread() const noexcept { return spread_; }
    const SosdReport& report() const noexcept { return report_; }
    std::string label() const;

private:
    friend MpsPair make_mps_pair(const IntensityModel&, const IntensityModel&);
    MpsPair(IntensityModel b, IntensityModel s, SosdReport r)
        : base_(std::move(b)), spread_(std::move(s)), report_(r) {}

    IntensityModel base_;
    IntensityModel spread_;
    SosdReport report_;
};

/// Verifies and wraps an explicit pair; throws ConstructionError on failure.
MpsPair make_mps_pair(const IntensityModel& base, const IntensityModel& spread);

namespace spread {

/// Degenerate(d) -> {d - eps, d + eps} with equal weights. For integer-valued
/// bases eps must be an integer and the result stays integer-valued.
struct TwoPoint {
    double eps;
};
/// Gamma(k, m) -> Gamma(k', m), k' < k.
struct GammaShapeDrop {
    double new_shape;
};
/// Uniform of width l -> same centre, width l' > l.
struct UniformWiden {
    double new_width;
};

}  // namespace spread

using SpreadKind = std::variant<spread::TwoPoint, spread::GammaShapeDrop, spread::UniformWiden>;

MpsPair mps_pair(const IntensityModel& base, const SpreadKind& kind);

// ---- JSON --------------------------------------------------------------

/// {"family": name, "params": {...}}
nlohmann::json to_json(const IntensityModel& model);
IntensityModel model_from_json(const nlohmann::json& j);

}  // namespace matchnet
