#include <doctest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "matchnet/intensity.hpp"
#include "matchnet/rng.hpp"

using namespace matchnet;

namespace {

std::vector<IntensityModel> catalog() {
    return {IntensityModel::degenerate(2.0),         IntensityModel::exponential(1.5),
            IntensityModel::gamma(2.0, 3.0),         IntensityModel::gamma(0.5, 1.0),
            IntensityModel::pareto(1.0, 2.5),        IntensityModel::uniform(0.5, 3.0),
            IntensityModel::point_mixture({1.0, 3.0}, {0.5, 0.5}),
            IntensityModel::integer(DiscretePMF({0.2, 0.3, 0.5}))};
}

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("mgf closed forms") {
    CHECK(mgf_neg(IntensityModel::exponential(1.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mgf_neg(IntensityModel::degenerate(3.0), 0.0) == 1.0);
    CHECK(std::abs(mgf_neg(IntensityModel::gamma(2.0, 3.0), 0.4) - std::pow(1.0 + 0.4 * 1.5, -2.0)) < 1e-15);
    const double a = 1.0, b = 3.0, s = 0.7;
    CHECK(std::abs(mgf_neg(IntensityModel::uniform(a, b), s) - (std::exp(-a * s) - std::exp(-b * s)) / (s * (b - a))) <
          1e-15);
    // Near s = 0 the uniform form must not cancel.
    const double tiny = 1e-10;
    CHECK(std::abs(mgf_neg(IntensityModel::uniform(a, b), tiny) - (1.0 - 2.0 * tiny)) < 1e-15);
    CHECK_THROWS_AS(mgf_neg(IntensityModel::exponential(1.0), -0.1), DomainError);
}

TEST_CASE("pareto mgf: quadrature vs incomplete gamma") {
    for (double alpha : {1.2, 2.0, 2.5, 4.0, 7.3})
        for (double s : {0.05, 0.5, 1.0, 3.0}) {
            const double q = mgf_neg(IntensityModel::pareto(1.0, alpha), s);
            const double g = pareto_mgf_incomplete_gamma(1.0, alpha, s);
            CHECK(std::abs(q - g) < 1e-8);
        }
    // Independent Simpson integration of alpha x^{-alpha-1} e^{-s x} after x = 1/u.
    const double alpha = 2.0, s = 0.5;
    const double simpson_value =
        simpson([&](double u) { return u <= 0 ? 0.0 : alpha * std::pow(u, alpha - 1.0) * std::exp(-s / u); }, 0.0, 1.0,
                20000);
    CHECK(std::abs(mgf_neg(IntensityModel::pareto(1.0, alpha), s) - simpson_value) < 1e-9);
}

TEST_CASE("mgf shape properties on every catalog member") {
    for (const auto& m : catalog()) {
        double prev = 1.0;
        double prev_log = 0.0;
        double prev_slope = -1e300;
        for (int i = 1; i <= 40; ++i) {
            const double s = 0.1 * i;
            const double v = mgf_neg(m, s);
            CHECK(v <= prev + 1e-15);
            const double lv = std::log(v);
            const double slope = (lv - prev_log) / 0.1;
            CHECK(slope >= prev_slope - 1e-9);  // log-convex
            const double jensen = std::exp(-s * mean(m));
            if (m.is_degenerate()) CHECK(std::abs(v - jensen) < 1e-15);
            else CHECK(v > jensen);
            prev = v;
            prev_log = lv;
            prev_slope = slope;
        }
    }
}

TEST_CASE("moments") {
    CHECK(mean(IntensityModel::uniform(0.0, 2.0)) == 1.0);
    CHECK(std::abs(mean(IntensityModel::pareto(1.0, 2.0)) - 2.0) < 1e-15);
    CHECK(std::abs(variance(IntensityModel::gamma(2.0, 3.0)).value - 4.5) < 1e-14);
    CHECK_FALSE(variance(IntensityModel::pareto(1.0, 2.0)).finite);
    CHECK(variance(IntensityModel::pareto(1.0, 3.0)).finite);
    CHECK(std::abs(central_moment(IntensityModel::exponential(2.0), 3).value - 2.0 * 8.0) < 1e-12);
    CHECK(std::abs(central_moment(IntensityModel::uniform(0.0, 2.0), 4).value - 1.0 / 5.0) < 1e-14);
    CHECK(central_moment(IntensityModel::uniform(0.0, 2.0), 3).value == doctest::Approx(0.0));
    CHECK_FALSE(central_moment(IntensityModel::pareto(1.0, 3.5), 4).finite);
}

TEST_CASE("gini closed forms and scale invariance") {
    CHECK(std::abs(gini(IntensityModel::pareto(1.0, 1.5)) - 0.5) < 1e-15);
    CHECK(std::abs(gini(IntensityModel::uniform(0.0, 2.0)) - 1.0 / 3.0) < 1e-15);
    CHECK(gini(IntensityModel::degenerate(4.0)) == 0.0);
    CHECK(std::abs(gini(IntensityModel::exponential(3.0)) - 0.5) < 1e-8);
    for (double k : {0.5, 2.0, 5.0}) {
        // Closed form Gamma(k + 1/2) / (k Gamma(k) sqrt(pi)) as an independent oracle.
        const double closed = std::exp(std::lgamma(k + 0.5) - std::lgamma(k)) / (k * std::sqrt(M_PI));
        for (double m : {1.0, 2.0, 5.0}) CHECK(std::abs(gini(IntensityModel::gamma(k, m)) - closed) < 1e-8);
    }
    const auto two = IntensityModel::point_mixture({1.0, 3.0}, {0.5, 0.5});
    CHECK(std::abs(gini(two) - 0.25) < 1e-15);
    for (double rho : {0.3, 2.0, 7.0}) {
        CHECK(std::abs(gini(scale_model(two, rho)) - gini(two)) < 1e-14);
        const auto p = IntensityModel::pareto(1.0, 2.2);
        CHECK(std::abs(gini(scale_model(p, rho)) - gini(p)) < 1e-14);
    }
    CHECK_THROWS_AS(gini(IntensityModel::degenerate(0.0)), DomainError);
}

TEST_CASE("cdf and quantile") {
    const auto d = IntensityModel::degenerate(2.0);
    CHECK(cdf(d, 1.999) == 0.0);
    CHECK(cdf(d, 2.0) == 1.0);
    CHECK(cdf(IntensityModel::uniform(0.0, 2.0), 1.0) == 0.5);
    CHECK(std::abs(cdf(IntensityModel::pareto(1.0, 2.0), 2.0) - 0.75) < 1e-15);
    for (const auto& m : catalog())
        for (double u : {0.1, 0.5, 0.9}) CHECK(cdf(m, quantile(m, u)) >= u - 1e-12);
}

TEST_CASE("sampling reproduces analytic moments") {
    const std::size_t n = 1000000;
    for (const auto& m : {IntensityModel::exponential(1.5), IntensityModel::gamma(2.0, 3.0),
                          IntensityModel::uniform(0.5, 3.0), IntensityModel::pareto(1.0, 4.5),
                          IntensityModel::point_mixture({1.0, 3.0}, {0.25, 0.75})}) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto rng = CounterRng::keyed({99, i});
            sum += sample(m, rng);
        }
        const double se = std::sqrt(variance(m).value / n);
        CHECK(std::abs(sum / n - mean(m)) < 4.0 * se);
    }
}

TEST_CASE("scale_model") {
    const auto g = IntensityModel::degenerate(2.0);
    CHECK(mean(scale_model(g, 1.0)) == 2.0);
    CHECK(scale_model(g, 2.0).is_degenerate());
    CHECK(mean(scale_model(g, 2.0)) == 4.0);
    CHECK(std::abs(mean(scale_model(IntensityModel::pareto(1.0, 3.0), 1.7)) - 1.7 * 1.5) < 1e-14);
    CHECK_THROWS_AS(scale_model(g, 0.0), DomainError);
}

TEST_CASE("normalized models") {
    const auto n = NormalizedModel::from(IntensityModel::gamma(3.0, 7.0));
    CHECK(std::abs(mean(n.model()) - 1.0) < 1e-12);
    CHECK_THROWS(NormalizedModel::assume_normalized(IntensityModel::exponential(2.0)));
    CHECK_NOTHROW(NormalizedModel::assume_normalized(IntensityModel::exponential(1.0)));
}

TEST_CASE("fosd sweeps") {
    const auto pts = fosd_sweep(sweep::Pareto{1.0, {4.0, 2.0, 1.5}});
    REQUIRE(pts.size() == 3);
    CHECK(std::abs(mean(pts[0].model) - 4.0 / 3.0) < 1e-14);
    CHECK(std::abs(mean(pts[1].model) - 2.0) < 1e-14);
    CHECK(std::abs(mean(pts[2].model) - 3.0) < 1e-14);

    const auto shift = fosd_sweep(sweep::UniformShift{1.0, {2.0, 1.0}});
    CHECK(shift[0].model.support_lower() == 0.5);
    CHECK(shift[0].model.support_upper() == 1.5);
    CHECK(shift[1].model.support_lower() == 1.5);

    const auto t3 = fosd_sweep(sweep::UniformFixedLower{5.0, {6.0, 8.0, 12.0}});
    double prev = -1.0;
    for (const auto& p : t3) {
        const double d = mean(p.model);
        CHECK(std::abs(gini(p.model) - (1.0 - 5.0 / d) / 3.0) < 1e-14);
        CHECK(gini(p.model) > prev);
        prev = gini(p.model);
    }
    // A repeated mean cannot be ordered.
    CHECK_THROWS_AS(fosd_sweep(sweep::Gamma{2.0, {1.0, 1.0}}), ConstructionError);
}

TEST_CASE("second-order dominance and MPS pairs") {
    const auto d2 = IntensityModel::degenerate(2.0);
    const auto two = IntensityModel::point_mixture({1.0, 3.0}, {0.5, 0.5});
    CHECK(verify_sosd(d2, d2).pass);
    CHECK(verify_sosd(d2, d2).min_integrated_gap == 0.0);
    CHECK(verify_sosd(d2, two).pass);
    CHECK_FALSE(verify_sosd(IntensityModel::uniform(0.0, 4.0), IntensityModel::uniform(1.0, 3.0)).pass);
    CHECK(verify_sosd(IntensityModel::uniform(1.0, 3.0), IntensityModel::uniform(0.0, 4.0)).pass);

    CHECK_NOTHROW(mps_pair(d2, spread::TwoPoint{1.0}));
    CHECK_NOTHROW(mps_pair(IntensityModel::gamma(4.0, 3.0), spread::GammaShapeDrop{1.0}));
    CHECK_NOTHROW(mps_pair(IntensityModel::uniform(1.0, 3.0), spread::UniformWiden{4.0}));
    CHECK_THROWS_AS(make_mps_pair(d2, IntensityModel::point_mixture({1.0, 4.0}, {0.5, 0.5})), ConstructionError);
    CHECK_THROWS_AS(mps_pair(IntensityModel::gamma(1.0, 3.0), spread::GammaShapeDrop{2.0}), ConstructionError);

    const auto h = mps_pair(IntensityModel::integer(DiscretePMF::point_mass(2)), spread::TwoPoint{1});
    CHECK(h.spread().is_integer_valued());
}

TEST_CASE("json round trip and schema errors") {
    for (const auto& m : catalog()) {
        const auto back = model_from_json(to_json(m));
        CHECK(back.name() == m.name());
        CHECK(std::abs(mean(back) - mean(m)) < 1e-15);
    }
    const auto pois = model_from_json(nlohmann::json::parse(R"({"family":"poisson","params":{"mean":2}})"));
    CHECK(pois.is_integer_valued());
    CHECK(std::abs(mean(pois) - 2.0) < 1e-10);

    auto message = [](const char* text) {
        try {
            model_from_json(nlohmann::json::parse(text));
        } catch (const SchemaError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message(R"({"family":"gamma","params":{"shape":2,"mean":1,"rate":3}})").find("rate") != std::string::npos);
    CHECK(message(R"({"family":"gamma","params":{"shape":2}})").find("mean") != std::string::npos);
    CHECK(message(R"({"family":"weibull"})").find("weibull") != std::string::npos);
    CHECK(message(R"({"family":"exponential","params":{"mean":-1}})") != "");
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(IntensityModel::pareto(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(IntensityModel::uniform(2.0, 1.0), DomainError);
    CHECK_THROWS_AS(IntensityModel::gamma(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(IntensityModel::point_mixture({1.0, 2.0}, {0.5, 0.6}), DomainError);
    CHECK_THROWS_AS(IntensityModel::degenerate(-1.0), DomainError);
}
