#include <doctest.h>

#include <cmath>
#include <vector>

#include "matchnet/large_market.hpp"

using namespace matchnet;

namespace {

std::vector<IntensityModel> catalog() {
    return {IntensityModel::degenerate(2.0),  IntensityModel::exponential(3.0),
            IntensityModel::gamma(2.0, 1.5),  IntensityModel::pareto(1.0, 2.5),
            IntensityModel::uniform(0.5, 3.0), IntensityModel::point_mixture({1.0, 3.0}, {0.5, 0.5})};
}

}  // namespace

TEST_CASE("phi") {
    CHECK(phi(0.0, 1.0) == 1.0);
    CHECK(std::abs(phi(1e-12, 1.0) - (1.0 - 0.5e-12)) < 1e-16);
    // E[1/(1+X)] for X ~ Poisson(ln 2), summed directly.
    const double x = std::log(2.0);
    double series = 0.0, term = std::exp(-x);
    for (int k = 0; k < 40; ++k) {
        series += term / (k + 1);
        term *= x / (k + 1);
    }
    CHECK(std::abs(phi(x, 1.0) - series) < 1e-15);
    CHECK(std::abs(phi(x, 1.0) - 1.0 / (2.0 * std::log(2.0))) < 1e-15);
    CHECK(std::abs(400.0 * phi(400.0, 2.0) - 2.0) < 1e-12);
    CHECK_THROWS_AS(phi(1.0, 0.0), DomainError);
}

TEST_CASE("f_large special forms") {
    for (double theta : {0.3, 1.0, 4.0})
        for (double d : {0.5, 2.0, 9.0}) {
            const double p = phi(d, theta);
            CHECK(std::abs(f_large(IntensityModel::degenerate(d), theta) - (1.0 - std::exp(-d * p))) < 1e-15);
            CHECK(std::abs(f_large(IntensityModel::exponential(d), theta) - (1.0 - 1.0 / (1.0 + d * p))) < 1e-12);
        }
    CHECK(std::abs(f_large(IntensityModel::degenerate(50.0), 1.0) - (1.0 - std::exp(-1.0))) <= 1e-3);
    LargeMarketSpec spec{1.0, IntensityModel::exponential(3.0), std::nullopt, std::nullopt};
    CHECK(f_large(spec) == f_large(IntensityModel::exponential(3.0), 1.0));
}

TEST_CASE("f_large increasing, concave, zero at zero") {
    for (const auto& G : catalog()) {
        std::vector<double> f;
        for (int i = 0; i <= 98; ++i) f.push_back(f_large(G, 0.1 + 0.05 * i));
        for (std::size_t k = 0; k + 1 < f.size(); ++k) CHECK(f[k + 1] - f[k] > 0.0);
        for (std::size_t k = 0; k + 2 < f.size(); ++k) CHECK(f[k + 2] - 2.0 * f[k + 1] + f[k] < 0.0);
        CHECK(f_large(G, 1e-6) < 1e-4);
    }
}

TEST_CASE("first-order form bounds f_large from above") {
    for (const auto& G : catalog())
        for (double theta : {0.5, 1.0, 2.0}) {
            const double f = f_large(G, theta);
            const double f1 = f_taylor1(mean(G), theta);
            if (G.is_degenerate()) CHECK(std::abs(f - f1) < 1e-15);
            else CHECK(f < f1);
        }
}

TEST_CASE("vacancy side") {
    for (double theta : {0.5, 1.0, 2.0, 4.0})
        for (double dv : {0.5, 1.0, 2.0, 4.0}) {
            const double q = q_large(IntensityModel::degenerate(dv), theta);
            CHECK(std::abs(q - (1.0 - std::exp(-theta * (1.0 - std::exp(-dv)))) / theta) < 1e-15);
            CHECK(std::abs(f_large(IntensityModel::degenerate(theta * dv), theta) - theta * q) < 1e-12);
        }
    const auto Ghat = IntensityModel::gamma(2.0, 1.5);
    CHECK(std::abs(q_large(Ghat, 1e-9) - (1.0 - mgf_neg(Ghat, 1.0))) < 1e-9);
}

TEST_CASE("locations") {
    const auto H1 = IntensityModel::integer(DiscretePMF::point_mass(1));
    for (const auto& G : catalog())
        for (double theta : {0.5, 1.0, 2.0}) {
            const auto v = f_locations_large(G, H1, theta);
            CHECK(std::abs(v.chi - phi(mean(G), theta)) < 1e-11);
            CHECK(std::abs(v.f - f_large(G, theta)) < 1e-11);
        }
    // Degenerate G, Poisson-distributed location sizes.
    const auto G = IntensityModel::degenerate(3.0);
    const auto Hp = IntensityModel::integer(poisson_pmf(2.0));
    const auto v = f_locations_large(G, Hp, 1.0);
    CHECK(v.f > 0.0);
    CHECK(v.f < 1.0);
    CHECK(v.error_bound < 1e-10);

    // Growing locations at fixed mean degree: the law of large numbers inside a
    // location sends chi to theta / d.
    double prev = 1.0;
    for (std::size_t size : {1u, 4u, 16u, 64u, 256u}) {
        const double c = chi(G, IntensityModel::integer(DiscretePMF::point_mass(size)), 1.0).value;
        const double gap = std::abs(c - 1.0 / 3.0);
        CHECK((gap < prev || gap < 1e-10));
        prev = gap;
    }
    CHECK(prev < 1e-2);
    CHECK_THROWS_AS(chi(G, IntensityModel::degenerate(2.5), 1.0), DomainError);
}

TEST_CASE("frictionless") {
    CHECK(frictionless_f(0.5) == 0.5);
    CHECK(frictionless_f(1.0) == 1.0);
    CHECK(frictionless_f(2.0) == 1.0);
}

TEST_CASE("taylor expansions") {
    CHECK(f_taylor2(2.0, 0.0, 1.0) == f_taylor1(2.0, 1.0));
    const auto deg = IntensityModel::degenerate(2.0);
    for (int K : {1, 2, 5, 8}) CHECK(std::abs(f_taylor_series(deg, 1.0, K) - f_large(deg, 1.0)) < 1e-15);
    const auto two = IntensityModel::point_mixture({1.0, 3.0}, {0.5, 0.5});
    CHECK(std::abs(f_taylor_series(two, 1.0, 8) - f_large(two, 1.0)) < 1e-4);
    CHECK(std::abs(f_taylor_series(two, 1.0, 2) - f_taylor2(2.0, 1.0, 1.0)) < 1e-15);
    CHECK_THROWS_AS(f_taylor_series(IntensityModel::pareto(1.0, 2.5), 1.0, 3), DomainError);
    CHECK_NOTHROW(f_taylor_series(IntensityModel::pareto(1.0, 3.5), 1.0, 3));
}

TEST_CASE("dense and abundant limits") {
    const auto nd = NormalizedModel::from(IntensityModel::degenerate(5.0));
    const auto ne = NormalizedModel::from(IntensityModel::exponential(5.0));
    for (double theta : {0.25, 1.0, 4.0}) {
        CHECK(std::abs(f_dense(nd, theta) - (1.0 - std::exp(-theta))) < 1e-15);
        CHECK(std::abs(f_dense(ne, theta) - theta / (1.0 + theta)) < 1e-12);
    }
    for (const auto& G : {IntensityModel::exponential(1.0), IntensityModel::gamma(2.0, 1.0)}) {
        const auto n = NormalizedModel::from(G);
        double prev = 1.0;
        for (double d : {1.0, 2.0, 4.0}) {
            const double gap = std::abs(f_large(scale_model(G, d), 1.0) - f_dense(n, 1.0));
            CHECK(gap < prev);
            prev = gap;
        }
        prev = 1.0;
        for (double theta : {1.0, 10.0, 100.0, 1000.0}) {
            const double gap = std::abs(f_large(scale_model(G, 2.0), theta) - f_abundant(n, 2.0));
            CHECK(gap < prev);
            prev = gap;
        }
        CHECK(prev < 1e-3);
    }
}

TEST_CASE("CES form") {
    CHECK(ces_f(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    const double d = ces_scaling_dbar(1.0, 1.0);
    CHECK(std::abs(d - -std::log(1.0 + std::log(0.5))) < 1e-15);
    CHECK(std::abs(d - 1.1813870620) < 1e-9);
    for (double theta : {0.25, 0.5, 1.0, 2.0, 4.0})
        for (double gamma : {0.5, 1.0})
            CHECK(std::abs(f_taylor1(ces_scaling_dbar(theta, gamma), theta) - ces_f(theta, gamma)) < 1e-12);
    try {
        ces_scaling_dbar(1.0, 5.0);
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("theta=1") != std::string::npos);
        CHECK(msg.find("gamma=5") != std::string::npos);
    }
}

TEST_CASE("complete monotonicity") {
    auto m1 = [](double gamma) { return [gamma](double t) { return 1.0 - ces_f(t, gamma); }; };
    auto m2 = [](double t) {
        const double x = 2.0 / t;
        return std::pow(1.0 - (1.0 - std::exp(-x)) / x, 2.0);
    };
    CHECK(complete_monotonicity_check([](double t) { return std::exp(-t); }, 0.2, 5.0, 10).pass);
    CHECK(complete_monotonicity_check(m1(0.5), 0.2, 5.0).pass);
    CHECK(complete_monotonicity_check(m1(1.0), 0.2, 5.0).pass);
    const auto r = complete_monotonicity_check(m2, 0.2, 5.0);
    CHECK_FALSE(r.pass);
    CHECK(r.boundary_ok);
    CHECK(r.failing_order >= 1);
    CHECK(r.failing_order <= 8);
    // 1 / (1 + t) is completely monotone; t / (1 + t) is not and fails at order 1.
    CHECK(complete_monotonicity_check([](double t) { return 1.0 / (1.0 + t); }, 0.2, 5.0).pass);
    const auto up = complete_monotonicity_check([](double t) { return t / (1.0 + t); }, 0.2, 5.0);
    CHECK(up.failing_order == 1);
    CHECK_FALSE(up.boundary_ok);
}
