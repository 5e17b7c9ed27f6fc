#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "matchnet/large_market.hpp"
#include "matchnet/simulator.hpp"

using namespace matchnet;

namespace {

SimConfig config(SimMarket market, Protocol protocol, std::size_t reps, std::uint64_t seed, std::size_t workers = 1) {
    SimConfig c;
    c.market = std::move(market);
    c.protocol = protocol;
    c.replications = reps;
    c.seed = seed;
    c.workers = workers;
    return c;
}

bool same(const SimEstimate& a, const SimEstimate& b) {
    return a.estimate == b.estimate && a.std_error == b.std_error && a.n_observations == b.n_observations &&
           a.clamp_rate == b.clamp_rate;
}

}  // namespace

TEST_CASE("sample_network: trivial graphs and edge identity") {
    const auto full = sample_network(LinkMatrix::constant(3, 4, 1.0), 1, 0);
    CHECK(full.edge_count() == 12);
    const auto empty = sample_network(LinkMatrix::constant(3, 4, 0.0), 1, 0);
    CHECK(empty.edge_count() == 0);

    for (std::uint64_t rep = 0; rep < 50; ++rep) {
        const auto net = sample_network(ApplicantLinks{std::vector<double>(40, 0.1), 30}, 5, rep);
        std::size_t rows = 0, cols = 0;
        for (std::size_t i = 0; i < net.applicants; ++i) rows += net.applicant_degree(i);
        for (std::size_t j = 0; j < net.columns; ++j) cols += net.column_degree(j);
        CHECK(rows == cols);
        CHECK(rows == net.edge_count());
    }
}

TEST_CASE("sample_network: 2x2 graphs are uniform at p = 1/2") {
    const std::size_t n = 1000000;
    std::array<std::size_t, 16> counts{};
    for (std::size_t r = 0; r < n; ++r) {
        const auto net = sample_network(LinkMatrix::constant(2, 2, 0.5), 11, r);
        unsigned code = 0;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t k = net.row_offsets[i]; k < net.row_offsets[i + 1]; ++k) code |= 1u << (2 * i + net.row_adj[k]);
        ++counts[code];
    }
    const double p = 1.0 / 16.0;
    const double se = std::sqrt(p * (1 - p) / n);
    for (auto c : counts) CHECK(std::abs(static_cast<double>(c) / n - p) < 4.0 * se);
}

TEST_CASE("sample_network: geometric skipping reproduces link probabilities") {
    const double p = 0.03;
    const std::size_t V = 500;
    std::size_t edges = 0;
    const std::size_t reps = 200;
    for (std::size_t r = 0; r < reps; ++r) edges += sample_network(ApplicantLinks{std::vector<double>(100, p), V}, 3, r).edge_count();
    const double n = 100.0 * V * reps;
    CHECK(std::abs(edges / n - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("run_protocol: small deterministic cases") {
    // One vacancy, k applicants: exactly one offer and one match.
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        const auto net = sample_network(LinkMatrix::constant(4, 1, 1.0), 2, rep);
        const auto out = run_protocol(net, Protocol::applicant_side, 2, rep);
        CHECK(std::accumulate(out.matched.begin(), out.matched.end(), 0) == 1);
        const auto vac = run_protocol(net, Protocol::vacancy_side, 2, rep);
        CHECK(vac.filled[0] == 1);
    }
    // Single location with spare capacity matches everyone linked.
    const auto net = sample_network(LocationLinks{{1.0, 1.0, 0.0}, {5}}, 1, 0);
    const auto out = run_protocol(net, Protocol::locations, 1, 0);
    CHECK(out.matched[0] == 1);
    CHECK(out.matched[1] == 1);
    CHECK(out.matched[2] == 0);
    CHECK_THROWS_AS(run_protocol(net, Protocol::applicant_side, 1, 0), DomainError);
}

TEST_CASE("run_protocol: complete 2x2 graph") {
    const std::size_t n = 200000;
    std::size_t both = 0, first = 0;
    const auto net = sample_network(LinkMatrix::constant(2, 2, 1.0), 0, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto out = run_protocol(net, Protocol::applicant_side, 8, r);
        both += out.matched[0] && out.matched[1];
        first += out.matched[0];
    }
    CHECK(std::abs(both / double(n) - 0.5) < 4.0 * std::sqrt(0.25 / n));
    CHECK(std::abs(first / double(n) - 0.75) < 4.0 * std::sqrt(0.1875 / n));
}

TEST_CASE("estimate_f converges to the enumeration oracle on tiny markets") {
    const std::vector<LinkMatrix> markets = {LinkMatrix::constant(2, 2, 0.5),
                                             LinkMatrix(3, 3, {0.2, 0.5, 0.9, 0.7, 0.1, 0.4, 0.6, 0.3, 0.8})};
    for (const auto& m : markets) {
        const auto e = estimate_f(config(FiniteMarketSpec{m}, Protocol::applicant_side, 1000000, 21, 4));
        const double target = brute_force_applicant(m).market_mean;
        CHECK(std::abs(e.estimate - target) < 4.0 * e.std_error);
    }
    const LinkMatrix vm(2, 3, {0.3, 0.6, 0.9, 0.5, 0.2, 0.8});
    const auto q = estimate_q(config(FiniteMarketSpec{vm}, Protocol::vacancy_side, 1000000, 22, 4));
    CHECK(std::abs(q.estimate - brute_force_vacancy(vm).market_mean) < 4.0 * q.std_error);
    const std::vector<long> v = {2, 1};
    const LocationLinks loc{{0.5, 0.5, 0.5}, v};
    const auto fl = estimate_f(config(FiniteMarketSpec{loc}, Protocol::locations, 1000000, 23, 4));
    CHECK(std::abs(fl.estimate - locations_job_finding_exact(loc).market_mean) < 4.0 * fl.std_error);
}

TEST_CASE("large-market recipes track the closed forms") {
    SUBCASE("applicant side, degenerate G") {
        const auto G = IntensityModel::degenerate(3.0);
        const auto e = estimate_f(config(LargeMarketRecipe{1000, 1.0, G, {}, {}}, Protocol::applicant_side, 100, 1));
        CHECK(std::abs(e.estimate - f_large(G, 1.0)) <= 3.0 * e.std_error + 5e-3);
        CHECK(e.clamp_rate == 0.0);
    }
    SUBCASE("vacancy side, degenerate Ghat") {
        const auto Ghat = IntensityModel::degenerate(2.0);
        const auto e = estimate_q(config(LargeMarketRecipe{2000, 1.0, {}, Ghat, {}}, Protocol::vacancy_side, 100, 2));
        CHECK(std::abs(e.estimate - q_large(Ghat, 1.0)) <= 3.0 * e.std_error + 5e-3);
    }
    SUBCASE("frictionless") {
        const auto e = estimate_f(config(FiniteMarketSpec{frictionless_market(1000, 0.5)}, Protocol::locations, 20, 3));
        CHECK(std::abs(e.estimate - 0.5) <= 3.0 * e.std_error);
    }
}

TEST_CASE("large_market_config") {
    const auto d = large_market_config(LargeMarketRecipe{1000, 1.0, IntensityModel::degenerate(3.0), {}, {}}, 4);
    const auto& spec = std::get<ApplicantLinks>(d.spec);
    CHECK(spec.vacancies == 1000);
    for (double p : spec.p) CHECK(p == 0.003);
    CHECK(d.clamp_rate() == 0.0);

    // P(X > 100) = 100^-1.05 for Pareto(1, 1.05).
    std::size_t clamped = 0, drawn = 0;
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
        const auto heavy = large_market_config(LargeMarketRecipe{100, 1.0, IntensityModel::pareto(1.0, 1.05), {}, {}}, 4, rep);
        clamped += heavy.clamped;
        drawn += heavy.drawn;
    }
    const double tail = std::pow(100.0, -1.05);
    CHECK(drawn == 5000);
    CHECK(std::abs(double(clamped) / drawn - tail) < 4.0 * std::sqrt(tail / drawn));

    const auto loc = large_market_config(
        LargeMarketRecipe{1000, 1.0, IntensityModel::degenerate(3.0), {}, IntensityModel::integer(DiscretePMF::point_mass(2))}, 4);
    CHECK(std::get<LocationLinks>(loc.spec).vacancies_per_location.size() == 500);

    for (std::uint64_t rep = 0; rep < 5; ++rep) {
        const auto g = large_market_config(LargeMarketRecipe{2000, 0.5, IntensityModel::exponential(2.0), {}, {}}, 9, rep);
        const auto a = accounting_check(g.spec);
        CHECK(a.residual <= 1e-9);
        CHECK(std::abs(a.mean_applicant_degree - 2.0) < 0.2);
    }
    CHECK_THROWS_AS(large_market_config(LargeMarketRecipe{5, 1.0, IntensityModel::degenerate(1.0), {}, {}}, 1),
                    DomainError);
}

TEST_CASE("determinism across runs and worker counts") {
    const auto base = config(LargeMarketRecipe{1000, 1.0, IntensityModel::exponential(3.0), {}, {}},
                             Protocol::applicant_side, 40, 77, 1);
    const auto ref = estimate_f(base);
    for (std::size_t w : {1u, 3u, 4u, 8u, 64u}) {
        auto c = base;
        c.workers = w;
        CHECK(same(estimate_f(c), ref));
    }
    auto other = base;
    other.seed = 78;
    const auto alt = estimate_f(other);
    CHECK_FALSE(same(alt, ref));
    CHECK(std::abs(alt.estimate - ref.estimate) < 6.0 * ref.std_error);
}

TEST_CASE("raising link probabilities never lowers the job-finding rate") {
    const std::vector<double> p = {0.1, 0.2, 0.05, 0.3, 0.15, 0.25};
    auto up = p;
    for (double& x : up) x += 0.05;
    const auto lo = estimate_f(config(FiniteMarketSpec{ApplicantLinks{p, 6}}, Protocol::applicant_side, 200000, 5, 4));
    const auto hi = estimate_f(config(FiniteMarketSpec{ApplicantLinks{up, 6}}, Protocol::applicant_side, 200000, 5, 4));
    CHECK(hi.estimate > lo.estimate - 3.0 * lo.std_error);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(estimate_f(config(FiniteMarketSpec{ApplicantLinks{{0.5}, 1}}, Protocol::locations, 1, 0)), DomainError);
    CHECK_THROWS_AS(estimate_q(config(FiniteMarketSpec{ApplicantLinks{{0.5}, 1}}, Protocol::applicant_side, 1, 0)),
                    DomainError);
    CHECK_THROWS_AS(estimate_f(config(FiniteMarketSpec{ApplicantLinks{{0.5}, 1}}, Protocol::applicant_side, 0, 0)),
                    DomainError);
}

TEST_CASE("degree goodness of fit is calibrated") {
    auto runs_accepted = [](SimConfig c, DegreeSide side, std::size_t networks) {
        int ok = 0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            c.seed = 1000 + s;
            ok += degree_gof(c, side, networks).p_value > 0.001;
        }
        return ok;
    };
    CHECK(runs_accepted(config(FiniteMarketSpec{LinkMatrix::constant(2, 2, 0.5)}, Protocol::applicant_side, 1, 0),
                        DegreeSide::applicant, 500) >= 19);
    const LinkMatrix het(3, 3, {0.1, 0.5, 0.9, 0.3, 0.6, 0.2, 0.8, 0.4, 0.7});
    CHECK(runs_accepted(config(FiniteMarketSpec{het}, Protocol::applicant_side, 1, 0), DegreeSide::vacancy, 500) >= 19);
    CHECK(runs_accepted(config(LargeMarketRecipe{2000, 1.0, IntensityModel::exponential(3.0), {}, {}},
                               Protocol::applicant_side, 1, 0),
                        DegreeSide::applicant, 2) >= 19);
    // A wrong reference is rejected: a market whose links are twice as likely as modelled.
    auto c = config(FiniteMarketSpec{LinkMatrix::constant(2, 2, 0.5)}, Protocol::applicant_side, 1, 0);
    CHECK_THROWS_AS(degree_gof(c, DegreeSide::applicant, 1), DomainError);
}
