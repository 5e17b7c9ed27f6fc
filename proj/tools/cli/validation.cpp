#include "validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "matchnet/error.hpp"
#include "matchnet/experiments.hpp"
#include "matchnet/large_market.hpp"
#include "matchnet/simulator.hpp"
#include "matchnet/small_market.hpp"

namespace matchnet::cli {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

double max_gap(const MatchProbabilities& a, const MatchProbabilities& b) {
    double g = 0.0;
    for (std::size_t k = 0; k < a.per_agent.size(); ++k) g = std::max(g, std::abs(a.per_agent[k] - b.per_agent[k]));
    return g;
}

Check within(const std::string& suite, const std::string& name, double gap, double tol) {
    return {suite, name, gap <= tol, "max |diff| = " + fmt(gap) + " (tol " + fmt(tol) + ")"};
}

}  // namespace

std::vector<Check> oracle_suite() {
    std::vector<Check> out;
    const std::vector<std::vector<double>> rows = {{0.3}, {0.2, 0.7}, {0.1, 0.5, 0.9}};
    double gap = 0.0;
    for (const auto& p : rows)
        for (std::size_t V = 1; V <= 3; ++V) {
            ApplicantLinks spec{p, V};
            gap = std::max(gap, max_gap(job_finding_exact(spec), brute_force_applicant(LinkMatrix::from(spec))));
        }
    out.push_back(within("oracle", "applicant_exact_vs_enumeration", gap, 1e-12));

    gap = 0.0;
    for (const auto& [p, U] : std::vector<std::pair<std::vector<double>, std::size_t>>{
             {{0.4, 0.8}, 2}, {{0.3, 0.6}, 3}, {{0.2, 0.5, 0.9}, 2}}) {
        VacancyLinks spec{p, U};
        gap = std::max(gap, max_gap(vacancy_fill_exact(spec), brute_force_vacancy(LinkMatrix::from(spec))));
    }
    out.push_back(within("oracle", "vacancy_exact_vs_enumeration", gap, 1e-12));

    gap = 0.0;
    double reduction = 0.0;
    for (const auto& v : std::vector<std::vector<long>>{{1, 1}, {2, 1}, {3, 2}, {0, 2}}) {
        LocationLinks spec{{0.2, 0.6, 0.9}, v};
        gap = std::max(gap, max_gap(locations_job_finding_exact(spec),
                                    brute_force_locations(LinkMatrix::from(spec), v)));
    }
    {
        LocationLinks spec{{0.2, 0.6, 0.9}, {1, 1}};
        reduction = max_gap(locations_job_finding_exact(spec), job_finding_exact(ApplicantLinks{spec.p, 2}));
    }
    out.push_back(within("oracle", "locations_exact_vs_enumeration", gap, 1e-12));
    out.push_back(within("oracle", "locations_unit_capacity_reduction", reduction, 1e-12));
    out.push_back(within("oracle", "urnball_2x2", std::abs(urnball_f(2, 2) - 0.75), 0.0));
    return out;
}

std::vector<Check> analytic_suite() {
    std::vector<Check> out;
    double gap = 0.0;
    for (double theta : {0.25, 0.5, 1.0, 2.0, 4.0})
        for (double gamma : {0.5, 1.0})
            gap = std::max(gap, std::abs(f_taylor1(ces_scaling_dbar(theta, gamma), theta) - ces_f(theta, gamma)));
    out.push_back(within("analytic", "ces_round_trip", gap, 1e-12));

    gap = 0.0;
    for (double dv : {0.5, 1.0, 2.0, 4.0})
        for (double theta : {0.5, 1.0, 2.0, 4.0}) {
            const double f = f_large(IntensityModel::degenerate(theta * dv), theta);
            const double q = q_large(IntensityModel::degenerate(dv), theta);
            gap = std::max(gap, std::abs(f - theta * q));
        }
    out.push_back(within("analytic", "f_equals_theta_q", gap, 1e-12));

    gap = 0.0;
    for (double theta : {0.25, 1.0, 4.0}) {
        const auto G = NormalizedModel::from(IntensityModel::exponential(1.0));
        gap = std::max(gap, std::abs(f_dense(G, theta) - theta / (1.0 + theta)));
    }
    out.push_back(within("analytic", "dense_exponential", gap, 1e-12));

    auto m1 = [](double gamma) { return [gamma](double t) { return 1.0 - ces_f(t, gamma); }; };
    auto m2 = [](double t) {
        const double x = 2.0 / t;
        return std::pow(1.0 + std::expm1(-x) / x, 2.0);
    };
    const auto r_half = complete_monotonicity_check(m1(0.5), 0.2, 5.0);
    const auto r_one = complete_monotonicity_check(m1(1.0), 0.2, 5.0);
    const auto r_two = complete_monotonicity_check(m2, 0.2, 5.0);
    const auto r_exp = complete_monotonicity_check([](double t) { return std::exp(-t); }, 0.2, 5.0);
    out.push_back({"analytic", "cm_ces_passes", r_half.pass && r_one.pass, ""});
    out.push_back({"analytic", "cm_second_example_fails", !r_two.pass && r_two.failing_order >= 1,
                   "failing order " + std::to_string(r_two.failing_order)});
    out.push_back({"analytic", "cm_exponential_control", r_exp.pass, ""});

    for (const auto& c : table1_cases()) {
        const auto e = fosd_experiment(c.family, c.theta);
        const bool ok = e.verdict.classification == c.expected_shape && e.gini_trend == c.expected_gini;
        out.push_back({"analytic", "table1_" + c.name, ok,
                       to_string(e.verdict.classification) + " / gini " + to_string(e.gini_trend)});
    }

    for (auto v : {MpsVariant::theorem2, MpsVariant::prop8, MpsVariant::prop9, MpsVariant::prop11}) {
        const auto verdicts = mps_battery(mps_catalog(v), v, {0.5, 1.0, 2.0});
        double worst = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (const auto& r : verdicts) {
            worst = std::min(worst, r.margin);
            ok = ok && r.pass;
        }
        out.push_back({"analytic", "mps_" + to_string(v), ok, "min margin " + fmt(worst)});
    }
    return out;
}

std::vector<Check> simulation_suite(const SuiteSettings& s) {
    std::vector<Check> out;
    auto compare = [&](const std::string& name, const SimEstimate& e, double target, double slack) {
        const double tol = std::max(3.0 * e.std_error, slack);
        out.push_back({"simulation", name, std::abs(e.estimate - target) <= tol,
                       "estimate " + fmt(e.estimate) + " target " + fmt(target) + " tol " + fmt(tol)});
    };

    SimConfig c;
    c.seed = s.seed;
    c.workers = s.workers;
    c.replications = 50;

    const auto G = IntensityModel::exponential(3.0);
    c.market = LargeMarketRecipe{4000, 1.0, G, std::nullopt, std::nullopt};
    compare("f_exponential", estimate_f(c), f_large(G, 1.0), 5e-3);

    const auto Ghat = IntensityModel::degenerate(2.0);
    c.market = LargeMarketRecipe{4000, 1.0, std::nullopt, Ghat, std::nullopt};
    c.protocol = Protocol::vacancy_side;
    compare("q_degenerate", estimate_q(c), q_large(Ghat, 1.0), 5e-3);

    const auto Gd = IntensityModel::degenerate(3.0);
    const auto H = IntensityModel::integer(DiscretePMF::point_mass(2));
    c.market = LargeMarketRecipe{4000, 1.0, Gd, std::nullopt, H};
    c.protocol = Protocol::locations;
    compare("f_locations", estimate_f(c), f_locations_large(Gd, H, 1.0).f, 5e-3);

    for (double theta : {0.5, 1.5}) {
        c.market = FiniteMarketSpec{frictionless_market(1000, theta)};
        c.replications = 20;
        compare("frictionless_theta_" + fmt(theta), estimate_f(c), frictionless_f(theta), 0.0);
    }
    return out;
}

std::vector<Check> run_suite(const std::string& suite, const SuiteSettings& settings) {
    if (suite == "oracle") return oracle_suite();
    if (suite == "analytic") return analytic_suite();
    if (suite == "simulation") return simulation_suite(settings);
    if (suite == "all") {
        auto all = oracle_suite();
        for (auto&& c : analytic_suite()) all.push_back(std::move(c));
        for (auto&& c : simulation_suite(settings)) all.push_back(std::move(c));
        return all;
    }
    throw SchemaError("key 'suite' in model must be one of oracle, analytic, simulation, all");
}

}  // namespace matchnet::cli
