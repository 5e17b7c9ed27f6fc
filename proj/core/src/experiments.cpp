#include "matchnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matchnet/large_market.hpp"

namespace matchnet {

std::string to_string(Shape s) {
    switch (s) {
        case Shape::increasing: return "increasing";
        case Shape::decreasing: return "decreasing";
        case Shape::inverted_U: return "inverted_U";
        case Shape::inconclusive: return "inconclusive";
    }
    return "?";
}

std::string to_string(GiniTrend g) {
    switch (g) {
        case GiniTrend::constant: return "constant";
        case GiniTrend::increasing: return "increasing";
        case GiniTrend::decreasing: return "decreasing";
        case GiniTrend::mixed: return "mixed";
    }
    return "?";
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) return {lo};
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = hi;
    return g;
}

ShapeVerdict classify_shape(const std::vector<SweepRow>& rows, double margin) {
    ShapeVerdict v;
    if (rows.size() < 3) return v;
    bool all_up = true;
    bool all_down = true;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const double d = rows[k + 1].f - rows[k].f;
        all_up = all_up && d > 0.0;
        all_down = all_down && d < 0.0;
    }
    const double first = rows.front().f;
    const double last = rows.back().f;
    if (all_up && last - first >= margin) {
        v.classification = Shape::increasing;
        v.margin = last - first;
        return v;
    }
    if (all_down && first - last >= margin) {
        v.classification = Shape::decreasing;
        v.margin = first - last;
        return v;
    }
    const auto top = std::max_element(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.f < b.f; });
    const double gap = std::min(top->f - first, top->f - last);
    if (top != rows.begin() && top != rows.end() - 1 && gap >= margin) {
        v.classification = Shape::inverted_U;
        v.argmax_param = top->param;
        v.margin = gap;
    }
    return v;
}

GiniTrend classify_gini(const std::vector<SweepRow>& rows) {
    if (rows.empty()) return GiniTrend::constant;
    const auto [lo, hi] =
        std::minmax_element(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.gini < b.gini; });
    if (hi->gini - lo->gini < 1e-9) return GiniTrend::constant;
    bool up = true;
    bool down = true;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const double d = rows[k + 1].gini - rows[k].gini;
        up = up && d > 0.0;
        down = down && d < 0.0;
    }
    return up ? GiniTrend::increasing : down ? GiniTrend::decreasing : GiniTrend::mixed;
}

FosdExperiment fosd_experiment(const FosdFamily& family, double theta, double margin) {
    FosdExperiment out;
    for (const SweepPoint& p : fosd_sweep(family)) {
        out.rows.push_back({p.param, mean(p.model), gini(p.model), f_large(p.model, theta), theta});
    }
    out.verdict = classify_shape(out.rows, margin);
    out.gini_trend = classify_gini(out.rows);
    return out;
}

std::vector<Table1Case> table1_cases(std::size_t refine) {
    const std::size_t n = 200 * std::max<std::size_t>(1, refine) + 1;
    // Pareto: shape from 8 down towards 1, which raises the mean from 8/7.
    auto pareto_shapes = [&] {
        auto g = linspace(std::log(8.0), std::log(1.05), n);
        for (double& x : g) x = std::exp(x);
        return g;
    };
    return {
        {"degenerate", sweep::Degenerate{linspace(0.5, 20.0, n)}, 1.0, Shape::increasing, GiniTrend::constant},
        {"gamma", sweep::Gamma{2.0, linspace(0.5, 20.0, n)}, 1.0, Shape::increasing, GiniTrend::constant},
        {"pareto", sweep::Pareto{1.0, pareto_shapes()}, 1.0, Shape::inverted_U, GiniTrend::increasing},
        {"uniform_type1", sweep::UniformProportional{linspace(0.5, 20.0, n)}, 1.0, Shape::increasing,
         GiniTrend::constant},
        {"uniform_type2", sweep::UniformShift{1.0, linspace(0.6, 20.0, n)}, 1.0, Shape::increasing,
         GiniTrend::decreasing},
        {"uniform_type3", sweep::UniformFixedLower{5.0, linspace(5.05, 40.0, n)}, 1.0, Shape::inverted_U,
         GiniTrend::increasing},
    };
}

std::vector<SurfaceCell> figure2_surface(const std::vector<double>& scales, const std::vector<double>& thetas,
                                         const std::vector<double>& alphas) {
    std::vector<SurfaceCell> cells;
    cells.reserve(scales.size() * thetas.size() * alphas.size());
    for (double xm : scales)
        for (double theta : thetas)
            for (double alpha : alphas) {
                SurfaceCell c{xm, theta, alpha, std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN(), "ok"};
                try {
                    if (!(alpha > 1.0)) throw DomainError("shape must exceed 1");
                    const IntensityModel g = IntensityModel::pareto(xm, alpha);
                    c.mean_intensity = mean(g);
                    c.f = f_large(g, theta);
                } catch (const std::exception& e) {
                    c.status = e.what();
                    c.f = std::numeric_limits<double>::quiet_NaN();
                }
                cells.push_back(std::move(c));
            }
    return cells;
}

std::string to_string(MpsVariant v) {
    switch (v) {
        case MpsVariant::theorem2: return "theorem2";
        case MpsVariant::prop8: return "prop8";
        case MpsVariant::prop9: return "prop9";
        case MpsVariant::prop11: return "prop11";
    }
    return "?";
}

MpsVariant mps_variant_from_string(const std::string& s) {
    if (s == "theorem2") return MpsVariant::theorem2;
    if (s == "prop8") return MpsVariant::prop8;
    if (s == "prop9") return MpsVariant::prop9;
    if (s == "prop11") return MpsVariant::prop11;
    throw DomainError("unknown battery variant '" + s + "'");
}

std::vector<MpsVerdict> mps_battery(const std::vector<MpsPair>& pairs, MpsVariant variant,
                                    const std::vector<double>& thetas, const std::optional<IntensityModel>& companion) {
    const IntensityModel other = companion ? *companion
                                 : variant == MpsVariant::prop9
                                     ? IntensityModel::degenerate(3.0)
                                     : IntensityModel::integer(DiscretePMF::point_mass(2));
    if (variant == MpsVariant::prop8 && !other.is_integer_valued())
        throw DomainError("mps_battery: prop8 needs an integer-valued H");
    auto value = [&](const IntensityModel& m, double theta) {
        switch (variant) {
            case MpsVariant::theorem2: return f_large(m, theta);
            case MpsVariant::prop8: return f_locations_large(m, other, theta).f;
            case MpsVariant::prop9: return f_locations_large(other, m, theta).f;
            case MpsVariant::prop11: return q_large(m, theta);
        }
        return 0.0;
    };
    std::vector<MpsVerdict> out;
    for (const MpsPair& pair : pairs) {
        if (variant == MpsVariant::prop9 && !pair.spread().is_integer_valued())
            throw DomainError("mps_battery: prop9 pairs must be integer-valued");
        for (double theta : thetas) {
            MpsVerdict v;
            v.label = pair.label();
            v.theta = theta;
            v.base_value = value(pair.base(), theta);
            v.spread_value = value(pair.spread(), theta);
            v.margin = v.base_value - v.spread_value;
            v.strict = variant != MpsVariant::prop9;
            v.pass = v.strict ? v.margin >= kStrictMargin : v.margin >= -kWeakSlack;
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::vector<MpsPair> mps_catalog(MpsVariant variant) {
    if (variant == MpsVariant::prop9) {
        auto point = [](std::size_t k) { return IntensityModel::integer(DiscretePMF::point_mass(k)); };
        auto two = [](std::size_t lo, std::size_t hi) {
            std::vector<double> p(hi + 1, 0.0);
            p[lo] += 0.5;
            p[hi] += 0.5;
            return IntensityModel::integer(DiscretePMF(std::move(p)));
        };
        return {
            mps_pair(point(2), spread::TwoPoint{1}),
            mps_pair(point(3), spread::TwoPoint{2}),
            mps_pair(point(4), spread::TwoPoint{2}),
            mps_pair(point(2), spread::TwoPoint{2}),
            make_mps_pair(two(1, 3), two(0, 4)),
            make_mps_pair(point(3), two(1, 5)),
        };
    }
    return {
        mps_pair(IntensityModel::degenerate(2.0), spread::TwoPoint{1.0}),
        mps_pair(IntensityModel::degenerate(3.0), spread::TwoPoint{2.0}),
        make_mps_pair(IntensityModel::degenerate(2.0), IntensityModel::gamma(1.0, 2.0)),
        make_mps_pair(IntensityModel::degenerate(1.0), IntensityModel::uniform(0.0, 2.0)),
        mps_pair(IntensityModel::gamma(4.0, 2.0), spread::GammaShapeDrop{1.0}),
        mps_pair(IntensityModel::gamma(2.0, 3.0), spread::GammaShapeDrop{0.5}),
        mps_pair(IntensityModel::uniform(1.0, 3.0), spread::UniformWiden{4.0}),
    };
}

ScalingReport scaling_experiment(const IntensityModel& G, const std::vector<double>& rhos, double theta) {
    ScalingReport r;
    r.pass = true;
    const double f1 = f_large(G, theta);
    for (double rho : rhos) {
        if (!(rho > 0.0)) throw DomainError("scaling_experiment: rho must be > 0");
        ScalingRow row;
        row.rho = rho;
        row.f = rho == 1.0 ? f1 : f_large(scale_model(G, rho), theta);
        row.difference = row.f - f1;
        const int want = (rho > 1.0) - (rho < 1.0);
        const int got = (row.difference > 0.0) - (row.difference < 0.0);
        row.sign_ok = want == got;
        r.pass = r.pass && row.sign_ok;
        r.rows.push_back(row);
    }
    return r;
}

CesProbe ces_condition_probe(const std::vector<std::pair<double, double>>& observations,
                             const std::vector<double>& gammas) {
    for (auto [d, theta] : observations)
        if (!(d > 0.0) || !(theta > 0.0)) throw DomainError("ces_condition_probe: observations must be positive");
    CesProbe probe;
    probe.degenerate_fit = observations.size() < 2;
    double best = std::numeric_limits<double>::infinity();
    for (double gamma : gammas) {
        CesGammaSummary s;
        s.gamma = gamma;
        double sum_sq = 0.0;
        for (auto [d, theta] : observations) {
            try {
                const double r = d - ces_scaling_dbar(theta, gamma);
                s.residuals.push_back(r);
                sum_sq += r * r;
                s.max_abs = std::max(s.max_abs, std::abs(r));
                ++s.used;
            } catch (const DomainError&) {
                s.residuals.push_back(std::numeric_limits<double>::quiet_NaN());
                ++s.excluded;
            }
        }
        s.mean_squared = s.used == 0 ? std::numeric_limits<double>::infinity() : sum_sq / static_cast<double>(s.used);
        if (s.used > 0 && s.mean_squared < best) {
            best = s.mean_squared;
            probe.best_gamma = gamma;
        }
        probe.profile.push_back(std::move(s));
    }
    return probe;
}

}  // namespace matchnet
