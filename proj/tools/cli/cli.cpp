#include "cli.hpp"

#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "matchnet/error.hpp"
#include "matchnet/experiments.hpp"
#include "matchnet/large_market.hpp"
#include "matchnet/simulator.hpp"
#include "output.hpp"
#include "validation.hpp"

namespace matchnet::cli {

using nlohmann::json;

namespace {

struct Report {
    json doc;
    Table table;
    std::optional<json> sidecar;  // verdicts written next to a CSV
    int exit_code = kExitOk;
};

double need_theta(const RunConfig& cfg) {
    if (!cfg.market.theta) throw SchemaError("missing key 'theta' in market, expected a number");
    return *cfg.market.theta;
}

const IntensityModel& need_model(const std::optional<IntensityModel>& m, const char* key) {
    if (!m) throw SchemaError("missing key '" + std::string(key) + "' in market, expected an intensity model");
    return *m;
}

Table single_row(const json& doc) {
    Table t;
    std::vector<Cell> row;
    for (const auto& [key, value] : doc.items()) {
        t.header.push_back(key);
        if (value.is_number_unsigned()) row.emplace_back(value.get<std::uint64_t>());
        else if (value.is_number_integer()) row.emplace_back(value.get<std::int64_t>());
        else if (value.is_number()) row.emplace_back(value.get<double>());
        else if (value.is_boolean()) row.emplace_back(value.get<bool>());
        else if (value.is_null()) row.emplace_back(std::numeric_limits<double>::quiet_NaN());
        else if (value.is_string()) row.emplace_back(value.get<std::string>());
        else row.emplace_back(value.dump());
    }
    t.add(std::move(row));
    return t;
}

Report cmd_eval(const RunConfig& cfg) {
    Section m(cfg.model, "model");
    const std::string q = m.string("quantity");
    json doc;
    doc["quantity"] = q;
    if (q == "f_large") {
        m.only({"quantity"});
        const double theta = need_theta(cfg);
        const Bounded v = f_large_bounded(need_model(cfg.market.G, "G"), theta);
        doc["theta"] = theta;
        doc["value"] = v.value;
        doc["error_bound"] = v.error_bound;
    } else if (q == "q_large") {
        m.only({"quantity"});
        const double theta = need_theta(cfg);
        doc["theta"] = theta;
        doc["value"] = q_large(need_model(cfg.market.Ghat, "Ghat"), theta);
        doc["error_bound"] = 0.0;
    } else if (q == "f_locations") {
        m.only({"quantity"});
        const double theta = need_theta(cfg);
        const LocationsValue v = f_locations_large(need_model(cfg.market.G, "G"), need_model(cfg.market.H, "H"), theta);
        doc["theta"] = theta;
        doc["value"] = v.f;
        doc["chi"] = v.chi;
        doc["error_bound"] = v.error_bound;
    } else if (q == "frictionless") {
        m.only({"quantity"});
        const double theta = need_theta(cfg);
        doc["theta"] = theta;
        doc["value"] = frictionless_f(theta);
        doc["error_bound"] = 0.0;
    } else if (q == "taylor") {
        m.only({"quantity", "mean_intensity", "variance", "order"});
        const double theta = need_theta(cfg);
        double d = 0.0;
        std::optional<double> var = m.opt_number("variance");
        if (auto md = m.opt_number("mean_intensity")) {
            d = *md;
        } else {
            const IntensityModel& G = need_model(cfg.market.G, "G");
            d = mean(G);
            if (!var) {
                const Moment v = variance(G);
                if (v.finite) var = v.value;
            }
        }
        doc["theta"] = theta;
        doc["mean_intensity"] = d;
        doc["first_order"] = f_taylor1(d, theta);
        if (var) doc["second_order"] = f_taylor2(d, *var, theta);
        if (auto order = m.opt_unsigned("order")) {
            doc["order"] = *order;
            doc["series"] = f_taylor_series(need_model(cfg.market.G, "G"), theta, static_cast<int>(*order));
        }
    } else if (q == "dense") {
        m.only({"quantity"});
        const double theta = need_theta(cfg);
        doc["theta"] = theta;
        doc["value"] = f_dense(NormalizedModel::from(need_model(cfg.market.G, "G")), theta);
    } else if (q == "abundant") {
        m.only({"quantity", "mean_intensity"});
        const double d = m.number("mean_intensity");
        doc["mean_intensity"] = d;
        doc["value"] = f_abundant(NormalizedModel::from(need_model(cfg.market.G, "G")), d);
    } else if (q == "ces") {
        m.only({"quantity", "gamma"});
        const double theta = need_theta(cfg);
        const double gamma = m.number("gamma");
        doc["theta"] = theta;
        doc["gamma"] = gamma;
        doc["value"] = ces_f(theta, gamma);
        doc["scaling_mean_intensity"] = ces_scaling_dbar(theta, gamma);
    } else {
        throw SchemaError(
            "key 'quantity' in model must be one of f_large, q_large, f_locations, frictionless, taylor, dense, "
            "abundant, ces");
    }
    return {doc, single_row(doc), std::nullopt, kExitOk};
}

SimConfig sim_config(const RunConfig& cfg, Protocol protocol) {
    SimConfig c;
    c.protocol = protocol;
    c.replications = cfg.options.replications;
    c.seed = cfg.options.seed;
    c.workers = cfg.options.workers;
    const MarketSection& mk = cfg.market;
    if (mk.frictionless) {
        if (!mk.applicants) throw SchemaError("missing key 'applicants' in market, expected a non-negative integer");
        c.market = FiniteMarketSpec{frictionless_market(*mk.applicants, need_theta(cfg))};
    } else if (mk.finite) {
        c.market = *mk.finite;
    } else {
        if (!mk.applicants) throw SchemaError("missing key 'applicants' in market, expected a non-negative integer");
        c.market = LargeMarketRecipe{*mk.applicants, need_theta(cfg), mk.G, mk.Ghat, mk.H};
    }
    return c;
}

Report cmd_simulate(const RunConfig& cfg) {
    Section m(cfg.model, "model");
    m.only({"estimate", "protocol"});
    const std::string target = m.opt_string("estimate").value_or("f");
    if (target != "f" && target != "q") throw SchemaError("key 'estimate' in model must be \"f\" or \"q\"");
    const Protocol protocol =
        protocol_from_string(m.opt_string("protocol").value_or(target == "q" ? "vacancy_side" : "applicant_side"));
    const SimConfig c = sim_config(cfg, protocol);
    const SimEstimate e = target == "f" ? estimate_f(c) : estimate_q(c);
    json doc;
    doc["estimate_of"] = target;
    doc["protocol"] = to_string(protocol);
    doc["replications"] = c.replications;
    doc["estimate"] = e.estimate;
    doc["std_error"] = e.std_error;
    doc["n_observations"] = e.n_observations;
    doc["clamp_rate"] = e.clamp_rate;
    doc["seed"] = e.seed;
    return {doc, single_row(doc), std::nullopt, kExitOk};
}

FosdFamily fosd_family_from_json(const json& j) {
    Section s(j, "model.family");
    const std::string kind = s.string("kind");
    if (kind == "degenerate") {
        s.only({"kind", "means"});
        return sweep::Degenerate{s.numbers("means")};
    }
    if (kind == "gamma") {
        s.only({"kind", "shape", "means"});
        return sweep::Gamma{s.number("shape"), s.numbers("means")};
    }
    if (kind == "pareto") {
        s.only({"kind", "scale", "shapes"});
        return sweep::Pareto{s.number("scale"), s.numbers("shapes")};
    }
    if (kind == "uniform_proportional") {
        s.only({"kind", "means"});
        return sweep::UniformProportional{s.numbers("means")};
    }
    if (kind == "uniform_shift") {
        s.only({"kind", "width", "means"});
        return sweep::UniformShift{s.number("width"), s.numbers("means")};
    }
    if (kind == "uniform_fixed_lower") {
        s.only({"kind", "lower", "means"});
        return sweep::UniformFixedLower{s.number("lower"), s.numbers("means")};
    }
    throw SchemaError(
        "key 'kind' in model.family must be one of degenerate, gamma, pareto, uniform_proportional, uniform_shift, "
        "uniform_fixed_lower");
}

json verdict_json(const std::string& name, const FosdExperiment& e) {
    json v;
    v["case"] = name;
    v["shape"] = to_string(e.verdict.classification);
    v["gini_trend"] = to_string(e.gini_trend);
    v["margin"] = e.verdict.margin;
    v["argmax_param"] = e.verdict.argmax_param ? json(*e.verdict.argmax_param) : json(nullptr);
    return v;
}

void add_sweep_rows(Table& t, const std::string& name, const std::vector<SweepRow>& rows) {
    for (const auto& r : rows) t.add({name, r.param, r.mean_intensity, r.gini, r.f, r.theta, std::string("ok")});
}

Report cmd_sweep(const RunConfig& cfg) {
    Section m(cfg.model, "model");
    const std::string preset = m.string("preset");
    Report rep;
    const std::vector<std::string> sweep_header = {"case", "param", "d_bar_U", "gini", "f", "theta", "status"};

    if (preset == "table1") {
        m.only({"preset"});
        rep.table.header = sweep_header;
        json verdicts = json::array();
        bool all_match = true;
        for (const auto& c : table1_cases(cfg.options.refine)) {
            try {
                const FosdExperiment e = fosd_experiment(c.family, c.theta);
                add_sweep_rows(rep.table, c.name, e.rows);
                json v = verdict_json(c.name, e);
                v["expected_shape"] = to_string(c.expected_shape);
                v["expected_gini_trend"] = to_string(c.expected_gini);
                v["match"] = e.verdict.classification == c.expected_shape && e.gini_trend == c.expected_gini;
                all_match = all_match && v["match"].get<bool>();
                verdicts.push_back(std::move(v));
            } catch (const std::exception& ex) {
                rep.table.add({c.name, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                               std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                               c.theta, std::string(ex.what())});
                verdicts.push_back({{"case", c.name}, {"match", false}, {"error", ex.what()}});
                all_match = false;
            }
        }
        rep.sidecar = json{{"preset", preset}, {"verdicts", verdicts}, {"all_match", all_match}};
        rep.exit_code = all_match ? kExitOk : kExitValidation;
    } else if (preset == "fosd") {
        m.only({"preset", "family"});
        const FosdExperiment e = fosd_experiment(fosd_family_from_json(m.raw("family")), need_theta(cfg));
        rep.table.header = sweep_header;
        add_sweep_rows(rep.table, "fosd", e.rows);
        rep.sidecar = json{{"preset", preset}, {"verdicts", json::array({verdict_json("fosd", e)})}};
    } else if (preset == "figure2") {
        m.only({"preset", "scales", "thetas", "alphas"});
        const auto scales = m.opt_numbers("scales").value_or(std::vector<double>{1.0});
        const auto thetas = m.opt_numbers("thetas").value_or(std::vector<double>{0.5, 1.0, 2.0});
        auto alphas = m.opt_numbers("alphas");
        if (!alphas) {
            alphas = linspace(std::log(50.0), std::log(1.02), 200);
            for (double& a : *alphas) a = std::exp(a);
        }
        rep.table.header = {"x_m", "theta", "alpha", "d_bar_U", "f", "status"};
        for (const auto& c : figure2_surface(scales, thetas, *alphas))
            rep.table.add({c.scale, c.theta, c.alpha, c.mean_intensity, c.f, c.status});
    } else if (preset == "scaling") {
        m.only({"preset", "rhos"});
        const auto rhos = m.opt_numbers("rhos").value_or(std::vector<double>{0.5, 0.75, 1.0, 1.5, 2.0});
        const ScalingReport r = scaling_experiment(need_model(cfg.market.G, "G"), rhos, need_theta(cfg));
        rep.table.header = {"rho", "f", "difference", "sign_ok"};
        for (const auto& row : r.rows) rep.table.add({row.rho, row.f, row.difference, row.sign_ok});
        rep.sidecar = json{{"preset", preset}, {"sign_pattern_ok", r.pass}};
        rep.exit_code = r.pass ? kExitOk : kExitValidation;
    } else if (preset == "mps") {
        m.only({"preset", "variant", "thetas"});
        const MpsVariant v = mps_variant_from_string(m.string("variant"));
        const auto thetas = m.opt_numbers("thetas").value_or(std::vector<double>{0.5, 1.0, 2.0});
        std::optional<IntensityModel> companion = v == MpsVariant::prop8 ? cfg.market.H
                                                  : v == MpsVariant::prop9 ? cfg.market.G
                                                                           : std::nullopt;
        rep.table.header = {"pair", "theta", "base", "spread", "margin", "strict", "pass"};
        bool ok = true;
        for (const auto& r : mps_battery(mps_catalog(v), v, thetas, companion)) {
            rep.table.add({r.label, r.theta, r.base_value, r.spread_value, r.margin, r.strict, r.pass});
            ok = ok && r.pass;
        }
        rep.sidecar = json{{"preset", preset}, {"variant", to_string(v)}, {"all_pass", ok}};
        rep.exit_code = ok ? kExitOk : kExitValidation;
    } else if (preset == "ces_probe") {
        m.only({"preset", "observations", "gammas"});
        std::vector<std::pair<double, double>> obs;
        const json& raw = m.raw("observations");
        if (!raw.is_array()) throw SchemaError("key 'observations' in model must be an array of [d_bar_U, theta] pairs");
        for (const auto& o : raw) {
            if (!o.is_array() || o.size() != 2 || !o[0].is_number() || !o[1].is_number())
                throw SchemaError("key 'observations' in model must be an array of [d_bar_U, theta] pairs");
            obs.emplace_back(o[0].get<double>(), o[1].get<double>());
        }
        const auto gammas = m.opt_numbers("gammas").value_or(linspace(0.1, 2.0, 20));
        const CesProbe p = ces_condition_probe(obs, gammas);
        rep.table.header = {"gamma", "used", "excluded", "mean_squared", "max_abs"};
        for (const auto& s : p.profile)
            rep.table.add({s.gamma, static_cast<std::uint64_t>(s.used), static_cast<std::uint64_t>(s.excluded),
                           s.mean_squared, s.max_abs});
        rep.sidecar = json{{"preset", preset},
                           {"best_gamma", p.best_gamma ? json(*p.best_gamma) : json(nullptr)},
                           {"degenerate_fit", p.degenerate_fit}};
    } else {
        throw SchemaError("key 'preset' in model must be one of table1, fosd, figure2, scaling, mps, ces_probe");
    }
    rep.doc = json{{"preset", preset}, {"rows", rep.table.to_json()}};
    if (rep.sidecar) rep.doc["summary"] = *rep.sidecar;
    return rep;
}

Report cmd_validate(const RunConfig& cfg) {
    Section m(cfg.model, "model");
    m.only({"suite"});
    const std::string suite = m.opt_string("suite").value_or("all");
    const auto checks = run_suite(suite, {cfg.options.seed, cfg.options.workers});
    Report rep;
    rep.table.header = {"suite", "check", "pass", "detail"};
    json failures = json::array();
    for (const auto& c : checks) {
        rep.table.add({c.suite, c.name, c.pass, c.detail});
        if (!c.pass) failures.push_back(c.suite + "/" + c.name);
    }
    rep.doc = json{{"suite", suite}, {"pass", failures.empty()}, {"checks", rep.table.to_json()}, {"failures", failures}};
    rep.sidecar = json{{"failures", failures}};
    rep.exit_code = failures.empty() ? kExitOk : kExitValidation;
    return rep;
}

void emit(const Report& rep, const RunOptions& opt, std::ostream& out, std::ostream& err) {
    std::ofstream file;
    if (opt.out) {
        file.open(*opt.out, std::ios::binary);
        if (!file) throw SchemaError("cannot open output path '" + *opt.out + "'");
    }
    std::ostream& os = opt.out ? static_cast<std::ostream&>(file) : out;
    if (opt.format == Format::json) {
        os << rep.doc.dump(2) << '\n';
        return;
    }
    rep.table.write_csv(os);
    if (rep.sidecar) {
        if (opt.out) {
            std::ofstream side(*opt.out + ".summary.json", std::ios::binary);
            side << rep.sidecar->dump(2) << '\n';
        } else {
            err << rep.sidecar->dump(2) << '\n';
        }
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"matchnet: network matching functions"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> out_path;
    std::optional<std::string> format;
    for (const char* name : {"eval", "simulate", "sweep", "validate"}) {
        auto* sc = app.add_subcommand(name);
        sc->add_option("--config", config_path, "JSON run configuration")->required();
        sc->add_option("--seed", seed, "override options.seed");
        sc->add_option("--workers", workers, "override options.workers");
        sc->add_option("--out", out_path, "write the primary output here");
        sc->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw SchemaError("cannot read config file '" + config_path + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw SchemaError(std::string("config is not valid JSON: ") + e.what());
        }
        RunConfig cfg = parse_config(doc);
        if (cfg.command != command)
            throw SchemaError("key 'command' is \"" + cfg.command + "\" but the command line asks for " + command);
        if (seed) cfg.options.seed = *seed;
        if (workers) cfg.options.workers = *workers;
        if (out_path) cfg.options.out = *out_path;
        if (format) cfg.options.format = *format == "csv" ? Format::csv : Format::json;
        if (cfg.options.workers < 1) throw SchemaError("key 'workers' must be >= 1");

        Report rep = command == "eval"       ? cmd_eval(cfg)
                     : command == "simulate" ? cmd_simulate(cfg)
                     : command == "sweep"    ? cmd_sweep(cfg)
                                             : cmd_validate(cfg);
        emit(rep, cfg.options, out, err);
        if (rep.exit_code == kExitValidation) err << "validation failed\n";
        return rep.exit_code;
    } catch (const SchemaError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SizeGuardError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConstructionError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "numeric domain error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace matchnet::cli
