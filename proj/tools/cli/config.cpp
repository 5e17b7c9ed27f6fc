#include "config.hpp"

#include <algorithm>
#include <cmath>

#include "matchnet/error.hpp"

namespace matchnet::cli {

using nlohmann::json;

Section::Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw SchemaError("'" + where_ + "' must be an object");
}

void Section::only(std::initializer_list<const char*> allowed) const {
    for (const auto& [key, value] : j_.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!ok) {
            std::string list;
            for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
            throw SchemaError("unknown key '" + key + "' in " + where_ + " (allowed: " + list + ")");
        }
    }
}

bool Section::has(const char* key) const { return j_.contains(key); }

const json& Section::get(const char* key, const char* type) const {
    if (!j_.contains(key)) throw SchemaError("missing key '" + std::string(key) + "' in " + where_ + ", expected " + type);
    return j_.at(key);
}

double Section::number(const char* key) const {
    const json& v = get(key, "a number");
    if (!v.is_number()) throw SchemaError("key '" + std::string(key) + "' in " + where_ + " must be a number");
    return v.get<double>();
}

std::optional<double> Section::opt_number(const char* key) const {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
}

std::string Section::string(const char* key) const {
    const json& v = get(key, "a string");
    if (!v.is_string()) throw SchemaError("key '" + std::string(key) + "' in " + where_ + " must be a string");
    return v.get<std::string>();
}

std::optional<std::string> Section::opt_string(const char* key) const {
    return has(key) ? std::optional<std::string>(string(key)) : std::nullopt;
}

std::vector<double> Section::numbers(const char* key) const {
    const json& v = get(key, "an array of numbers");
    const auto bad = [&] {
        return SchemaError("key '" + std::string(key) + "' in " + where_ + " must be an array of numbers");
    };
    if (!v.is_array()) throw bad();
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw bad();
        out.push_back(x.get<double>());
    }
    return out;
}

std::optional<std::vector<double>> Section::opt_numbers(const char* key) const {
    return has(key) ? std::optional<std::vector<double>>(numbers(key)) : std::nullopt;
}

std::uint64_t Section::unsigned_int(const char* key) const {
    const json& v = get(key, "a non-negative integer");
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw SchemaError("key '" + std::string(key) + "' in " + where_ + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::optional<std::uint64_t> Section::opt_unsigned(const char* key) const {
    return has(key) ? std::optional<std::uint64_t>(unsigned_int(key)) : std::nullopt;
}

bool Section::boolean(const char* key) const {
    const json& v = get(key, "a boolean");
    if (!v.is_boolean()) throw SchemaError("key '" + std::string(key) + "' in " + where_ + " must be a boolean");
    return v.get<bool>();
}

const json& Section::raw(const char* key) const { return get(key, "a value"); }

FiniteMarketSpec finite_market_from_json(const json& j) {
    Section s(j, "market.finite");
    const std::string kind = s.string("kind");
    if (kind == "applicant_links") {
        s.only({"kind", "p", "vacancies"});
        return ApplicantLinks{s.numbers("p"), s.unsigned_int("vacancies")};
    }
    if (kind == "vacancy_links") {
        s.only({"kind", "p", "applicants"});
        return VacancyLinks{s.numbers("p"), s.unsigned_int("applicants")};
    }
    if (kind == "location_links") {
        s.only({"kind", "p", "vacancies_per_location"});
        std::vector<long> v;
        for (double x : s.numbers("vacancies_per_location")) {
            if (x != std::floor(x) || x < 0.0)
                throw SchemaError("key 'vacancies_per_location' in market.finite must hold non-negative integers");
            v.push_back(static_cast<long>(x));
        }
        return LocationLinks{s.numbers("p"), std::move(v)};
    }
    if (kind == "matrix") {
        s.only({"kind", "rows", "cols", "p"});
        return LinkMatrix(s.unsigned_int("rows"), s.unsigned_int("cols"), s.numbers("p"));
    }
    throw SchemaError("key 'kind' in market.finite must be one of applicant_links, vacancy_links, location_links, matrix");
}

namespace {

std::optional<IntensityModel> opt_model(const Section& s, const json& j, const char* key) {
    if (!s.has(key)) return std::nullopt;
    try {
        return model_from_json(j.at(key));
    } catch (const SchemaError& e) {
        throw SchemaError("market." + std::string(key) + ": " + e.what());
    }
}

}  // namespace

RunConfig parse_config(const json& doc) {
    Section top(doc, "config");
    top.only({"command", "market", "model", "options"});
    RunConfig cfg;
    cfg.command = top.string("command");

    if (top.has("market")) {
        const json& m = doc.at("market");
        Section s(m, "market");
        s.only({"theta", "applicants", "G", "Ghat", "H", "finite", "frictionless"});
        cfg.market.theta = s.opt_number("theta");
        if (auto u = s.opt_unsigned("applicants")) cfg.market.applicants = static_cast<std::size_t>(*u);
        cfg.market.G = opt_model(s, m, "G");
        cfg.market.Ghat = opt_model(s, m, "Ghat");
        cfg.market.H = opt_model(s, m, "H");
        if (s.has("finite")) cfg.market.finite = finite_market_from_json(m.at("finite"));
        if (s.has("frictionless")) cfg.market.frictionless = s.boolean("frictionless");
    }

    if (top.has("model")) {
        cfg.model = doc.at("model");
        if (!cfg.model.is_object()) throw SchemaError("'model' must be an object");
    }

    if (top.has("options")) {
        Section s(doc.at("options"), "options");
        s.only({"seed", "workers", "replications", "refine", "format", "out"});
        if (auto v = s.opt_unsigned("seed")) cfg.options.seed = *v;
        if (auto v = s.opt_unsigned("workers")) cfg.options.workers = static_cast<std::size_t>(*v);
        if (auto v = s.opt_unsigned("replications")) cfg.options.replications = static_cast<std::size_t>(*v);
        if (auto v = s.opt_unsigned("refine")) cfg.options.refine = static_cast<std::size_t>(*v);
        if (auto f = s.opt_string("format")) {
            if (*f == "csv") cfg.options.format = Format::csv;
            else if (*f == "json") cfg.options.format = Format::json;
            else throw SchemaError("key 'format' in options must be \"csv\" or \"json\"");
        }
        cfg.options.out = s.opt_string("out");
    }
    return cfg;
}

}  // namespace matchnet::cli
