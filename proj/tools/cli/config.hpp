#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "matchnet/intensity.hpp"
#include "matchnet/simulator.hpp"
#include "matchnet/small_market.hpp"

namespace matchnet::cli {

enum class Format { csv, json };

struct RunOptions {
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::size_t replications = 100;
    std::size_t refine = 1;
    Format format = Format::json;
    std::optional<std::string> out;
};

struct MarketSection {
    std::optional<double> theta;
    std::optional<std::size_t> applicants;
    std::optional<IntensityModel> G;
    std::optional<IntensityModel> Ghat;
    std::optional<IntensityModel> H;
    std::optional<FiniteMarketSpec> finite;
    bool frictionless = false;
};

/// Parsed top-level document. `model` is kept as JSON and checked by each
/// command against its own key list.
struct RunConfig {
    std::string command;
    MarketSection market;
    nlohmann::json model = nlohmann::json::object();
    RunOptions options;
};

/// Throws SchemaError naming the offending key and the expected type.
RunConfig parse_config(const nlohmann::json& doc);

/// Key access helpers for the command-specific "model" object.
class Section {
public:
    Section(const nlohmann::json& j, std::string where);

    /// Rejects any key outside `allowed`.
    void only(std::initializer_list<const char*> allowed) const;

    bool has(const char* key) const;
    double number(const char* key) const;
    std::optional<double> opt_number(const char* key) const;
    std::string string(const char* key) const;
    std::optional<std::string> opt_string(const char* key) const;
    std::vector<double> numbers(const char* key) const;
    std::optional<std::vector<double>> opt_numbers(const char* key) const;
    std::uint64_t unsigned_int(const char* key) const;
    std::optional<std::uint64_t> opt_unsigned(const char* key) const;
    bool boolean(const char* key) const;
    const nlohmann::json& raw(const char* key) const;

private:
    const nlohmann::json& get(const char* key, const char* type) const;

    const nlohmann::json& j_;
    std::string where_;
};

FiniteMarketSpec finite_market_from_json(const nlohmann::json& j);

}  // namespace matchnet::cli
