#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace matchnet::cli {

struct Check {
    std::string suite;
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SuiteSettings {
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

/// Exact formulas against the enumeration oracles.
std::vector<Check> oracle_suite();
/// Identities, closed forms, complete monotonicity, Table 1 and MPS batteries.
std::vector<Check> analytic_suite();
/// Monte Carlo estimates against large-market values.
std::vector<Check> simulation_suite(const SuiteSettings& settings);

/// suite: oracle | analytic | simulation | all. Throws SchemaError otherwise.
std::vector<Check> run_suite(const std::string& suite, const SuiteSettings& settings);

}  // namespace matchnet::cli
