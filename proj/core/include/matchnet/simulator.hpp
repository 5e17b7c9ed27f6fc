#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "matchnet/intensity.hpp"
#include "matchnet/small_market.hpp"

namespace matchnet {

enum class Protocol { applicant_side, vacancy_side, locations };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

/// Finite proxy for a large market with U applicants and tightness theta.
/// Exactly one shape is used:
///   G only       -> V = round(theta U) vacancies, p_i = min(1, d_i / V)
///   Ghat         -> p_j = min(1, d_j / U) for each of the V vacancies
///   G and H      -> L = round(theta U / vbar) locations with v_j ~ H, p_i = min(1, d_i / L)
/// Intensities are redrawn for every replication.
struct LargeMarketRecipe {
    std::size_t applicants = 0;
    double theta = 1.0;
    std::optional<IntensityModel> G;
    std::optional<IntensityModel> Ghat;
    std::optional<IntensityModel> H;

    void validate() const;
};

/// Single location holding round(theta U) vacancies, every applicant linked.
LocationLinks frictionless_market(std::size_t applicants, double theta);

using SimMarket = std::variant<FiniteMarketSpec, LargeMarketRecipe>;

struct SimConfig {
    SimMarket market;
    Protocol protocol = Protocol::applicant_side;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    void validate() const;
};

struct SimEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t n_observations = 0;
    double clamp_rate = 0.0;
    std::uint64_t seed = 0;
};

/// Bipartite graph between applicants (rows) and vacancies or locations
/// (columns), stored as adjacency in both directions.
struct NetworkRealization {
    std::size_t applicants = 0;
    std::size_t columns = 0;
    std::vector<std::size_t> row_offsets;  // size applicants + 1
    std::vector<std::uint32_t> row_adj;
    std::vector<std::size_t> col_offsets;  // size columns + 1
    std::vector<std::uint32_t> col_adj;
    std::vector<long> capacity;  // vacancies per location; empty unless the market has locations

    std::size_t edge_count() const noexcept { return row_adj.size(); }
    std::size_t applicant_degree(std::size_t i) const { return row_offsets[i + 1] - row_offsets[i]; }
    std::size_t column_degree(std::size_t j) const { return col_offsets[j + 1] - col_offsets[j]; }
};

/// Draws every link independently with its link probability. Rows are
/// sampled with geometric skipping, so sparse networks cost O(edges).
NetworkRealization sample_network(const FiniteMarketSpec& spec, std::uint64_t seed, std::uint64_t replication);

struct ProtocolOutcome {
    std::vector<std::uint8_t> matched;  // per applicant
    std::vector<std::uint8_t> filled;   // per vacancy; empty for applicant_side and locations
};

/// One-shot offer round. Throws DomainError when the protocol does not fit the
/// network (locations without capacities, or vice versa).
ProtocolOutcome run_protocol(const NetworkRealization& net, Protocol protocol, std::uint64_t seed,
                             std::uint64_t replication);

struct RecipeDraw {
    FiniteMarketSpec spec;
    std::size_t clamped = 0;
    std::size_t drawn = 0;

    double clamp_rate() const noexcept { return drawn == 0 ? 0.0 : static_cast<double>(clamped) / drawn; }
};

/// Draws the per-agent intensities of one replication and converts them into
/// link probabilities.
RecipeDraw large_market_config(const LargeMarketRecipe& recipe, std::uint64_t seed, std::uint64_t replication = 0);

/// Pooled fraction of matched applicants over replications x applicants.
SimEstimate estimate_f(const SimConfig& config);
/// Pooled fraction of filled vacancies; requires the vacancy_side protocol.
SimEstimate estimate_q(const SimConfig& config);

enum class DegreeSide { applicant, vacancy };

struct GofResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
    std::size_t bins = 0;
    std::uint64_t observations = 0;
};

/// Pearson chi-square of the pooled degree histogram against the analytic law:
/// the Poisson-binomial law of each agent's row or column for finite specs,
/// Poisson(p_i V) per applicant for large-market recipes. Bins are merged
/// left to right until each expected count reaches 5; throws DomainError if
/// fewer than two bins survive.
GofResult degree_gof(const SimConfig& config, DegreeSide which, std::size_t n_networks);

}  // namespace matchnet
