#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "matchnet/error.hpp"

namespace matchnet {

/// p_ij = p_i: one link probability per applicant, `vacancies` ex-ante identical vacancies.
struct ApplicantLinks {
    std::vector<double> p;
    std::size_t vacancies = 0;
};

/// p_ij = p_j: one link probability per vacancy (advertising intensity).
struct VacancyLinks {
    std::vector<double> p;
    std::size_t applicants = 0;
};

/// Applicants link to locations with p_ij = p_i; location j holds v_j vacancies.
struct LocationLinks {
    std::vector<double> p;
    std::vector<long> vacancies_per_location;
};

/// Full U x V (or U x L) matrix of link probabilities, row-major.
class LinkMatrix {
public:
    LinkMatrix(std::size_t rows, std::size_t cols, std::vector<double> p);
    static LinkMatrix constant(std::size_t rows, std::size_t cols, double p);
    static LinkMatrix from(const ApplicantLinks& spec);
    static LinkMatrix from(const VacancyLinks& spec);
    static LinkMatrix from(const LocationLinks& spec);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return p_[i * cols_ + j]; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> p_;
};

using FiniteMarketSpec = std::variant<ApplicantLinks, VacancyLinks, LocationLinks, LinkMatrix>;

/// Validates probabilities and sizes; throws DomainError.
void validate(const FiniteMarketSpec& spec);

/// Applicants (rows) and vacancies or locations (columns) of a spec.
std::size_t applicant_count(const FiniteMarketSpec& spec);
std::size_t column_count(const FiniteMarketSpec& spec);

/// Per-agent matching probabilities (f_i or q_j) and their arithmetic mean.
struct MatchProbabilities {
    std::vector<double> per_agent;
    double market_mean = 0.0;

    static MatchProbabilities from(std::vector<double> values);
};

/// f_i = 1 - (1 - p_i phi_i)^V with phi_i = E[1/(1+X)], X ~ PB(p_{-i}).
MatchProbabilities job_finding_exact(const ApplicantLinks& spec);

/// Complete network: 1 - (1 - 1/U)^V.
double urnball_f(std::size_t applicants, std::size_t vacancies);

/// q_j = (1 - (1-p_j)^U) psi_j, psi_j = E[1/(1+O)], O ~ PB(z_{-j}),
/// z_k = (1 - (1-p_k)^U) / U.
MatchProbabilities vacancy_fill_exact(const VacancyLinks& spec);

/// f_i = 1 - prod_j (1 - p_i phi_ij), phi_ij = E[min(1, v_j/(1+X))], X ~ PB(p_{-i}).
MatchProbabilities locations_job_finding_exact(const LocationLinks& spec);

inline constexpr std::size_t kApplicantOracleMaxLinks = 20;
inline constexpr std::size_t kVacancyOracleMaxLinks = 12;
inline constexpr std::size_t kLocationsOracleMaxLinks = 20;

/// Enumerates all 2^{UV} link realizations; each linked vacancy offers to one
/// of its applicants uniformly at random. Applicant matched = at least one offer.
MatchProbabilities brute_force_applicant(const LinkMatrix& links);

/// Enumerates realizations and every offer assignment; applicants accept one
/// offer uniformly at random. Returns per-vacancy fill probabilities.
MatchProbabilities brute_force_vacancy(const LinkMatrix& links);

/// Rows are applicants, columns are locations. Location j offers to
/// min(v_j, n_j) of its n_j applicants chosen uniformly.
MatchProbabilities brute_force_locations(const LinkMatrix& links, const std::vector<long>& vacancies_per_location);

struct AccountingReport {
    double mean_applicant_degree = 0.0;  // d_U
    double mean_column_degree = 0.0;     // d_V (or per-location degree)
    double tightness = 0.0;              // columns / applicants
    double residual = 0.0;               // |d_U - theta d_V|
};

AccountingReport accounting_check(const FiniteMarketSpec& spec);

}  // namespace matchnet
