#include "matchnet/small_market.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "matchnet/distributions.hpp"
#include "numeric.hpp"

namespace matchnet {

namespace {

void check_probabilities(const std::vector<double>& p, const char* where) {
    for (double x : p)
        if (!(x >= 0.0 && x <= 1.0))
            throw DomainError(std::string(where) + ": link probability " + std::to_string(x) + " outside [0,1]");
}

std::vector<double> without(const std::vector<double>& p, std::size_t skip) {
    std::vector<double> out;
    out.reserve(p.size() - 1);
    for (std::size_t k = 0; k < p.size(); ++k)
        if (k != skip) out.push_back(p[k]);
    return out;
}

// 1 - (1 - x)^n, accurate for small x.
double one_minus_pow_complement(double x, double n) {
    if (x >= 1.0) return n > 0.0 ? 1.0 : 0.0;
    return -std::expm1(n * std::log1p(-x));
}

}  // namespace

LinkMatrix::LinkMatrix(std::size_t rows, std::size_t cols, std::vector<double> p)
    : rows_(rows), cols_(cols), p_(std::move(p)) {
    if (p_.size() != rows_ * cols_) throw DomainError("LinkMatrix: size mismatch");
    check_probabilities(p_, "LinkMatrix");
}

LinkMatrix LinkMatrix::constant(std::size_t rows, std::size_t cols, double p) {
    return LinkMatrix(rows, cols, std::vector<double>(rows * cols, p));
}

LinkMatrix LinkMatrix::from(const ApplicantLinks& spec) {
    std::vector<double> p;
    for (double pi : spec.p) p.insert(p.end(), spec.vacancies, pi);
    return LinkMatrix(spec.p.size(), spec.vacancies, std::move(p));
}

LinkMatrix LinkMatrix::from(const VacancyLinks& spec) {
    std::vector<double> p;
    for (std::size_t i = 0; i < spec.applicants; ++i) p.insert(p.end(), spec.p.begin(), spec.p.end());
    return LinkMatrix(spec.applicants, spec.p.size(), std::move(p));
}

LinkMatrix LinkMatrix::from(const LocationLinks& spec) {
    return from(ApplicantLinks{spec.p, spec.vacancies_per_location.size()});
}

void validate(const FiniteMarketSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ApplicantLinks>) {
                if (s.p.empty() || s.vacancies == 0) throw DomainError("ApplicantLinks: need U >= 1 and V >= 1");
                check_probabilities(s.p, "ApplicantLinks");
            } else if constexpr (std::is_same_v<T, VacancyLinks>) {
                if (s.p.empty() || s.applicants == 0) throw DomainError("VacancyLinks: need U >= 1 and V >= 1");
                check_probabilities(s.p, "VacancyLinks");
            } else if constexpr (std::is_same_v<T, LocationLinks>) {
                if (s.p.empty() || s.vacancies_per_location.empty())
                    throw DomainError("LocationLinks: need U >= 1 and L >= 1");
                check_probabilities(s.p, "LocationLinks");
                for (long v : s.vacancies_per_location)
                    if (v < 0) throw DomainError("LocationLinks: vacancies per location must be >= 0");
            } else {
                if (s.rows() == 0 || s.cols() == 0) throw DomainError("LinkMatrix: need at least one row and column");
            }
        },
        spec);
}

std::size_t applicant_count(const FiniteMarketSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, VacancyLinks>) return s.applicants;
            else if constexpr (std::is_same_v<T, LinkMatrix>) return s.rows();
            else return s.p.size();
        },
        spec);
}

std::size_t column_count(const FiniteMarketSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ApplicantLinks>) return s.vacancies;
            else if constexpr (std::is_same_v<T, VacancyLinks>) return s.p.size();
            else if constexpr (std::is_same_v<T, LocationLinks>) return s.vacancies_per_location.size();
            else return s.cols();
        },
        spec);
}

MatchProbabilities MatchProbabilities::from(std::vector<double> values) {
    detail::KahanSum s;
    for (double v : values) s += v;
    const double m = values.empty() ? 0.0 : s.value() / static_cast<double>(values.size());
    return {std::move(values), m};
}

MatchProbabilities job_finding_exact(const ApplicantLinks& spec) {
    validate(spec);
    const double V = static_cast<double>(spec.vacancies);
    std::vector<double> f(spec.p.size());
    for (std::size_t i = 0; i < spec.p.size(); ++i) {
        const auto others = without(spec.p, i);
        const double phi = expect_reciprocal_one_plus(poisson_binomial_pmf(others)).value;
        f[i] = one_minus_pow_complement(spec.p[i] * phi, V);
    }
    return MatchProbabilities::from(std::move(f));
}

double urnball_f(std::size_t applicants, std::size_t vacancies) {
    if (applicants == 0) throw DomainError("urnball_f: need U >= 1");
    return one_minus_pow_complement(1.0 / static_cast<double>(applicants), static_cast<double>(vacancies));
}

MatchProbabilities vacancy_fill_exact(const VacancyLinks& spec) {
    validate(spec);
    const double U = static_cast<double>(spec.applicants);
    std::vector<double> reach(spec.p.size());  // P(vacancy has >= 1 applicant)
    std::vector<double> z(spec.p.size());      // P(a given applicant gets this vacancy's offer)
    for (std::size_t k = 0; k < spec.p.size(); ++k) {
        reach[k] = one_minus_pow_complement(spec.p[k], U);
        z[k] = reach[k] / U;
    }
    std::vector<double> q(spec.p.size());
    for (std::size_t j = 0; j < spec.p.size(); ++j) {
        const double psi = expect_reciprocal_one_plus(poisson_binomial_pmf(without(z, j))).value;
        q[j] = reach[j] * psi;
    }
    return MatchProbabilities::from(std::move(q));
}

MatchProbabilities locations_job_finding_exact(const LocationLinks& spec) {
    validate(spec);
    std::vector<double> f(spec.p.size());
    for (std::size_t i = 0; i < spec.p.size(); ++i) {
        const DiscretePMF rivals = poisson_binomial_pmf(without(spec.p, i));
        // Locations with equal capacity share phi; cache per distinct v.
        std::vector<std::pair<long, double>> cache;
        double log_miss = 0.0;
        for (long v : spec.vacancies_per_location) {
            if (v == 0) continue;
            auto it = std::find_if(cache.begin(), cache.end(), [v](const auto& c) { return c.first == v; });
            double phi;
            if (it != cache.end()) {
                phi = it->second;
            } else {
                phi = expect_min_capacity(rivals, v).value;
                cache.emplace_back(v, phi);
            }
            const double miss = 1.0 - spec.p[i] * phi;
            if (miss <= 0.0) {
                log_miss = -std::numeric_limits<double>::infinity();
                break;
            }
            log_miss += std::log(miss);
        }
        f[i] = -std::expm1(log_miss);
    }
    return MatchProbabilities::from(std::move(f));
}

// ---- enumeration oracles -----------------------------------------------

namespace {

/// Visits every realization of the link matrix with its probability weight.
/// Cells with p in {0,1} are fixed; the rest are walked in Gray-code order so
/// each step flips one link and updates the degree counts incrementally.
template <class Visit>
void enumerate_realizations(const LinkMatrix& links, std::size_t guard, const char* who, Visit&& visit) {
    const std::size_t rows = links.rows();
    const std::size_t cols = links.cols();
    if (rows * cols > guard)
        throw SizeGuardError(std::string(who) + ": U*V = " + std::to_string(rows * cols) + " exceeds the guard " +
                             std::to_string(guard));

    std::vector<char> present(rows * cols, 0);
    std::vector<int> row_degree(rows, 0);
    std::vector<int> col_degree(cols, 0);
    std::vector<std::size_t> free_cells;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double p = links(i, j);
            if (p == 1.0) {
                present[i * cols + j] = 1;
                ++row_degree[i];
                ++col_degree[j];
            } else if (p > 0.0) {
                free_cells.push_back(i * cols + j);
            }
        }
    }

    auto weight = [&] {
        double w = 1.0;
        for (std::size_t c : free_cells) {
            const double p = links(c / cols, c % cols);
            w *= present[c] ? p : 1.0 - p;
        }
        return w;
    };

    const std::uint64_t total = std::uint64_t{1} << free_cells.size();
    visit(present, row_degree, col_degree, weight());
    for (std::uint64_t step = 1; step < total; ++step) {
        const std::size_t bit = static_cast<std::size_t>(std::countr_zero(step));
        const std::size_t c = free_cells[bit];
        const int delta = present[c] ? -1 : 1;
        present[c] = static_cast<char>(!present[c]);
        row_degree[c / cols] += delta;
        col_degree[c % cols] += delta;
        visit(present, row_degree, col_degree, weight());
    }
}

}  // namespace

MatchProbabilities brute_force_applicant(const LinkMatrix& links) {
    const std::size_t rows = links.rows();
    const std::size_t cols = links.cols();
    std::vector<detail::KahanSum> acc(rows);
    enumerate_realizations(links, kApplicantOracleMaxLinks, "brute_force_applicant",
                           [&](const std::vector<char>& present, const std::vector<int>&, const std::vector<int>& col_degree,
                               double w) {
                               if (w == 0.0) return;
                               for (std::size_t i = 0; i < rows; ++i) {
                                   double miss = 1.0;
                                   for (std::size_t j = 0; j < cols; ++j)
                                       if (present[i * cols + j]) miss *= 1.0 - 1.0 / col_degree[j];
                                   acc[i] += w * (1.0 - miss);
                               }
                           });
    std::vector<double> f(rows);
    for (std::size_t i = 0; i < rows; ++i) f[i] = acc[i].value();
    return MatchProbabilities::from(std::move(f));
}

MatchProbabilities brute_force_vacancy(const LinkMatrix& links) {
    const std::size_t rows = links.rows();
    const std::size_t cols = links.cols();
    std::vector<detail::KahanSum> acc(cols);
    std::vector<std::vector<std::size_t>> applicants(cols);
    std::vector<std::size_t> choice(cols);
    std::vector<int> offers(rows);
    std::vector<double> conditional(cols);

    enumerate_realizations(
        links, kVacancyOracleMaxLinks, "brute_force_vacancy",
        [&](const std::vector<char>& present, const std::vector<int>&, const std::vector<int>& col_degree, double w) {
            if (w == 0.0) return;
            std::vector<std::size_t> active;
            for (std::size_t j = 0; j < cols; ++j) {
                applicants[j].clear();
                for (std::size_t i = 0; i < rows; ++i)
                    if (present[i * cols + j]) applicants[j].push_back(i);
                if (!applicants[j].empty()) active.push_back(j);
            }
            std::fill(conditional.begin(), conditional.end(), 0.0);
            double assignment_prob = 1.0;
            for (std::size_t j : active) assignment_prob /= col_degree[j];
            // Mixed-radix walk over every (vacancy -> applicant) offer assignment.
            std::fill(choice.begin(), choice.end(), 0);
            while (true) {
                std::fill(offers.begin(), offers.end(), 0);
                for (std::size_t j : active) ++offers[applicants[j][choice[j]]];
                for (std::size_t j : active) conditional[j] += assignment_prob / offers[applicants[j][choice[j]]];
                std::size_t pos = 0;
                while (pos < active.size()) {
                    const std::size_t j = active[pos];
                    if (++choice[j] < applicants[j].size()) break;
                    choice[j] = 0;
                    ++pos;
                }
                if (pos == active.size()) break;
            }
            for (std::size_t j = 0; j < cols; ++j) acc[j] += w * conditional[j];
        });
    std::vector<double> q(cols);
    for (std::size_t j = 0; j < cols; ++j) q[j] = acc[j].value();
    return MatchProbabilities::from(std::move(q));
}

MatchProbabilities brute_force_locations(const LinkMatrix& links, const std::vector<long>& vacancies_per_location) {
    const std::size_t rows = links.rows();
    const std::size_t cols = links.cols();
    if (vacancies_per_location.size() != cols)
        throw DomainError("brute_force_locations: need one capacity per location column");
    for (long v : vacancies_per_location)
        if (v < 0) throw DomainError("brute_force_locations: capacities must be >= 0");
    std::vector<detail::KahanSum> acc(rows);
    enumerate_realizations(links, kLocationsOracleMaxLinks, "brute_force_locations",
                           [&](const std::vector<char>& present, const std::vector<int>&, const std::vector<int>& col_degree,
                               double w) {
                               if (w == 0.0) return;
                               for (std::size_t i = 0; i < rows; ++i) {
                                   double miss = 1.0;
                                   for (std::size_t j = 0; j < cols; ++j) {
                                       if (!present[i * cols + j]) continue;
                                       const double offer = std::min(
                                           1.0, static_cast<double>(vacancies_per_location[j]) / col_degree[j]);
                                       miss *= 1.0 - offer;
                                   }
                                   acc[i] += w * (1.0 - miss);
                               }
                           });
    std::vector<double> f(rows);
    for (std::size_t i = 0; i < rows; ++i) f[i] = acc[i].value();
    return MatchProbabilities::from(std::move(f));
}

AccountingReport accounting_check(const FiniteMarketSpec& spec) {
    validate(spec);
    const double U = static_cast<double>(applicant_count(spec));
    const double C = static_cast<double>(column_count(spec));
    // Row route: sum over applicants of expected degree. Column route: sum
    // over vacancies (locations) of expected degree.
    detail::KahanSum rows;
    detail::KahanSum columns;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, VacancyLinks>) {
                double per_applicant = 0.0;
                for (double p : s.p) per_applicant += p;
                for (std::size_t i = 0; i < s.applicants; ++i) rows += per_applicant;
                for (double p : s.p) columns += p * U;
            } else if constexpr (std::is_same_v<T, LinkMatrix>) {
                for (std::size_t i = 0; i < s.rows(); ++i)
                    for (std::size_t j = 0; j < s.cols(); ++j) rows += s(i, j);
                for (std::size_t j = 0; j < s.cols(); ++j)
                    for (std::size_t i = 0; i < s.rows(); ++i) columns += s(i, j);
            } else {
                double per_column = 0.0;
                for (double p : s.p) {
                    rows += p * C;
                    per_column += p;
                }
                for (std::size_t j = 0; j < static_cast<std::size_t>(C); ++j) columns += per_column;
            }
        },
        spec);
    AccountingReport r;
    r.mean_applicant_degree = rows.value() / U;
    r.mean_column_degree = columns.value() / C;
    r.tightness = C / U;
    r.residual = std::abs(r.mean_applicant_degree - r.tightness * r.mean_column_degree);
    return r;
}

}  // namespace matchnet
