#include "matchnet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>
#include <type_traits>

#include <boost/math/special_functions/gamma.hpp>

#include "matchnet/distributions.hpp"
#include "matchnet/rng.hpp"

namespace matchnet {

namespace {

// Stream purposes; each (seed, replication, purpose, agent) tuple owns a stream.
enum : std::uint64_t { kLinks = 1, kOffers = 2, kAccept = 3, kIntensity = 4, kCapacity = 5 };

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Indices j in [0, n) with Bernoulli(p) inclusion, via geometric gaps.
template <class Emit>
void bernoulli_run(double p, std::size_t n, CounterRng& rng, Emit&& emit) {
    if (p <= 0.0 || n == 0) return;
    if (p >= 1.0) {
        for (std::size_t j = 0; j < n; ++j) emit(j);
        return;
    }
    const double log_q = std::log1p(-p);
    double pos = -1.0;
    for (;;) {
        pos += 1.0 + std::floor(std::log(rng.uniform_open_closed()) / log_q);
        if (!(pos < static_cast<double>(n))) return;
        emit(static_cast<std::size_t>(pos));
    }
}

struct EdgeList {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // (row, col)
};

NetworkRealization to_realization(EdgeList&& e) {
    NetworkRealization net;
    net.applicants = e.rows;
    net.columns = e.cols;
    net.row_offsets.assign(e.rows + 1, 0);
    net.col_offsets.assign(e.cols + 1, 0);
    for (auto [i, j] : e.edges) {
        ++net.row_offsets[i + 1];
        ++net.col_offsets[j + 1];
    }
    std::partial_sum(net.row_offsets.begin(), net.row_offsets.end(), net.row_offsets.begin());
    std::partial_sum(net.col_offsets.begin(), net.col_offsets.end(), net.col_offsets.begin());
    net.row_adj.resize(e.edges.size());
    net.col_adj.resize(e.edges.size());
    std::vector<std::size_t> rpos(net.row_offsets.begin(), net.row_offsets.end() - 1);
    std::vector<std::size_t> cpos(net.col_offsets.begin(), net.col_offsets.end() - 1);
    // Stable bucketing keeps both adjacency lists sorted whatever order the edges arrived in.
    std::sort(e.edges.begin(), e.edges.end());
    for (auto [i, j] : e.edges) {
        net.row_adj[rpos[i]++] = j;
        net.col_adj[cpos[j]++] = i;
    }
    return net;
}

void check_index_range(std::size_t rows, std::size_t cols) {
    constexpr auto limit = std::numeric_limits<std::uint32_t>::max();
    if (rows > limit || cols > limit) throw DomainError("sample_network: market too large");
}

std::size_t vacancy_count(const LargeMarketRecipe& r) {
    return static_cast<std::size_t>(std::llround(r.theta * static_cast<double>(r.applicants)));
}

std::size_t location_count(const LargeMarketRecipe& r) {
    return static_cast<std::size_t>(std::llround(r.theta * static_cast<double>(r.applicants) / mean(*r.H)));
}

double pooled_se(double p, std::uint64_t n) {
    return n == 0 ? 0.0 : std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

struct Tally {
    std::uint64_t successes = 0;
    std::uint64_t observations = 0;
    std::uint64_t clamped = 0;
    std::uint64_t drawn = 0;
};

FiniteMarketSpec market_for(const SimConfig& config, std::uint64_t rep, Tally& t) {
    if (const auto* recipe = std::get_if<LargeMarketRecipe>(&config.market)) {
        RecipeDraw d = large_market_config(*recipe, config.seed, rep);
        t.clamped += d.clamped;
        t.drawn += d.drawn;
        return std::move(d.spec);
    }
    return std::get<FiniteMarketSpec>(config.market);
}

// Runs replications [0, R) across workers; each replication reduces to an
// integer tally, so the sum is independent of how reps are scheduled.
template <class PerRep>
Tally run_replications(const SimConfig& config, PerRep&& per_rep) {
    const std::size_t reps = config.replications;
    const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, reps));
    std::vector<Tally> partial(workers);
    auto body = [&](std::size_t w) {
        for (std::size_t r = w; r < reps; r += workers) per_rep(static_cast<std::uint64_t>(r), partial[w]);
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    body(w);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    Tally total;
    for (const auto& p : partial) {
        total.successes += p.successes;
        total.observations += p.observations;
        total.clamped += p.clamped;
        total.drawn += p.drawn;
    }
    return total;
}

SimEstimate finish(const Tally& t, std::uint64_t seed) {
    SimEstimate e;
    e.n_observations = t.observations;
    e.estimate = t.observations == 0 ? 0.0 : static_cast<double>(t.successes) / static_cast<double>(t.observations);
    e.std_error = pooled_se(e.estimate, t.observations);
    e.clamp_rate = t.drawn == 0 ? 0.0 : static_cast<double>(t.clamped) / static_cast<double>(t.drawn);
    e.seed = seed;
    return e;
}

}  // namespace

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::applicant_side: return "applicant_side";
        case Protocol::vacancy_side: return "vacancy_side";
        case Protocol::locations: return "locations";
    }
    return "?";
}

Protocol protocol_from_string(const std::string& s) {
    if (s == "applicant_side") return Protocol::applicant_side;
    if (s == "vacancy_side") return Protocol::vacancy_side;
    if (s == "locations") return Protocol::locations;
    throw DomainError("unknown protocol '" + s + "'");
}

void LargeMarketRecipe::validate() const {
    if (applicants < 10) throw DomainError("LargeMarketRecipe: need U >= 10");
    if (!(theta > 0.0 && std::isfinite(theta))) throw DomainError("LargeMarketRecipe: theta must be > 0");
    if (H) {
        if (!G) throw DomainError("LargeMarketRecipe: locations need G as well as H");
        if (Ghat) throw DomainError("LargeMarketRecipe: give either Ghat or (G, H), not both");
        if (!H->is_integer_valued()) throw DomainError("LargeMarketRecipe: H must be integer-valued");
        if (!(mean(*H) > 0.0)) throw DomainError("LargeMarketRecipe: H must have positive mean");
        if (location_count(*this) < 1) throw DomainError("LargeMarketRecipe: round(theta U / vbar) must be >= 1");
        return;
    }
    if (G && Ghat) throw DomainError("LargeMarketRecipe: give either G or Ghat, not both");
    if (!G && !Ghat) throw DomainError("LargeMarketRecipe: no intensity model");
    if (vacancy_count(*this) < 1) throw DomainError("LargeMarketRecipe: round(theta U) must be >= 1");
}

LocationLinks frictionless_market(std::size_t applicants, double theta) {
    if (applicants == 0 || !(theta > 0.0)) throw DomainError("frictionless_market: need U >= 1 and theta > 0");
    const long v = std::lround(theta * static_cast<double>(applicants));
    if (v < 1) throw DomainError("frictionless_market: round(theta U) must be >= 1");
    return LocationLinks{std::vector<double>(applicants, 1.0), {v}};
}

void SimConfig::validate() const {
    if (replications < 1) throw DomainError("SimConfig: replications must be >= 1");
    if (workers < 1) throw DomainError("SimConfig: workers must be >= 1");
    std::visit(overloaded{
                   [&](const FiniteMarketSpec& s) {
                       matchnet::validate(s);
                       const bool has_locations = std::holds_alternative<LocationLinks>(s);
                       if (has_locations != (protocol == Protocol::locations))
                           throw DomainError("SimConfig: protocol " + to_string(protocol) +
                                             " does not fit the market shape");
                   },
                   [&](const LargeMarketRecipe& r) {
                       r.validate();
                       if (r.H.has_value() != (protocol == Protocol::locations))
                           throw DomainError("SimConfig: protocol " + to_string(protocol) +
                                             " does not fit the market shape");
                   },
               },
               market);
}

NetworkRealization sample_network(const FiniteMarketSpec& spec, std::uint64_t seed, std::uint64_t replication) {
    validate(spec);
    EdgeList e;
    e.rows = applicant_count(spec);
    e.cols = column_count(spec);
    check_index_range(e.rows, e.cols);
    auto rng_for = [&](std::uint64_t agent) { return CounterRng::keyed({seed, replication, kLinks, agent}); };
    std::visit(overloaded{
                   [&](const ApplicantLinks& s) {
                       for (std::size_t i = 0; i < e.rows; ++i) {
                           auto rng = rng_for(i);
                           bernoulli_run(s.p[i], e.cols, rng, [&](std::size_t j) {
                               e.edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
                           });
                       }
                   },
                   [&](const LocationLinks& s) {
                       for (std::size_t i = 0; i < e.rows; ++i) {
                           auto rng = rng_for(i);
                           bernoulli_run(s.p[i], e.cols, rng, [&](std::size_t j) {
                               e.edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
                           });
                       }
                   },
                   [&](const VacancyLinks& s) {
                       for (std::size_t j = 0; j < e.cols; ++j) {
                           auto rng = rng_for(j);
                           bernoulli_run(s.p[j], e.rows, rng, [&](std::size_t i) {
                               e.edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
                           });
                       }
                   },
                   [&](const LinkMatrix& m) {
                       for (std::size_t i = 0; i < e.rows; ++i) {
                           auto rng = rng_for(i);
                           for (std::size_t j = 0; j < e.cols; ++j) {
                               const double p = m(i, j);
                               if (p >= 1.0 || (p > 0.0 && rng.uniform() < p))
                                   e.edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
                           }
                       }
                   },
               },
               spec);
    NetworkRealization net = to_realization(std::move(e));
    if (const auto* loc = std::get_if<LocationLinks>(&spec)) net.capacity = loc->vacancies_per_location;
    return net;
}

ProtocolOutcome run_protocol(const NetworkRealization& net, Protocol protocol, std::uint64_t seed,
                             std::uint64_t replication) {
    const bool has_capacity = !net.capacity.empty();
    if (has_capacity != (protocol == Protocol::locations))
        throw DomainError("run_protocol: protocol " + to_string(protocol) + " does not fit the network");

    ProtocolOutcome out;
    out.matched.assign(net.applicants, 0);

    if (protocol == Protocol::locations) {
        std::vector<std::uint32_t> pool;
        for (std::size_t j = 0; j < net.columns; ++j) {
            const std::size_t n = net.column_degree(j);
            const auto v = static_cast<std::size_t>(std::max(0L, net.capacity[j]));
            if (n == 0 || v == 0) continue;
            const auto first = net.col_adj.begin() + static_cast<std::ptrdiff_t>(net.col_offsets[j]);
            if (v >= n) {
                for (auto it = first; it != first + static_cast<std::ptrdiff_t>(n); ++it) out.matched[*it] = 1;
                continue;
            }
            pool.assign(first, first + static_cast<std::ptrdiff_t>(n));
            auto rng = CounterRng::keyed({seed, replication, kOffers, j});
            // Partial Fisher-Yates: the first v slots are a uniform v-subset.
            for (std::size_t k = 0; k < v; ++k) {
                const std::size_t pick = k + static_cast<std::size_t>(rng.below(n - k));
                std::swap(pool[k], pool[pick]);
                out.matched[pool[k]] = 1;
            }
        }
        return out;
    }

    // Each nonempty vacancy offers to one uniformly chosen linked applicant.
    constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> offer_to(net.columns, kNone);
    for (std::size_t j = 0; j < net.columns; ++j) {
        const std::size_t n = net.column_degree(j);
        if (n == 0) continue;
        auto rng = CounterRng::keyed({seed, replication, kOffers, j});
        const std::uint32_t i = net.col_adj[net.col_offsets[j] + rng.below(n)];
        offer_to[j] = i;
        out.matched[i] = 1;
    }
    if (protocol == Protocol::applicant_side) return out;

    // Applicants accept one of their offers uniformly. Offers are bucketed per
    // applicant in increasing vacancy order.
    std::vector<std::size_t> offsets(net.applicants + 1, 0);
    for (auto i : offer_to)
        if (i != kNone) ++offsets[i + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<std::uint32_t> offers(offsets.back());
    std::vector<std::size_t> pos(offsets.begin(), offsets.end() - 1);
    for (std::size_t j = 0; j < net.columns; ++j)
        if (offer_to[j] != kNone) offers[pos[offer_to[j]]++] = static_cast<std::uint32_t>(j);
    out.filled.assign(net.columns, 0);
    for (std::size_t i = 0; i < net.applicants; ++i) {
        const std::size_t n = offsets[i + 1] - offsets[i];
        if (n == 0) continue;
        std::size_t pick = 0;
        if (n > 1) {
            auto rng = CounterRng::keyed({seed, replication, kAccept, i});
            pick = static_cast<std::size_t>(rng.below(n));
        }
        out.filled[offers[offsets[i] + pick]] = 1;
    }
    return out;
}

RecipeDraw large_market_config(const LargeMarketRecipe& recipe, std::uint64_t seed, std::uint64_t replication) {
    recipe.validate();
    RecipeDraw d;
    auto probabilities = [&](const IntensityModel& model, std::size_t agents, double denominator) {
        std::vector<double> p(agents);
        for (std::size_t k = 0; k < agents; ++k) {
            auto rng = CounterRng::keyed({seed, replication, kIntensity, k});
            const double raw = sample(model, rng) / denominator;
            if (raw > 1.0) ++d.clamped;
            p[k] = std::min(1.0, raw);
        }
        d.drawn += agents;
        return p;
    };
    const std::size_t U = recipe.applicants;
    if (recipe.H) {
        const std::size_t L = location_count(recipe);
        std::vector<long> v(L);
        for (std::size_t j = 0; j < L; ++j) {
            auto rng = CounterRng::keyed({seed, replication, kCapacity, j});
            v[j] = std::lround(sample(*recipe.H, rng));
        }
        d.spec = LocationLinks{probabilities(*recipe.G, U, static_cast<double>(L)), std::move(v)};
    } else if (recipe.Ghat) {
        const std::size_t V = vacancy_count(recipe);
        d.spec = VacancyLinks{probabilities(*recipe.Ghat, V, static_cast<double>(U)), U};
    } else {
        const std::size_t V = vacancy_count(recipe);
        d.spec = ApplicantLinks{probabilities(*recipe.G, U, static_cast<double>(V)), V};
    }
    return d;
}

SimEstimate estimate_f(const SimConfig& config) {
    config.validate();
    const Tally t = run_replications(config, [&](std::uint64_t rep, Tally& tally) {
        const FiniteMarketSpec spec = market_for(config, rep, tally);
        const NetworkRealization net = sample_network(spec, config.seed, rep);
        const ProtocolOutcome out = run_protocol(net, config.protocol, config.seed, rep);
        tally.observations += out.matched.size();
        for (auto m : out.matched) tally.successes += m;
    });
    return finish(t, config.seed);
}

SimEstimate estimate_q(const SimConfig& config) {
    config.validate();
    if (config.protocol != Protocol::vacancy_side)
        throw DomainError("estimate_q: fill rates are only defined under the vacancy_side protocol");
    const Tally t = run_replications(config, [&](std::uint64_t rep, Tally& tally) {
        const FiniteMarketSpec spec = market_for(config, rep, tally);
        const NetworkRealization net = sample_network(spec, config.seed, rep);
        const ProtocolOutcome out = run_protocol(net, config.protocol, config.seed, rep);
        tally.observations += out.filled.size();
        for (auto f : out.filled) tally.successes += f;
    });
    return finish(t, config.seed);
}

namespace {

// Adds the law of one agent's degree, weighted by `weight`, to `expected`.
void accumulate(std::vector<double>& expected, double& tail, const DiscretePMF& pmf) {
    if (expected.size() < pmf.size()) expected.resize(pmf.size(), 0.0);
    for (std::size_t k = 0; k < pmf.size(); ++k) expected[k] += pmf[k];
    tail += pmf.truncation_mass();
}

std::vector<double> row_probabilities(const FiniteMarketSpec& spec, std::size_t i) {
    const std::size_t cols = column_count(spec);
    return std::visit(overloaded{
                          [&](const ApplicantLinks& s) { return std::vector<double>(cols, s.p[i]); },
                          [&](const LocationLinks& s) { return std::vector<double>(cols, s.p[i]); },
                          [&](const VacancyLinks& s) { return s.p; },
                          [&](const LinkMatrix& m) {
                              std::vector<double> r(cols);
                              for (std::size_t j = 0; j < cols; ++j) r[j] = m(i, j);
                              return r;
                          },
                      },
                      spec);
}

std::vector<double> column_probabilities(const FiniteMarketSpec& spec, std::size_t j) {
    const std::size_t rows = applicant_count(spec);
    return std::visit(overloaded{
                          [&](const ApplicantLinks& s) { return s.p; },
                          [&](const LocationLinks& s) { return s.p; },
                          [&](const VacancyLinks& s) { return std::vector<double>(rows, s.p[j]); },
                          [&](const LinkMatrix& m) {
                              std::vector<double> c(rows);
                              for (std::size_t i = 0; i < rows; ++i) c[i] = m(i, j);
                              return c;
                          },
                      },
                      spec);
}

// Expected degree law of one network, summed over the agents on one side.
void expected_counts(const FiniteMarketSpec& spec, DegreeSide which, bool poisson_rows, std::vector<double>& expected,
                     double& tail) {
    const std::size_t agents = which == DegreeSide::applicant ? applicant_count(spec) : column_count(spec);
    const bool shared = which == DegreeSide::applicant ? std::holds_alternative<VacancyLinks>(spec)
                                                       : !std::holds_alternative<LinkMatrix>(spec) &&
                                                             !std::holds_alternative<VacancyLinks>(spec);
    if (which == DegreeSide::applicant && poisson_rows) {
        const double cols = static_cast<double>(column_count(spec));
        const auto& p = std::holds_alternative<ApplicantLinks>(spec) ? std::get<ApplicantLinks>(spec).p
                                                                     : std::get<LocationLinks>(spec).p;
        for (std::size_t i = 0; i < agents; ++i) accumulate(expected, tail, poisson_pmf(p[i] * cols));
        return;
    }
    if (shared) {
        // Every agent on this side faces the same probability vector.
        const auto p = which == DegreeSide::applicant ? row_probabilities(spec, 0) : column_probabilities(spec, 0);
        const DiscretePMF pmf = poisson_binomial_pmf(p);
        std::vector<double> scaled(pmf.probs().begin(), pmf.probs().end());
        if (expected.size() < scaled.size()) expected.resize(scaled.size(), 0.0);
        for (std::size_t k = 0; k < scaled.size(); ++k) expected[k] += static_cast<double>(agents) * scaled[k];
        return;
    }
    for (std::size_t a = 0; a < agents; ++a) {
        const auto p = which == DegreeSide::applicant ? row_probabilities(spec, a) : column_probabilities(spec, a);
        accumulate(expected, tail, poisson_binomial_pmf(p));
    }
}

}  // namespace

GofResult degree_gof(const SimConfig& config, DegreeSide which, std::size_t n_networks) {
    config.validate();
    if (n_networks < 1) throw DomainError("degree_gof: need at least one network");
    const bool recipe = std::holds_alternative<LargeMarketRecipe>(config.market);
    const bool poisson_rows = recipe && which == DegreeSide::applicant &&
                              !std::get<LargeMarketRecipe>(config.market).Ghat.has_value();

    std::vector<double> expected;
    double tail = 0.0;
    std::vector<std::uint64_t> observed;
    std::uint64_t n_obs = 0;
    for (std::size_t r = 0; r < n_networks; ++r) {
        Tally unused;
        const FiniteMarketSpec spec = market_for(config, r, unused);
        const NetworkRealization net = sample_network(spec, config.seed, r);
        expected_counts(spec, which, poisson_rows, expected, tail);
        const std::size_t agents = which == DegreeSide::applicant ? net.applicants : net.columns;
        for (std::size_t a = 0; a < agents; ++a) {
            const std::size_t d = which == DegreeSide::applicant ? net.applicant_degree(a) : net.column_degree(a);
            if (observed.size() <= d) observed.resize(d + 1, 0);
            ++observed[d];
        }
        n_obs += agents;
    }

    // Observed degrees beyond the reference support fall into the open last bin.
    if (observed.size() > expected.size()) expected.resize(observed.size(), 0.0);
    expected.back() += tail;
    std::vector<double> e_bins;
    std::vector<double> o_bins;
    double e_acc = 0.0;
    double o_acc = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        e_acc += expected[k];
        o_acc += k < observed.size() ? static_cast<double>(observed[k]) : 0.0;
        if (e_acc >= 5.0) {
            e_bins.push_back(e_acc);
            o_bins.push_back(o_acc);
            e_acc = o_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (e_bins.empty()) throw DomainError("degree_gof: expected counts too small to form a bin");
        e_bins.back() += e_acc;
        o_bins.back() += o_acc;
    }
    if (e_bins.size() < 2) throw DomainError("degree_gof: fewer than two bins with expected count >= 5");

    GofResult g;
    g.bins = e_bins.size();
    g.dof = g.bins - 1;
    g.observations = n_obs;
    for (std::size_t b = 0; b < e_bins.size(); ++b) {
        const double diff = o_bins[b] - e_bins[b];
        g.statistic += diff * diff / e_bins[b];
    }
    g.p_value = boost::math::gamma_q(0.5 * static_cast<double>(g.dof), 0.5 * g.statistic);
    return g;
}

}  // namespace matchnet
