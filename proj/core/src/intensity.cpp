#include "matchnet/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "matchnet/rng.hpp"
#include "numeric.hpp"

namespace matchnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

void validate(const IntensityModel::Family& f) {
    std::visit(overloaded{
                   [](const family::Degenerate& d) {
                       if (!(d.value >= 0.0 && std::isfinite(d.value)))
                           throw DomainError("Degenerate: value must be finite and >= 0");
                   },
                   [](const family::Exponential& e) {
                       if (!positive_finite(e.mean)) throw DomainError("Exponential: mean must be > 0");
                   },
                   [](const family::Gamma& g) {
                       if (!positive_finite(g.shape)) throw DomainError("Gamma: shape must be > 0");
                       if (!positive_finite(g.mean)) throw DomainError("Gamma: mean must be > 0");
                   },
                   [](const family::Pareto& p) {
                       if (!positive_finite(p.scale)) throw DomainError("Pareto: scale must be > 0");
                       if (!(p.shape > 1.0 && std::isfinite(p.shape)))
                           throw DomainError("Pareto: shape must be > 1 for a finite mean");
                   },
                   [](const family::Uniform& u) {
                       if (!(u.lower >= 0.0 && u.upper > u.lower && std::isfinite(u.upper)))
                           throw DomainError("Uniform: need 0 <= lower < upper");
                   },
                   [](const family::PointMixture& m) {
                       if (m.values.empty() || m.values.size() != m.weights.size())
                           throw DomainError("PointMixture: values and weights must be non-empty and equal length");
                       double total = 0.0;
                       for (std::size_t i = 0; i < m.values.size(); ++i) {
                           if (!(m.values[i] >= 0.0 && std::isfinite(m.values[i])))
                               throw DomainError("PointMixture: values must be finite and >= 0");
                           if (!(m.weights[i] >= 0.0)) throw DomainError("PointMixture: weights must be >= 0");
                           total += m.weights[i];
                       }
                       if (std::abs(total - 1.0) > 1e-12) throw DomainError("PointMixture: weights must sum to 1");
                   },
                   [](const family::Integer&) {},
               },
               f);
}

double gamma_scale(const family::Gamma& g) { return g.mean / g.shape; }

}  // namespace

IntensityModel::IntensityModel(Family f) : family_(std::move(f)) { validate(family_); }

std::string IntensityModel::name() const {
    std::ostringstream os;
    os.precision(6);
    std::visit(overloaded{
                   [&](const family::Degenerate& d) { os << "Degenerate(" << d.value << ")"; },
                   [&](const family::Exponential& e) { os << "Exponential(mean=" << e.mean << ")"; },
                   [&](const family::Gamma& g) { os << "Gamma(shape=" << g.shape << ", mean=" << g.mean << ")"; },
                   [&](const family::Pareto& p) { os << "Pareto(scale=" << p.scale << ", shape=" << p.shape << ")"; },
                   [&](const family::Uniform& u) { os << "Uniform(" << u.lower << ", " << u.upper << ")"; },
                   [&](const family::PointMixture& m) {
                       os << "PointMixture{";
                       for (std::size_t i = 0; i < m.values.size(); ++i)
                           os << (i ? ", " : "") << m.values[i] << ":" << m.weights[i];
                       os << "}";
                   },
                   [&](const family::Integer& h) { os << "Integer(mean=" << h.pmf.mean() << ")"; },
               },
               family_);
    return os.str();
}

bool IntensityModel::is_atomic() const noexcept {
    return std::holds_alternative<family::Degenerate>(family_) ||
           std::holds_alternative<family::PointMixture>(family_) || std::holds_alternative<family::Integer>(family_);
}

bool IntensityModel::is_degenerate() const noexcept {
    if (std::holds_alternative<family::Degenerate>(family_)) return true;
    if (!is_atomic()) return false;
    const auto a = atoms();
    return std::count_if(a.begin(), a.end(), [](const auto& p) { return p.second > 0.0; }) == 1;
}

bool IntensityModel::is_integer_valued() const noexcept {
    if (std::holds_alternative<family::Integer>(family_)) return true;
    if (!is_atomic()) return false;
    for (auto [v, w] : atoms()) {
        if (w > 0.0 && v != std::floor(v)) return false;
    }
    return true;
}

double IntensityModel::support_lower() const {
    return std::visit(overloaded{
                          [](const family::Pareto& p) { return p.scale; },
                          [](const family::Uniform& u) { return u.lower; },
                          [&](const auto&) {
                              if (!is_atomic()) return 0.0;
                              for (auto [v, w] : atoms())
                                  if (w > 0.0) return v;
                              return 0.0;
                          },
                      },
                      family_);
}

double IntensityModel::support_upper() const {
    return std::visit(overloaded{
                          [](const family::Uniform& u) { return u.upper; },
                          [](const family::Exponential&) { return kInf; },
                          [](const family::Gamma&) { return kInf; },
                          [](const family::Pareto&) { return kInf; },
                          [&](const auto&) {
                              double hi = 0.0;
                              for (auto [v, w] : atoms())
                                  if (w > 0.0) hi = v;
                              return hi;
                          },
                      },
                      family_);
}

std::vector<std::pair<double, double>> IntensityModel::atoms() const {
    std::vector<std::pair<double, double>> out;
    if (const auto* d = std::get_if<family::Degenerate>(&family_)) {
        out.emplace_back(d->value, 1.0);
    } else if (const auto* m = std::get_if<family::PointMixture>(&family_)) {
        for (std::size_t i = 0; i < m->values.size(); ++i) out.emplace_back(m->values[i], m->weights[i]);
        std::sort(out.begin(), out.end());
    } else if (const auto* h = std::get_if<family::Integer>(&family_)) {
        const auto probs = h->pmf.probs();
        for (std::size_t k = 0; k < probs.size(); ++k) out.emplace_back(static_cast<double>(k), probs[k]);
    } else {
        throw DomainError("atoms(): " + name() + " is not atomic");
    }
    return out;
}

double IntensityModel::pdf(double x) const {
    return std::visit(overloaded{
                          [&](const family::Exponential& e) { return x < 0.0 ? 0.0 : std::exp(-x / e.mean) / e.mean; },
                          [&](const family::Gamma& g) {
                              if (x <= 0.0) return 0.0;
                              const double theta = gamma_scale(g);
                              return boost::math::gamma_p_derivative(g.shape, x / theta) / theta;
                          },
                          [&](const family::Pareto& p) {
                              if (x < p.scale) return 0.0;
                              return p.shape / p.scale * std::pow(p.scale / x, p.shape + 1.0);
                          },
                          [&](const family::Uniform& u) {
                              return (x < u.lower || x > u.upper) ? 0.0 : 1.0 / (u.upper - u.lower);
                          },
                          [&](const auto&) -> double { throw DomainError("pdf(): " + name() + " has no density"); },
                      },
                      family_);
}

// ---- transforms and moments ---------------------------------------------

namespace {

Bounded pareto_mgf_quadrature(const family::Pareto& p, double s) {
    // x = scale * e^t turns the density into alpha e^{-alpha t}, so
    // M = alpha int_0^inf exp(-c e^t - alpha t) dt,  c = s * scale.
    // The integrand turns over near t = -log c; split there. For small c the
    // complement 1 - M is integrated instead, since M is close to 1.
    const double c = s * p.scale;
    const double a = p.shape;
    const double knee = c < 1.0 ? -std::log(c) : 0.0;
    Bounded head{0.0, 0.0}, tail{0.0, 0.0};
    if (c < 1.0) {
        auto gap = [&](double t) { return -std::expm1(-c * std::exp(t)) * std::exp(-a * t); };
        head = detail::integrate(gap, 0.0, knee);
        tail = detail::integrate(gap, knee, kInf);
        return {1.0 - a * (head.value + tail.value), a * (head.error_bound + tail.error_bound)};
    }
    auto integrand = [&](double t) { return std::exp(-c * std::exp(t) - a * t); };
    tail = detail::integrate(integrand, knee, kInf);
    return {a * tail.value, a * tail.error_bound};
}

}  // namespace

Bounded mgf_neg_bounded(const IntensityModel& model, double s) {
    if (!(s >= 0.0)) throw DomainError("mgf_neg: argument s must be >= 0");
    if (s == 0.0) return {1.0, 0.0};
    return std::visit(overloaded{
                          [&](const family::Degenerate& d) { return Bounded{std::exp(-s * d.value), 0.0}; },
                          [&](const family::Exponential& e) { return Bounded{1.0 / (1.0 + s * e.mean), 0.0}; },
                          [&](const family::Gamma& g) {
                              return Bounded{std::exp(-g.shape * std::log1p(s * g.mean / g.shape)), 0.0};
                          },
                          [&](const family::Pareto& p) { return pareto_mgf_quadrature(p, s); },
                          [&](const family::Uniform& u) {
                              const double w = s * (u.upper - u.lower);
                              const double ratio =
                                  w < 1e-8 ? 1.0 - w / 2.0 + w * w / 6.0 - w * w * w / 24.0 : -std::expm1(-w) / w;
                              return Bounded{std::exp(-s * u.lower) * ratio, 0.0};
                          },
                          [&](const auto&) {
                              detail::KahanSum acc;
                              for (auto [v, w] : model.atoms()) acc += w * std::exp(-s * v);
                              double err = 0.0;
                              if (const auto* h = std::get_if<family::Integer>(&model.family()))
                                  err = h->pmf.truncation_mass();
                              return Bounded{acc.value(), err};
                          },
                      },
                      model.family());
}

double mgf_neg(const IntensityModel& model, double s) { return mgf_neg_bounded(model, s).value; }

double pareto_mgf_incomplete_gamma(double scale, double shape, double s) {
    if (!(s > 0.0)) return 1.0;
    const double z = scale * s;
    // Upper incomplete gamma at a = -shape, reached by the downward recurrence
    // Gamma(a, z) = (Gamma(a + 1, z) - z^a e^{-z}) / a from a0 in [0, 1).
    const double n_steps = std::ceil(shape);
    double a = n_steps - shape;
    double upper;
    if (a == 0.0) {
        upper = boost::math::expint(1, z);
    } else {
        upper = boost::math::tgamma(a, z);
    }
    // When shape is an integer a starts at 0 and we step shape times.
    const int steps = static_cast<int>(n_steps);
    for (int i = 0; i < steps; ++i) {
        a -= 1.0;
        upper = (upper - std::exp(a * std::log(z) - z)) / a;
    }
    return shape * std::pow(z, shape) * upper;
}

double mean(const IntensityModel& model) {
    return std::visit(overloaded{
                          [](const family::Degenerate& d) { return d.value; },
                          [](const family::Exponential& e) { return e.mean; },
                          [](const family::Gamma& g) { return g.mean; },
                          [](const family::Pareto& p) { return p.scale * p.shape / (p.shape - 1.0); },
                          [](const family::Uniform& u) { return 0.5 * (u.lower + u.upper); },
                          [](const family::PointMixture& m) {
                              detail::KahanSum s;
                              for (std::size_t i = 0; i < m.values.size(); ++i) s += m.values[i] * m.weights[i];
                              return s.value();
                          },
                          [](const family::Integer& h) { return h.pmf.mean(); },
                      },
                      model.family());
}

namespace {

double atomic_central_moment(const IntensityModel& model, int order) {
    const double mu = mean(model);
    detail::KahanSum s;
    for (auto [v, w] : model.atoms()) s += w * std::pow(v - mu, order);
    return s.value();
}

// Central moments from cumulants: mu_n = sum_{j=0}^{n-2} C(n-1, j) kappa_{n-j} mu_j.
double gamma_central_moment(double shape, double scale, int order) {
    std::vector<long double> kappa(order + 1, 0.0L);
    long double fact = 1.0L;  // (n-1)!
    for (int n = 1; n <= order; ++n) {
        if (n > 1) fact *= static_cast<long double>(n - 1);
        kappa[n] = static_cast<long double>(shape) * fact * std::pow(static_cast<long double>(scale), n);
    }
    kappa[1] = 0.0L;
    std::vector<long double> mu(order + 1, 0.0L);
    mu[0] = 1.0L;
    for (int n = 2; n <= order; ++n) {
        long double acc = 0.0L;
        long double binom = 1.0L;  // C(n-1, j)
        for (int j = 0; j <= n - 2; ++j) {
            acc += binom * kappa[n - j] * mu[j];
            binom = binom * static_cast<long double>(n - 1 - j) / static_cast<long double>(j + 1);
        }
        mu[n] = acc;
    }
    return static_cast<double>(mu[order]);
}

}  // namespace

Moment central_moment(const IntensityModel& model, int order) {
    if (order < 0) throw DomainError("central_moment: order must be >= 0");
    if (order == 0) return {true, 1.0};
    if (order == 1) return {true, 0.0};
    return std::visit(overloaded{
                          [&](const family::Degenerate&) { return Moment{true, 0.0}; },
                          [&](const family::Exponential& e) { return Moment{true, gamma_central_moment(1.0, e.mean, order)}; },
                          [&](const family::Gamma& g) {
                              return Moment{true, gamma_central_moment(g.shape, gamma_scale(g), order)};
                          },
                          [&](const family::Pareto& p) {
                              if (p.shape <= static_cast<double>(order)) return Moment::infinite();
                              const long double mu = mean(model);
                              long double acc = 0.0L;
                              long double binom = 1.0L;
                              for (int j = 0; j <= order; ++j) {
                                  const long double raw = j == 0 ? 1.0L
                                                                 : static_cast<long double>(p.shape) *
                                                                       std::pow(static_cast<long double>(p.scale), j) /
                                                                       (static_cast<long double>(p.shape) - j);
                                  acc += binom * raw * std::pow(-mu, order - j);
                                  binom = binom * (order - j) / (j + 1);
                              }
                              return Moment{true, static_cast<double>(acc)};
                          },
                          [&](const family::Uniform& u) {
                              if (order % 2 == 1) return Moment{true, 0.0};
                              const double h = 0.5 * (u.upper - u.lower);
                              return Moment{true, std::pow(h, order) / (order + 1)};
                          },
                          [&](const auto&) { return Moment{true, atomic_central_moment(model, order)}; },
                      },
                      model.family());
}

Moment variance(const IntensityModel& model) { return central_moment(model, 2); }

double gini(const IntensityModel& model) {
    const double mu = mean(model);
    if (!(mu > 0.0)) throw DomainError("gini: requires a positive mean");
    return std::visit(overloaded{
                          [](const family::Degenerate&) { return 0.0; },
                          [](const family::Pareto& p) { return 1.0 / (2.0 * p.shape - 1.0); },
                          [](const family::Uniform& u) { return (u.upper - u.lower) / (3.0 * (u.upper + u.lower)); },
                          [&](const family::Exponential&) -> double {
                              // E|X-Y| = 2 int F (1 - F) dx.
                              auto f = [&](double x) {
                                  const double F = cdf(model, x);
                                  return F * (1.0 - F);
                              };
                              return detail::integrate(f, 0.0, kInf, 1e-12).value / mu;
                          },
                          [&](const family::Gamma& g) -> double {
                              // Upper tail from gamma_q so 1 - F keeps its digits.
                              const double s = gamma_scale(g);
                              auto f = [&](double x) {
                                  return boost::math::gamma_p(g.shape, x / s) * boost::math::gamma_q(g.shape, x / s);
                              };
                              const double m = g.mean;
                              return (detail::integrate_endpoint(f, 0.0, m, 1e-12).value +
                                      detail::integrate(f, m, kInf, 1e-12).value) /
                                     mu;
                          },
                          [&](const auto&) {
                              const auto a = model.atoms();
                              detail::KahanSum acc;
                              double F = 0.0;
                              for (std::size_t i = 0; i + 1 < a.size(); ++i) {
                                  F += a[i].second;
                                  acc += F * (1.0 - F) * (a[i + 1].first - a[i].first);
                              }
                              return acc.value() / mu;
                          },
                      },
                      model.family());
}

double cdf(const IntensityModel& model, double x) {
    return std::visit(overloaded{
                          [&](const family::Degenerate& d) { return x >= d.value ? 1.0 : 0.0; },
                          [&](const family::Exponential& e) { return x <= 0.0 ? 0.0 : -std::expm1(-x / e.mean); },
                          [&](const family::Gamma& g) {
                              return x <= 0.0 ? 0.0 : boost::math::gamma_p(g.shape, x / gamma_scale(g));
                          },
                          [&](const family::Pareto& p) {
                              return x < p.scale ? 0.0 : -std::expm1(p.shape * std::log(p.scale / x));
                          },
                          [&](const family::Uniform& u) {
                              if (x <= u.lower) return 0.0;
                              if (x >= u.upper) return 1.0;
                              return (x - u.lower) / (u.upper - u.lower);
                          },
                          [&](const auto&) {
                              double F = 0.0;
                              for (auto [v, w] : model.atoms())
                                  if (v <= x) F += w;
                              return std::min(F, 1.0);
                          },
                      },
                      model.family());
}

double quantile(const IntensityModel& model, double u) {
    if (!(u >= 0.0 && u < 1.0)) throw DomainError("quantile: level must be in [0, 1)");
    return std::visit(overloaded{
                          [&](const family::Degenerate& d) { return d.value; },
                          [&](const family::Exponential& e) { return -e.mean * std::log1p(-u); },
                          [&](const family::Gamma& g) {
                              return u == 0.0 ? 0.0 : gamma_scale(g) * boost::math::gamma_p_inv(g.shape, u);
                          },
                          [&](const family::Pareto& p) { return p.scale * std::exp(-std::log1p(-u) / p.shape); },
                          [&](const family::Uniform& un) { return un.lower + u * (un.upper - un.lower); },
                          [&](const auto&) {
                              const auto a = model.atoms();
                              double F = 0.0;
                              for (auto [v, w] : a) {
                                  F += w;
                                  if (w > 0.0 && F > u) return v;
                              }
                              for (auto it = a.rbegin(); it != a.rend(); ++it)
                                  if (it->second > 0.0) return it->first;
                              return a.back().first;
                          },
                      },
                      model.family());
}

double sample(const IntensityModel& model, CounterRng& rng) { return quantile(model, rng.uniform()); }

double integrated_cdf(const IntensityModel& model, double x) {
    return std::visit(overloaded{
                          [&](const family::Exponential& e) { return x <= 0.0 ? 0.0 : x + e.mean * std::expm1(-x / e.mean); },
                          [&](const family::Gamma& g) {
                              if (x <= 0.0) return 0.0;
                              const double t = x / gamma_scale(g);
                              return x * boost::math::gamma_p(g.shape, t) - g.mean * boost::math::gamma_p(g.shape + 1.0, t);
                          },
                          [&](const family::Pareto& p) {
                              if (x <= p.scale) return 0.0;
                              const double F = cdf(model, x);
                              const double partial =
                                  p.shape * p.scale / (p.shape - 1.0) * -std::expm1((p.shape - 1.0) * std::log(p.scale / x));
                              return x * F - partial;
                          },
                          [&](const family::Uniform& u) {
                              if (x <= u.lower) return 0.0;
                              if (x >= u.upper) return x - 0.5 * (u.lower + u.upper);
                              return (x - u.lower) * (x - u.lower) / (2.0 * (u.upper - u.lower));
                          },
                          [&](const auto&) {
                              detail::KahanSum acc;
                              for (auto [v, w] : model.atoms())
                                  if (v < x) acc += w * (x - v);
                              return acc.value();
                          },
                      },
                      model.family());
}

IntensityModel scale_model(const IntensityModel& model, double rho) {
    if (!(rho > 0.0 && std::isfinite(rho))) throw DomainError("scale_model: rho must be > 0");
    if (rho == 1.0) return model;
    return std::visit(overloaded{
                          [&](const family::Degenerate& d) { return IntensityModel::degenerate(rho * d.value); },
                          [&](const family::Exponential& e) { return IntensityModel::exponential(rho * e.mean); },
                          [&](const family::Gamma& g) { return IntensityModel::gamma(g.shape, rho * g.mean); },
                          [&](const family::Pareto& p) { return IntensityModel::pareto(rho * p.scale, p.shape); },
                          [&](const family::Uniform& u) { return IntensityModel::uniform(rho * u.lower, rho * u.upper); },
                          [&](const auto&) {
                              std::vector<double> values;
                              std::vector<double> weights;
                              for (auto [v, w] : model.atoms()) {
                                  values.push_back(rho * v);
                                  weights.push_back(w);
                              }
                              // Integer laws may carry truncation mass; fold it into the last atom.
                              const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
                              weights.back() += 1.0 - total;
                              return IntensityModel::point_mixture(std::move(values), std::move(weights));
                          },
                      },
                      model.family());
}

NormalizedModel NormalizedModel::from(const IntensityModel& model) {
    const double mu = mean(model);
    if (!(mu > 0.0)) throw ConstructionError("NormalizedModel: model has zero mean");
    return assume_normalized(scale_model(model, 1.0 / mu));
}

NormalizedModel NormalizedModel::assume_normalized(const IntensityModel& model) {
    const double mu = mean(model);
    if (std::abs(mu - 1.0) > 1e-12)
        throw ConstructionError("NormalizedModel: mean is " + std::to_string(mu) + ", expected 1");
    return NormalizedModel(model);
}

// ---- FOSD sweeps -------------------------------------------------------

namespace {

IntensityModel build_or_throw(const IntensityModel::Family& f) {
    try {
        return IntensityModel(f);
    } catch (const DomainError& e) {
        throw ConstructionError(std::string("fosd_sweep: invalid grid point: ") + e.what());
    }
}

double upper_probe(const IntensityModel& m) { return quantile(m, 1.0 - 1e-6); }

}  // namespace

std::vector<SweepPoint> fosd_sweep(const FosdFamily& fam) {
    std::vector<SweepPoint> points;
    std::visit(overloaded{
                   [&](const sweep::Degenerate& s) {
                       for (double m : s.means) points.push_back({m, build_or_throw(family::Degenerate{m})});
                   },
                   [&](const sweep::Gamma& s) {
                       for (double m : s.means) points.push_back({m, build_or_throw(family::Gamma{s.shape, m})});
                   },
                   [&](const sweep::Pareto& s) {
                       for (double a : s.shapes) points.push_back({a, build_or_throw(family::Pareto{s.scale, a})});
                   },
                   [&](const sweep::UniformProportional& s) {
                       for (double m : s.means) points.push_back({m, build_or_throw(family::Uniform{0.5 * m, 1.5 * m})});
                   },
                   [&](const sweep::UniformShift& s) {
                       for (double m : s.means)
                           points.push_back({m, build_or_throw(family::Uniform{m - 0.5 * s.width, m + 0.5 * s.width})});
                   },
                   [&](const sweep::UniformFixedLower& s) {
                       for (double m : s.means)
                           points.push_back({m, build_or_throw(family::Uniform{s.lower, 2.0 * m - s.lower})});
                   },
               },
               fam);
    std::stable_sort(points.begin(), points.end(),
                     [](const SweepPoint& a, const SweepPoint& b) { return mean(a.model) < mean(b.model); });

    constexpr std::size_t kGrid = 1000;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto& lo = points[i].model;
        const auto& hi = points[i + 1].model;
        if (!(mean(hi) > mean(lo))) throw ConstructionError("fosd_sweep: duplicate mean in grid");
        const double upper = std::max(upper_probe(lo), upper_probe(hi));
        for (std::size_t g = 0; g <= kGrid; ++g) {
            const double x = upper * static_cast<double>(g) / kGrid;
            if (cdf(hi, x) > cdf(lo, x) + 1e-10) {
                throw ConstructionError("fosd_sweep: " + hi.name() + " does not dominate " + lo.name() + " at x=" +
                                        std::to_string(x));
            }
        }
    }
    return points;
}

// ---- SOSD -------------------------------------------------------------

SosdReport verify_sosd(const IntensityModel& base, const IntensityModel& spread, std::size_t grid_size) {
    SosdReport r;
    const double mu = mean(base);
    r.mean_gap = mean(spread) - mu;
    r.grid_upper = std::max(upper_probe(base), upper_probe(spread));
    r.min_integrated_gap = 0.0;
    auto check = [&](double x) {
        const double gap = integrated_cdf(spread, x) - integrated_cdf(base, x);
        r.min_integrated_gap = std::min(r.min_integrated_gap, gap);
    };
    const std::size_t n = std::max<std::size_t>(grid_size, 2);
    for (std::size_t g = 0; g <= n; ++g) check(r.grid_upper * static_cast<double>(g) / static_cast<double>(n));
    for (const auto* m : {&base, &spread}) {
        if (m->is_atomic())
            for (auto [v, w] : m->atoms())
                if (w > 0.0) check(v);
    }
    r.pass = std::abs(r.mean_gap) <= 1e-10 * std::max(1.0, mu) && r.min_integrated_gap >= -1e-10;
    return r;
}

std::string MpsPair::label() const { return base_.name() + " -> " + spread_.name(); }

MpsPair make_mps_pair(const IntensityModel& base, const IntensityModel& spread) {
    SosdReport r = verify_sosd(base, spread);
    if (!r.pass) {
        std::ostringstream os;
        os << "make_mps_pair: " << spread.name() << " is not a mean-preserving spread of " << base.name()
           << " (mean gap " << r.mean_gap << ", min integrated gap " << r.min_integrated_gap << ")";
        throw ConstructionError(os.str());
    }
    return MpsPair(base, spread, r);
}

MpsPair mps_pair(const IntensityModel& base, const SpreadKind& kind) {
    return std::visit(
        overloaded{
            [&](const spread::TwoPoint& k) {
                if (!base.is_degenerate()) throw ConstructionError("two-point spread needs a degenerate base");
                const double d = mean(base);
                if (!(k.eps > 0.0) || d - k.eps < 0.0)
                    throw ConstructionError("two-point spread: need 0 < eps <= centre");
                if (base.is_integer_valued() && std::holds_alternative<family::Integer>(base.family())) {
                    if (k.eps != std::floor(k.eps)) throw ConstructionError("two-point spread: integer base needs integer eps");
                    const auto hi = static_cast<std::size_t>(d + k.eps);
                    std::vector<double> probs(hi + 1, 0.0);
                    probs[static_cast<std::size_t>(d - k.eps)] += 0.5;
                    probs[hi] += 0.5;
                    return make_mps_pair(base, IntensityModel::integer(DiscretePMF(std::move(probs))));
                }
                return make_mps_pair(base, IntensityModel::point_mixture({d - k.eps, d + k.eps}, {0.5, 0.5}));
            },
            [&](const spread::GammaShapeDrop& k) {
                const auto* g = std::get_if<family::Gamma>(&base.family());
                if (!g) throw ConstructionError("gamma shape drop needs a Gamma base");
                if (!(k.new_shape > 0.0 && k.new_shape < g->shape))
                    throw ConstructionError("gamma shape drop: need 0 < new shape < shape");
                return make_mps_pair(base, IntensityModel::gamma(k.new_shape, g->mean));
            },
            [&](const spread::UniformWiden& k) {
                const auto* u = std::get_if<family::Uniform>(&base.family());
                if (!u) throw ConstructionError("uniform widening needs a Uniform base");
                const double centre = 0.5 * (u->lower + u->upper);
                if (!(k.new_width > u->upper - u->lower) || centre - 0.5 * k.new_width < 0.0)
                    throw ConstructionError("uniform widening: need a wider support that stays non-negative");
                return make_mps_pair(base,
                                     IntensityModel::uniform(centre - 0.5 * k.new_width, centre + 0.5 * k.new_width));
            },
        },
        kind);
}

// ---- JSON --------------------------------------------------------------

nlohmann::json to_json(const IntensityModel& model) {
    using nlohmann::json;
    return std::visit(overloaded{
                          [](const family::Degenerate& d) { return json{{"family", "degenerate"}, {"params", {{"value", d.value}}}}; },
                          [](const family::Exponential& e) { return json{{"family", "exponential"}, {"params", {{"mean", e.mean}}}}; },
                          [](const family::Gamma& g) {
                              return json{{"family", "gamma"}, {"params", {{"shape", g.shape}, {"mean", g.mean}}}};
                          },
                          [](const family::Pareto& p) {
                              return json{{"family", "pareto"}, {"params", {{"scale", p.scale}, {"shape", p.shape}}}};
                          },
                          [](const family::Uniform& u) {
                              return json{{"family", "uniform"}, {"params", {{"lower", u.lower}, {"upper", u.upper}}}};
                          },
                          [](const family::PointMixture& m) {
                              return json{{"family", "point_mixture"}, {"params", {{"values", m.values}, {"weights", m.weights}}}};
                          },
                          [](const family::Integer& h) {
                              std::vector<double> probs(h.pmf.probs().begin(), h.pmf.probs().end());
                              return json{{"family", "integer"},
                                          {"params", {{"probs", probs}, {"truncation_mass", h.pmf.truncation_mass()}}}};
                          },
                      },
                      model.family());
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw SchemaError(where + ": missing key '" + key + "'");
    return obj.at(key);
}

double number(const nlohmann::json& obj, const std::string& key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_number()) throw SchemaError(where + ": key '" + key + "' must be a number");
    return v.get<double>();
}

std::vector<double> number_array(const nlohmann::json& obj, const std::string& key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_array()) throw SchemaError(where + ": key '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw SchemaError(where + ": key '" + key + "' must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

void only_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw SchemaError(where + ": unknown key '" + key + "'");
    }
}

}  // namespace

IntensityModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("model: expected an object {\"family\": ..., \"params\": {...}}");
    only_keys(j, {"family", "params"}, "model");
    const auto& fam = require(j, "family", "model");
    if (!fam.is_string()) throw SchemaError("model: key 'family' must be a string");
    const std::string name = fam.get<std::string>();
    const nlohmann::json params = j.contains("params") ? j.at("params") : nlohmann::json::object();
    if (!params.is_object()) throw SchemaError("model: key 'params' must be an object");
    const std::string where = "model." + name + ".params";
    try {
        if (name == "degenerate") {
            only_keys(params, {"value"}, where);
            return IntensityModel::degenerate(number(params, "value", where));
        }
        if (name == "exponential") {
            only_keys(params, {"mean"}, where);
            return IntensityModel::exponential(number(params, "mean", where));
        }
        if (name == "gamma") {
            only_keys(params, {"shape", "mean"}, where);
            return IntensityModel::gamma(number(params, "shape", where), number(params, "mean", where));
        }
        if (name == "pareto") {
            only_keys(params, {"scale", "shape"}, where);
            return IntensityModel::pareto(number(params, "scale", where), number(params, "shape", where));
        }
        if (name == "uniform") {
            only_keys(params, {"lower", "upper"}, where);
            return IntensityModel::uniform(number(params, "lower", where), number(params, "upper", where));
        }
        if (name == "point_mixture") {
            only_keys(params, {"values", "weights"}, where);
            return IntensityModel::point_mixture(number_array(params, "values", where),
                                                 number_array(params, "weights", where));
        }
        if (name == "integer") {
            only_keys(params, {"probs", "truncation_mass"}, where);
            const double trunc = params.contains("truncation_mass") ? number(params, "truncation_mass", where) : 0.0;
            return IntensityModel::integer(DiscretePMF(number_array(params, "probs", where), trunc));
        }
        if (name == "poisson") {
            only_keys(params, {"mean"}, where);
            return IntensityModel::integer(poisson_pmf(number(params, "mean", where)));
        }
    } catch (const DomainError& e) {
        throw SchemaError(where + ": " + e.what());
    }
    throw SchemaError("model: unknown family '" + name + "'");
}

}  // namespace matchnet
