#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "matchnet/intensity.hpp"

namespace matchnet {

struct SweepRow {
    double param = 0.0;
    double mean_intensity = 0.0;  // d_U
    double gini = 0.0;
    double f = 0.0;
    double theta = 0.0;
};

enum class Shape { increasing, decreasing, inverted_U, inconclusive };
enum class GiniTrend { constant, increasing, decreasing, mixed };

std::string to_string(Shape s);
std::string to_string(GiniTrend g);

struct ShapeVerdict {
    Shape classification = Shape::inconclusive;
    std::optional<double> argmax_param;
    /// Monotone: |f_last - f_first|. Inverted-U: the smaller gap between the
    /// interior maximum and the two endpoints.
    double margin = 0.0;
};

inline constexpr double kShapeMargin = 1e-6;

/// Rows must be ordered by increasing d_U. Monotone shapes need every step
/// strictly signed; an inverted U needs an interior maximum at least `margin`
/// above both endpoints.
ShapeVerdict classify_shape(const std::vector<SweepRow>& rows, double margin = kShapeMargin);
/// Constant when max - min < 1e-9.
GiniTrend classify_gini(const std::vector<SweepRow>& rows);

struct FosdExperiment {
    std::vector<SweepRow> rows;
    ShapeVerdict verdict;
    GiniTrend gini_trend = GiniTrend::mixed;
};

FosdExperiment fosd_experiment(const FosdFamily& family, double theta, double margin = kShapeMargin);

/// One row of the FOSD summary table with its tabulated answer.
struct Table1Case {
    std::string name;
    FosdFamily family;
    double theta = 1.0;
    Shape expected_shape;
    GiniTrend expected_gini;
};

/// Degenerate, gamma, Pareto and the three uniform shifts, 200+ points each.
/// `refine` multiplies the grid density.
std::vector<Table1Case> table1_cases(std::size_t refine = 1);

struct SurfaceCell {
    double scale = 0.0;  // x_m
    double theta = 0.0;
    double alpha = 0.0;
    double mean_intensity = 0.0;
    double f = 0.0;
    std::string status = "ok";  // otherwise the failure message; f is NaN
};

/// Full factorial Pareto evaluation. Cell failures are recorded, not thrown.
std::vector<SurfaceCell> figure2_surface(const std::vector<double>& scales, const std::vector<double>& thetas,
                                         const std::vector<double>& alphas);

enum class MpsVariant { theorem2, prop8, prop9, prop11 };
std::string to_string(MpsVariant v);
MpsVariant mps_variant_from_string(const std::string& s);

inline constexpr double kStrictMargin = 1e-8;
inline constexpr double kWeakSlack = 1e-12;

struct MpsVerdict {
    std::string label;
    double theta = 0.0;
    double base_value = 0.0;    // f or q under the base law
    double spread_value = 0.0;  // under the spread
    double margin = 0.0;        // base_value - spread_value
    bool strict = true;
    bool pass = false;
};

/// theorem2: f_large over G. prop8: f_locations_large over G with fixed H.
/// prop9: f_locations_large over H with fixed G. prop11: q_large over Ghat.
/// `companion` is the fixed law for prop8 (H, default point mass 2) and
/// prop9 (G, default Degenerate(3)).
std::vector<MpsVerdict> mps_battery(const std::vector<MpsPair>& pairs, MpsVariant variant,
                                    const std::vector<double>& thetas,
                                    const std::optional<IntensityModel>& companion = std::nullopt);

/// Shipped pair catalog: continuous and atomic intensity pairs for
/// theorem2/prop8/prop11, integer-valued pairs for prop9.
std::vector<MpsPair> mps_catalog(MpsVariant variant);

struct ScalingRow {
    double rho = 0.0;
    double f = 0.0;
    double difference = 0.0;  // f(rho) - f(1)
    bool sign_ok = false;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    bool pass = false;
};

/// f_large of rho X against f_large of X; the sign of the difference must
/// match the sign of rho - 1.
ScalingReport scaling_experiment(const IntensityModel& G, const std::vector<double>& rhos, double theta);

struct CesGammaSummary {
    double gamma = 0.0;
    std::vector<double> residuals;  // d_U - ces_scaling_dbar(theta, gamma), NaN where excluded
    std::size_t used = 0;
    std::size_t excluded = 0;
    double mean_squared = 0.0;  // over used observations; +inf if none
    double max_abs = 0.0;
};

struct CesProbe {
    std::vector<CesGammaSummary> profile;
    std::optional<double> best_gamma;
    bool degenerate_fit = false;  // fewer than two observations
};

CesProbe ces_condition_probe(const std::vector<std::pair<double, double>>& observations,
                             const std::vector<double>& gammas);

/// Evenly spaced grid with n points including both ends.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace matchnet
