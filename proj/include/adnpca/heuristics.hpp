#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "adnpca/featstore.hpp"
#include "adnpca/gaussian.hpp"

namespace adnpca {

enum class CurveMethod { EigenRatio, Normality, RelativeDistance, Differential };

std::string_view to_string(CurveMethod method) noexcept;
CurveMethod curve_method_from_string(std::string_view text);

struct CurveMeta {
    std::string category;
    int stage = 0;
};

/// One heuristic value per candidate k. `ks` is strictly increasing and
/// aligned with `values`.
struct HeuristicCurve {
    CurveMethod method = CurveMethod::EigenRatio;
    std::vector<Index> ks;
    std::vector<double> values;
    CurveMeta meta;

    std::size_t size() const noexcept { return ks.size(); }
};

enum class SelectionRule { Argmax, Tolerance };

std::string_view to_string(SelectionRule rule) noexcept;

struct Selection {
    Index k_tilde = 0;
    SelectionRule rule = SelectionRule::Argmax;
    double tolerance = 0.0;
    bool discarded_first_point = false;
    // Tolerance rule found no local minimum and fell back to the argmax.
    bool no_local_minimum = false;
    std::optional<Index> first_local_minimum;
};

inline constexpr double kDefaultTolerance = 0.01;

/// Consecutive eigenvalue ratios over m = 1..d-1 (eigenvalues ascending).
/// Default: lambda_{m+1} / lambda_m, peaking where the small-variance block
/// ends. `literal` computes lambda_m / lambda_{m+1} instead.
HeuristicCurve eigenvalue_ratio_curve(const Eigen::Ref<const Eigen::VectorXd>& ascending,
                                      bool literal = false);
HeuristicCurve eigenvalue_ratio_curve(const SpectralModel& spectral, bool literal = false);

enum class KsCorrection { None, Stephens };

/// sup_x |F_n(x) - Phi(x)| over the sorted sample.
double ks_statistic(std::span<const double> sample);

/// Kolmogorov limiting survival function Q(t) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2).
double kolmogorov_sf(double t);

/// Two-sided one-sample K-S p-value against N(0, 1).
double ks_pvalue(std::span<const double> sample, KsCorrection correction = KsCorrection::None);

/// Running mean of per-axis p-values: value(k) = mean(p_1..p_k).
HeuristicCurve normality_curve_from_pvalues(std::span<const double> pvalues);

/// K-S p-value of every whitened training axis, combined as a running mean.
HeuristicCurve normality_curve(const WhitenedMatrix& w_train,
                               KsCorrection correction = KsCorrection::None);

/// R_k = sum_j s_A(j) / s_N(j) with s the mean-square NPCA score over the
/// first k axes. Rows of `w_synth` are matched to `w_normal` through `pairing`.
HeuristicCurve relative_distance_curve(const WhitenedMatrix& w_normal, const WhitenedMatrix& w_synth,
                                       const Pairing& pairing);

/// Row j of `w_synth` is the partner of row j of `w_normal`.
HeuristicCurve relative_distance_curve(const WhitenedMatrix& w_normal, const WhitenedMatrix& w_synth);

/// Forward difference; the first grid point keeps c(first) so a cumulative
/// sum gives the original curve back.
HeuristicCurve differential_curve(const HeuristicCurve& c);

/// Smallest k attaining the maximum.
Selection select_k_argmax(const HeuristicCurve& c);

/// Tolerance rule:
///  1. a global maximum on the first grid point is discarded;
///  2. m0 = first local minimum (the first point never qualifies, the last
///     one compares against its left neighbour only);
///  3. tau = max - tol * |max| over grid points >= m0;
///  4. k_tilde = smallest k >= m0 with value >= tau.
/// Without a local minimum the selection falls back to the argmax.
Selection select_k_tolerance(const HeuristicCurve& c, double tol = kDefaultTolerance);

std::string curve_to_csv(const HeuristicCurve& c);
nlohmann::json curve_to_json(const HeuristicCurve& c);
HeuristicCurve curve_from_json(const nlohmann::json& j);
nlohmann::json selection_to_json(const Selection& s);
Selection selection_from_json(const nlohmann::json& j);

}  // namespace adnpca
