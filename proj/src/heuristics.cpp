#include "adnpca/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "adnpca/error.hpp"
#include "adnpca/io.hpp"
#include "adnpca/npca.hpp"

namespace adnpca {

using nlohmann::json;

std::string_view to_string(CurveMethod method) noexcept {
    switch (method) {
        case CurveMethod::EigenRatio: return "eigen_ratio";
        case CurveMethod::Normality: return "normality";
        case CurveMethod::RelativeDistance: return "relative_distance";
        case CurveMethod::Differential: return "differential";
    }
    return "eigen_ratio";
}

CurveMethod curve_method_from_string(std::string_view text) {
    if (text == "eigen_ratio") return CurveMethod::EigenRatio;
    if (text == "normality") return CurveMethod::Normality;
    if (text == "relative_distance") return CurveMethod::RelativeDistance;
    if (text == "differential") return CurveMethod::Differential;
    throw Error(ErrorKind::MalformedFile, "unknown curve method '" + std::string(text) + "'");
}

std::string_view to_string(SelectionRule rule) noexcept {
    return rule == SelectionRule::Argmax ? "argmax" : "tolerance";
}

HeuristicCurve eigenvalue_ratio_curve(const Eigen::Ref<const Eigen::VectorXd>& ascending, bool literal) {
    const Index d = ascending.size();
    if (d < 2) {
        throw Error(ErrorKind::InvalidArgument, "eigenvalue ratio needs d >= 2");
    }
    HeuristicCurve c;
    c.method = CurveMethod::EigenRatio;
    for (Index m = 1; m < d; ++m) {
        const double lo = ascending[m - 1];
        const double hi = ascending[m];
        const double denom = literal ? hi : lo;
        if (!(denom > 0.0)) {
            throw Error(ErrorKind::DegenerateSpectrum,
                        "eigenvalue " + std::to_string(literal ? m + 1 : m) + " is " + io::format_double(denom));
        }
        c.ks.push_back(m);
        c.values.push_back(literal ? lo / hi : hi / lo);
    }
    return c;
}

HeuristicCurve eigenvalue_ratio_curve(const SpectralModel& spectral, bool literal) {
    HeuristicCurve c = eigenvalue_ratio_curve(spectral.eigenvalues, literal);
    c.meta = {spectral.source.category, spectral.source.stage};
    return c;
}

double ks_statistic(std::span<const double> sample) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = 0.5 * std::erfc(-sorted[i] / std::numbers::sqrt2);
        const double above = static_cast<double>(i + 1) / n - cdf;
        const double below = cdf - static_cast<double>(i) / n;
        d = std::max({d, above, below});
    }
    return d;
}

double kolmogorov_sf(double t) {
    // Below 0.05 the complementary series puts Q(t) at 1 to double precision.
    if (!(t >= 0.05)) return 1.0;
    double sum = 0.0;
    for (int j = 1; j < 100000; ++j) {
        const double term = std::exp(-2.0 * j * j * t * t);
        sum += (j % 2 == 1) ? term : -term;
        if (term < 1e-12) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_pvalue(std::span<const double> sample, KsCorrection correction) {
    if (sample.size() < 2) {
        throw Error(ErrorKind::TooFewSamples, "K-S test needs at least 2 values");
    }
    for (double v : sample) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteEntry, "K-S sample contains NaN or Inf");
    }
    const double d = ks_statistic(sample);
    const double rn = std::sqrt(static_cast<double>(sample.size()));
    const double scale = correction == KsCorrection::Stephens ? rn + 0.12 + 0.11 / rn : rn;
    return kolmogorov_sf(scale * d);
}

HeuristicCurve normality_curve_from_pvalues(std::span<const double> pvalues) {
    HeuristicCurve c;
    c.method = CurveMethod::Normality;
    double running = 0.0;
    for (std::size_t i = 0; i < pvalues.size(); ++i) {
        running += pvalues[i];
        c.ks.push_back(static_cast<Index>(i + 1));
        c.values.push_back(running / static_cast<double>(i + 1));
    }
    return c;
}

HeuristicCurve normality_curve(const WhitenedMatrix& w_train, KsCorrection correction) {
    if (w_train.rows() < 2) {
        throw Error(ErrorKind::TooFewSamples, "normality curve needs at least 2 rows");
    }
    std::vector<double> pvalues;
    pvalues.reserve(static_cast<std::size_t>(w_train.cols()));
    std::vector<double> column(static_cast<std::size_t>(w_train.rows()));
    for (Index c = 0; c < w_train.cols(); ++c) {
        for (Index i = 0; i < w_train.rows(); ++i) column[static_cast<std::size_t>(i)] = w_train.data(i, c);
        pvalues.push_back(ks_pvalue(column, correction));
    }
    return normality_curve_from_pvalues(pvalues);
}

namespace {

double median_of(Eigen::VectorXd v) {
    const auto n = static_cast<std::size_t>(v.size());
    double* first = v.data();
    std::nth_element(first, first + n / 2, first + n);
    const double upper = first[n / 2];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(first, first + n / 2);
    return 0.5 * (lower + upper);
}

HeuristicCurve relative_distance_impl(const WhitenedMatrix& w_normal, const WhitenedMatrix& w_synth,
                                      const std::vector<Index>& order) {
    if (w_normal.cols() != w_synth.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "normal and synthetic matrices differ in dimension");
    }
    if (w_normal.model_fingerprint != w_synth.model_fingerprint) {
        throw Error(ErrorKind::PairingMismatch, "normal and synthetic rows were whitened by different models");
    }
    const CumulativeEnergy normal(w_normal);
    const CumulativeEnergy synth(w_synth);
    const Index n = w_normal.rows();

    HeuristicCurve c;
    c.method = CurveMethod::RelativeDistance;
    for (Index k = 1; k <= w_normal.cols(); ++k) {
        const Eigen::VectorXd s_n = normal.mean_sq(k);
        const Eigen::VectorXd s_a = synth.mean_sq(k);
        const double eps = 1e-12 * median_of(s_n);
        double total = 0.0;
        for (Index j = 0; j < n; ++j) {
            const double denom = s_n[j] + eps;
            if (!(denom > 0.0)) {
                throw Error(ErrorKind::ZeroNormalScore, "normal row " + std::to_string(j) +
                                                            " scores 0 at k = " + std::to_string(k));
            }
            total += s_a[order[static_cast<std::size_t>(j)]] / denom;
        }
        c.ks.push_back(k);
        c.values.push_back(total);
    }
    return c;
}

}  // namespace

HeuristicCurve relative_distance_curve(const WhitenedMatrix& w_normal, const WhitenedMatrix& w_synth,
                                       const Pairing& pairing) {
    return relative_distance_impl(w_normal, w_synth,
                                  pairing_order(w_normal.image_ids, w_synth.image_ids, pairing));
}

HeuristicCurve relative_distance_curve(const WhitenedMatrix& w_normal, const WhitenedMatrix& w_synth) {
    if (w_normal.rows() != w_synth.rows()) {
        throw Error(ErrorKind::PairingMismatch, "row-aligned pairing needs equal row counts");
    }
    std::vector<Index> order(static_cast<std::size_t>(w_normal.rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
    return relative_distance_impl(w_normal, w_synth, order);
}

HeuristicCurve differential_curve(const HeuristicCurve& c) {
    if (c.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "differential needs at least 2 grid points");
    }
    HeuristicCurve out;
    out.method = CurveMethod::Differential;
    out.meta = c.meta;
    out.ks = c.ks;
    out.values.resize(c.size());
    out.values[0] = c.values[0];
    for (std::size_t i = 1; i < c.size(); ++i) out.values[i] = c.values[i] - c.values[i - 1];
    return out;
}

namespace {

std::size_t argmax_from(const std::vector<double>& v, std::size_t start) {
    std::size_t best = start;
    for (std::size_t i = start + 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

}  // namespace

Selection select_k_argmax(const HeuristicCurve& c) {
    if (c.size() == 0) {
        throw Error(ErrorKind::InvalidArgument, "cannot select from an empty curve");
    }
    Selection s;
    s.rule = SelectionRule::Argmax;
    s.k_tilde = c.ks[argmax_from(c.values, 0)];
    return s;
}

Selection select_k_tolerance(const HeuristicCurve& c, double tol) {
    if (c.size() < 3) {
        throw Error(ErrorKind::InvalidArgument, "tolerance rule needs at least 3 grid points");
    }
    if (!(tol >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "tolerance must be non-negative");
    }
    const std::vector<double>& v = c.values;
    const std::size_t last = v.size() - 1;

    Selection s;
    s.rule = SelectionRule::Tolerance;
    s.tolerance = tol;
    s.discarded_first_point = argmax_from(v, 0) == 0;

    std::optional<std::size_t> m0;
    for (std::size_t i = 1; i <= last; ++i) {
        const bool left = v[i] <= v[i - 1];
        const bool right = i == last || v[i] <= v[i + 1];
        if (left && right) {
            m0 = i;
            break;
        }
    }
    if (!m0) {
        s.no_local_minimum = true;
        s.k_tilde = c.ks[argmax_from(v, s.discarded_first_point ? 1 : 0)];
        return s;
    }
    s.first_local_minimum = c.ks[*m0];

    const double peak = v[argmax_from(v, *m0)];
    const double tau = peak - tol * std::abs(peak);
    for (std::size_t i = *m0; i <= last; ++i) {
        if (v[i] >= tau) {
            s.k_tilde = c.ks[i];
            break;
        }
    }
    return s;
}

std::string curve_to_csv(const HeuristicCurve& c) {
    std::ostringstream out;
    out << "method,k,value\n";
    for (std::size_t i = 0; i < c.size(); ++i) {
        out << to_string(c.method) << ',' << c.ks[i] << ',' << io::format_double(c.values[i]) << '\n';
    }
    return out.str();
}

json curve_to_json(const HeuristicCurve& c) {
    return {{"method", std::string(to_string(c.method))},
            {"category", c.meta.category},
            {"stage", c.meta.stage},
            {"ks", c.ks},
            {"values", c.values}};
}

HeuristicCurve curve_from_json(const json& j) {
    HeuristicCurve c;
    c.method = curve_method_from_string(j.at("method").get<std::string>());
    c.meta.category = j.value("category", std::string{});
    c.meta.stage = j.value("stage", 0);
    c.ks = j.at("ks").get<std::vector<Index>>();
    c.values = j.at("values").get<std::vector<double>>();
    if (c.ks.size() != c.values.size()) {
        throw Error(ErrorKind::MalformedFile, "curve ks and values differ in length");
    }
    return c;
}

json selection_to_json(const Selection& s) {
    json j = {{"k_tilde", s.k_tilde},
              {"rule", std::string(to_string(s.rule))},
              {"tolerance", s.tolerance},
              {"discarded_first_point", s.discarded_first_point},
              {"no_local_minimum", s.no_local_minimum}};
    j["first_local_minimum"] = s.first_local_minimum ? json(*s.first_local_minimum) : json(nullptr);
    return j;
}

Selection selection_from_json(const json& j) {
    Selection s;
    s.k_tilde = j.at("k_tilde").get<Index>();
    s.rule = j.at("rule").get<std::string>() == "tolerance" ? SelectionRule::Tolerance : SelectionRule::Argmax;
    s.tolerance = j.value("tolerance", 0.0);
    s.discarded_first_point = j.value("discarded_first_point", false);
    s.no_local_minimum = j.value("no_local_minimum", false);
    if (j.contains("first_local_minimum") && !j.at("first_local_minimum").is_null()) {
        s.first_local_minimum = j.at("first_local_minimum").get<Index>();
    }
    return s;
}

}  // namespace adnpca
