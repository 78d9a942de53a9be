#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adnpca/gaussian.hpp"
#include "adnpca/heuristics.hpp"

namespace adnpca {

/// Mann-Whitney AUROC: (#pairs anomalous > normal + 0.5 * #ties) / (n_a * n_n).
/// Higher scores mean more anomalous. Throws EmptyClass if either side is empty.
double auroc(std::span<const double> scores_normal, std::span<const double> scores_anom);

/// ROC points for a descending threshold sweep over the unique scores,
/// starting at (0, 0) and ending at (1, 1). `auroc` is the trapezoidal area.
struct RocResult {
    std::vector<double> thresholds;  // thresholds[0] is +inf
    std::vector<double> tpr;
    std::vector<double> fpr;
    double auroc = 0.0;
};

/// `labels[i]` is true for anomalous (positive) samples.
RocResult roc_curve(std::span<const double> scores, const std::vector<bool>& labels);

std::string roc_to_csv(const RocResult& roc);

struct SweepResult {
    std::vector<Index> ks;
    std::vector<double> auroc_per_k;
    Index k_star = 0;
    double auroc_star = 0.0;
    std::string category;
    int stage = 0;

    double auroc_at(Index k) const;
};

/// AUROC of the mean-square NPCA score for every k in 1..d. Both inputs must
/// come from the same spectral model. `threads` > 1 splits the k range; the
/// result does not depend on it.
SweepResult sweep_k(const WhitenedMatrix& w_test_normal, const WhitenedMatrix& w_test_anom,
                    unsigned threads = 1);

struct RegretEntry {
    std::string heuristic;
    std::string category;
    int stage = 0;
    Index k_tilde = 0;
    Index k_star = 0;
    double auroc_tilde = 0.0;
    double auroc_star = 0.0;
    double regret = 0.0;
};

RegretEntry regret(const SweepResult& sweep, const Selection& sel, std::string heuristic = {});

std::string sweep_to_csv(const SweepResult& s);
nlohmann::json sweep_to_json(const SweepResult& s);
SweepResult sweep_from_json(const nlohmann::json& j);
nlohmann::json regret_to_json(const RegretEntry& e);

}  // namespace adnpca
