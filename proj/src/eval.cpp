#include "adnpca/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "adnpca/error.hpp"
#include "adnpca/io.hpp"
#include "adnpca/npca.hpp"

namespace adnpca {

using nlohmann::json;

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (std::isnan(x)) throw Error(ErrorKind::InvalidArgument, std::string(what) + " contains NaN");
    }
}

}  // namespace

double auroc(std::span<const double> scores_normal, std::span<const double> scores_anom) {
    if (scores_normal.empty() || scores_anom.empty()) {
        throw Error(ErrorKind::EmptyClass, "AUROC needs at least one normal and one anomalous score");
    }
    require_finite(scores_normal, "normal scores");
    require_finite(scores_anom, "anomalous scores");

    struct Tagged {
        double score;
        bool anomalous;
    };
    std::vector<Tagged> all;
    all.reserve(scores_normal.size() + scores_anom.size());
    for (double s : scores_normal) all.push_back({s, false});
    for (double s : scores_anom) all.push_back({s, true});
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.score < b.score; });

    // twice the Mann-Whitney U, kept integral so ties stay exact
    std::int64_t twice_u = 0;
    std::int64_t normals_below = 0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        std::int64_t group_anom = 0;
        std::int64_t group_norm = 0;
        while (j < all.size() && all[j].score == all[i].score) {
            (all[j].anomalous ? group_anom : group_norm) += 1;
            ++j;
        }
        twice_u += 2 * group_anom * normals_below + group_anom * group_norm;
        normals_below += group_norm;
        i = j;
    }
    const double pairs = static_cast<double>(scores_normal.size()) * static_cast<double>(scores_anom.size());
    return (static_cast<double>(twice_u) * 0.5) / pairs;
}

RocResult roc_curve(std::span<const double> scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorKind::DimensionMismatch, "scores and labels differ in length");
    }
    require_finite(scores, "scores");
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw Error(ErrorKind::EmptyClass, "ROC needs both positive and negative labels");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocResult r;
    r.thresholds.push_back(std::numeric_limits<double>::infinity());
    r.tpr.push_back(0.0);
    r.fpr.push_back(0.0);
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double thr = scores[order[i]];
        while (i < order.size() && scores[order[i]] == thr) {
            (labels[order[i]] ? tp : fp) += 1;
            ++i;
        }
        r.thresholds.push_back(thr);
        r.tpr.push_back(static_cast<double>(tp) / static_cast<double>(positives));
        r.fpr.push_back(static_cast<double>(fp) / static_cast<double>(negatives));
    }
    double area = 0.0;
    for (std::size_t i = 1; i < r.tpr.size(); ++i) {
        area += (r.fpr[i] - r.fpr[i - 1]) * (r.tpr[i] + r.tpr[i - 1]) * 0.5;
    }
    r.auroc = area;
    return r;
}

std::string roc_to_csv(const RocResult& roc) {
    std::ostringstream out;
    out << "threshold,fpr,tpr\n";
    for (std::size_t i = 0; i < roc.tpr.size(); ++i) {
        out << (std::isinf(roc.thresholds[i]) ? std::string("inf") : io::format_double(roc.thresholds[i]))
            << ',' << io::format_double(roc.fpr[i]) << ',' << io::format_double(roc.tpr[i]) << '\n';
    }
    return out.str();
}

double SweepResult::auroc_at(Index k) const {
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] == k) return auroc_per_k[i];
    }
    throw Error(ErrorKind::KOutOfRange, "k = " + std::to_string(k) + " is not on the sweep grid");
}

SweepResult sweep_k(const WhitenedMatrix& w_test_normal, const WhitenedMatrix& w_test_anom, unsigned threads) {
    if (w_test_normal.cols() != w_test_anom.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "normal and anomalous test matrices differ in dimension");
    }
    if (w_test_normal.model_fingerprint != w_test_anom.model_fingerprint) {
        throw Error(ErrorKind::InvalidArgument, "test matrices were whitened by different models");
    }
    if (w_test_normal.rows() == 0 || w_test_anom.rows() == 0) {
        throw Error(ErrorKind::EmptyClass, "sweep needs normal and anomalous test rows");
    }
    const CumulativeEnergy normal(w_test_normal);
    const CumulativeEnergy anom(w_test_anom);
    const Index d = w_test_normal.cols();

    SweepResult out;
    out.ks.resize(static_cast<std::size_t>(d));
    out.auroc_per_k.resize(static_cast<std::size_t>(d));
    auto work = [&](Index first, Index last) {
        for (Index k = first; k <= last; ++k) {
            const Eigen::VectorXd sn = normal.mean_sq(k);
            const Eigen::VectorXd sa = anom.mean_sq(k);
            const auto slot = static_cast<std::size_t>(k - 1);
            out.ks[slot] = k;
            out.auroc_per_k[slot] = auroc({sn.data(), static_cast<std::size_t>(sn.size())},
                                          {sa.data(), static_cast<std::size_t>(sa.size())});
        }
    };

    const Index workers = std::clamp<Index>(static_cast<Index>(threads), 1, d);
    if (workers == 1) {
        work(1, d);
    } else {
        std::vector<std::jthread> pool;
        const Index chunk = (d + workers - 1) / workers;
        for (Index first = 1; first <= d; first += chunk) {
            pool.emplace_back(work, first, std::min(d, first + chunk - 1));
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < out.auroc_per_k.size(); ++i) {
        if (out.auroc_per_k[i] > out.auroc_per_k[best]) best = i;
    }
    out.k_star = out.ks[best];
    out.auroc_star = out.auroc_per_k[best];
    return out;
}

RegretEntry regret(const SweepResult& sweep, const Selection& sel, std::string heuristic) {
    RegretEntry e;
    e.heuristic = std::move(heuristic);
    e.category = sweep.category;
    e.stage = sweep.stage;
    e.k_tilde = sel.k_tilde;
    e.k_star = sweep.k_star;
    e.auroc_tilde = sweep.auroc_at(sel.k_tilde);
    e.auroc_star = sweep.auroc_star;
    e.regret = e.auroc_star - e.auroc_tilde;
    return e;
}

std::string sweep_to_csv(const SweepResult& s) {
    std::ostringstream out;
    out << "k,auroc\n";
    for (std::size_t i = 0; i < s.ks.size(); ++i) out << s.ks[i] << ',' << io::format_double(s.auroc_per_k[i]) << '\n';
    return out.str();
}

json sweep_to_json(const SweepResult& s) {
    return {{"category", s.category}, {"stage", s.stage},     {"score", "mean_sq"},
            {"ks", s.ks},             {"auroc_per_k", s.auroc_per_k}, {"k_star", s.k_star},
            {"auroc_star", s.auroc_star}};
}

SweepResult sweep_from_json(const json& j) {
    SweepResult s;
    try {
        s.category = j.value("category", std::string{});
        s.stage = j.value("stage", 0);
        s.ks = j.at("ks").get<std::vector<Index>>();
        s.auroc_per_k = j.at("auroc_per_k").get<std::vector<double>>();
        s.k_star = j.at("k_star").get<Index>();
        s.auroc_star = j.at("auroc_star").get<double>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedFile, std::string("bad sweep json: ") + e.what());
    }
    if (s.ks.size() != s.auroc_per_k.size() || s.ks.empty()) {
        throw Error(ErrorKind::MalformedFile, "sweep ks and aurocs differ in length");
    }
    return s;
}

json regret_to_json(const RegretEntry& e) {
    return {{"heuristic", e.heuristic}, {"category", e.category},    {"stage", e.stage},
            {"k_tilde", e.k_tilde},     {"k_star", e.k_star},        {"auroc_tilde", e.auroc_tilde},
            {"auroc_star", e.auroc_star}, {"regret", e.regret}};
}

}  // namespace adnpca
