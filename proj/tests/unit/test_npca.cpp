#include <random>

#include <gtest/gtest.h>

#include "adnpca/error.hpp"
#include "adnpca/eval.hpp"
#include "adnpca/gaussian.hpp"
#include "adnpca/npca.hpp"
#include "oracles.hpp"

using namespace adnpca;

namespace {

WhitenedMatrix wrap(Eigen::MatrixXd data) {
    WhitenedMatrix w;
    w.data = std::move(data);
    for (Index i = 0; i < w.data.rows(); ++i) w.image_ids.push_back(std::to_string(i));
    return w;
}

std::vector<double> as_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST(NpcaProject, Examples) {
    Eigen::MatrixXd x(2, 3);
    x << 1, 2, 3, 4, 5, 6;
    const WhitenedMatrix w = wrap(x);
    EXPECT_EQ(npca_project(w, 3), x);
    EXPECT_EQ(npca_project(w, 1), x.leftCols(1));
    Eigen::MatrixXd want(2, 2);
    want << 1, 2, 4, 5;
    EXPECT_EQ(npca_project(w, 2), want);
    for (Index bad : {Index{0}, Index{4}, Index{-1}}) {
        try {
            (void)npca_project(w, bad);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::KOutOfRange);
        }
    }
}

TEST(NpcaScore, HandArithmetic) {
    const NpcaScores s = npca_score(wrap(Eigen::RowVector3d(1, 2, 2)), 3);
    EXPECT_DOUBLE_EQ(s.mean_sq[0], 3.0);
    EXPECT_DOUBLE_EQ(s.euclid[0], 3.0);
    const NpcaScores z = npca_score(wrap(Eigen::MatrixXd::Zero(1, 5)), 2);
    EXPECT_EQ(z.mean_sq[0], 0.0);
    EXPECT_EQ(z.euclid[0], 0.0);
    EXPECT_THROW((void)npca_score(wrap(Eigen::MatrixXd::Zero(1, 5)), 6), Error);
}

TEST(NpcaScore, FullKEqualsMahalanobis) {
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd sigma = oracle::random_spd(rng, 9);
    const Eigen::MatrixXd x = oracle::gaussian_rows(rng, 200, Eigen::VectorXd::Zero(9), sigma);
    const SpectralModel s = spectral_decompose(fit_gaussian(x));
    const NpcaScores sc = npca_score(whiten(s, x), 9);
    for (Index j = 0; j < x.rows(); ++j) {
        const double m = mahalanobis(s, x.row(j).transpose());
        EXPECT_LE(std::abs(sc.euclid[j] - m), 1e-10 * m);
    }
}

TEST(NpcaProperty, ScoreInvariants) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 5 + trial, d = 1 + trial % 9;
        const WhitenedMatrix w = wrap(oracle::standard_normal(rng, n, d) * (1.0 + trial));
        const CumulativeEnergy cum(w);
        Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
        for (Index k = 1; k <= d; ++k) {
            const NpcaScores s = npca_score(w, k);
            for (Index i = 0; i < n; ++i) {
                const double e2 = s.euclid[i] * s.euclid[i];
                EXPECT_LE(std::abs(e2 - k * s.mean_sq[i]), 1e-10 * std::max(e2, 1e-300));
                EXPECT_GE(s.euclid[i], prev[i]);
            }
            prev = s.euclid;
            // cumulative sums use the same accumulation order
            EXPECT_EQ(cum.mean_sq(k), s.mean_sq);
            // same ordering, same auroc
            const Index half = n / 2;
            const auto ms = as_vec(s.mean_sq), eu = as_vec(s.euclid);
            const std::vector<double> ms_n(ms.begin(), ms.begin() + half), ms_a(ms.begin() + half, ms.end());
            const std::vector<double> eu_n(eu.begin(), eu.begin() + half), eu_a(eu.begin() + half, eu.end());
            EXPECT_EQ(auroc(ms_n, ms_a), auroc(eu_n, eu_a));
            // idempotent projection
            const Eigen::MatrixXd p = npca_project(w, k);
            EXPECT_EQ(npca_project(wrap(p), k), p);
        }
    }
}
