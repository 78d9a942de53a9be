#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "adnpca/error.hpp"
#include "adnpca/gaussian.hpp"
#include "adnpca/heuristics.hpp"
#include "oracles.hpp"

using namespace adnpca;

namespace {

HeuristicCurve curve_of(std::vector<double> values) {
    HeuristicCurve c;
    c.method = CurveMethod::Normality;
    for (std::size_t i = 0; i < values.size(); ++i) c.ks.push_back(static_cast<Index>(i + 1));
    c.values = std::move(values);
    return c;
}

WhitenedMatrix wrap(Eigen::MatrixXd data) {
    WhitenedMatrix w;
    w.data = std::move(data);
    for (Index i = 0; i < w.data.rows(); ++i) w.image_ids.push_back("r" + std::to_string(i));
    return w;
}

// Frozen from scipy.stats.kstwobign.sf and scipy.stats.kstest (scipy 1.x).
const std::vector<double> kKsSample{-1.2, 0.3, 0.85, -0.4, 2.1, -0.05, 0.66, -1.9, 0.12, 1.4,
                                    -0.7, 0.01, 0.9, -0.33, 1.1, -2.5, 0.5, 0.2, -0.15, 0.75};

}  // namespace

TEST(EigenRatio, HandExample) {
    const HeuristicCurve c = eigenvalue_ratio_curve(Eigen::VectorXd{{0.1, 0.2, 0.3, 3.0, 3.1}});
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c.ks, (std::vector<Index>{1, 2, 3, 4}));
    EXPECT_NEAR(c.values[0], 2.0, 1e-15);
    EXPECT_NEAR(c.values[1], 1.5, 1e-15);
    EXPECT_NEAR(c.values[2], 10.0, 1e-14);
    EXPECT_NEAR(c.values[3], 3.1 / 3.0, 1e-15);
    EXPECT_EQ(select_k_argmax(c).k_tilde, 3);
}

TEST(EigenRatio, FlatAndGeometric) {
    const HeuristicCurve flat = eigenvalue_ratio_curve(Eigen::VectorXd::Constant(7, 2.5));
    for (double v : flat.values) EXPECT_EQ(v, 1.0);
    EXPECT_EQ(select_k_argmax(flat).k_tilde, 1);
    Eigen::VectorXd geo(6);
    for (Index i = 0; i < 6; ++i) geo[i] = 0.3 * std::pow(1.7, static_cast<double>(i));
    for (double v : eigenvalue_ratio_curve(geo).values) EXPECT_NEAR(v, 1.7, 1e-14);
}

TEST(EigenRatio, LiteralModeInverts) {
    const HeuristicCurve lit = eigenvalue_ratio_curve(Eigen::VectorXd{{0.1, 0.2, 0.3, 3.0, 3.1}}, true);
    EXPECT_NEAR(lit.values[2], 0.1, 1e-15);
    EXPECT_EQ(select_k_argmax(lit).k_tilde, 4);
}

TEST(EigenRatio, Errors) {
    try {
        (void)eigenvalue_ratio_curve(Eigen::VectorXd{{0.0, 1.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateSpectrum);
    }
    EXPECT_THROW((void)eigenvalue_ratio_curve(Eigen::VectorXd{{1.0}}), Error);
}

TEST(HeuristicProperty, RatioScaleInvariant) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Index d = 2 + trial % 30;
        Eigen::VectorXd lam(d);
        for (Index i = 0; i < d; ++i) lam[i] = u(rng);
        std::sort(lam.data(), lam.data() + d);
        const double c = std::pow(10.0, u(rng) - 5.0);
        const HeuristicCurve a = eigenvalue_ratio_curve(lam);
        const HeuristicCurve b = eigenvalue_ratio_curve(c * lam);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-12 * a.values[i]);
        EXPECT_EQ(select_k_argmax(a).k_tilde, select_k_argmax(b).k_tilde);
    }
}

TEST(KolmogorovSf, MatchesReference) {
    const std::vector<std::pair<double, double>> ref{
        {0.3, 0.9999906941986655},       {0.5, 0.9639452436648751},   {0.8, 0.5441424115741981},
        {1.0, 0.26999967167735456},      {1.2238, 0.10002342783567782}, {1.36, 0.049485876755377876},
        {1.628, 0.009975522431181053},   {2.0, 0.0006709252557796953}, {3.0, 3.045995948942526e-08},
        {0.1, 1.0}};
    for (auto [t, p] : ref) EXPECT_NEAR(kolmogorov_sf(t), p, 1e-11 * std::max(p, 1e-3)) << t;
    EXPECT_EQ(kolmogorov_sf(0.0), 1.0);
    EXPECT_GE(kolmogorov_sf(40.0), 0.0);
}

TEST(KsTest, FixedSampleMatchesReference) {
    EXPECT_NEAR(ks_statistic(kKsSample), 0.1445782583896758, 1e-14);
    EXPECT_NEAR(ks_pvalue(kKsSample), 0.7972992157179697, 1e-10);
    EXPECT_NEAR(ks_pvalue(kKsSample, KsCorrection::Stephens), 0.7644628973794209, 1e-10);
    std::vector<double> shifted = kKsSample;
    for (double& x : shifted) x += 0.8;
    EXPECT_NEAR(ks_statistic(shifted), 0.45542174161032417, 1e-14);
    EXPECT_NEAR(ks_pvalue(shifted), 0.0004988468971097477, 1e-12);
}

TEST(KsTest, ExactQuantiles) {
    std::vector<double> q;
    const int n = 100;
    // probit of (i - 0.5)/n through the complementary error function
    for (int i = 1; i <= n; ++i) {
        const double p = (i - 0.5) / n;
        double lo = -10, hi = 10;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
        }
        q.push_back(0.5 * (lo + hi));
    }
    EXPECT_NEAR(ks_statistic(q), 0.005, 1e-12);
    EXPECT_GT(ks_pvalue(q), 0.999);
}

TEST(KsTest, ShiftedAndConstant) {
    std::mt19937_64 rng(500);
    std::normal_distribution<double> g(5.0, 1.0);
    std::vector<double> x(500);
    for (double& v : x) v = g(rng);
    EXPECT_LT(ks_pvalue(x), 1e-10);
    const std::vector<double> c(50, 0.0);
    EXPECT_GE(ks_statistic(c), 0.5);
    EXPECT_LT(ks_pvalue(c), 1e-10);
}

TEST(KsTest, Errors) {
    try {
        (void)ks_pvalue(std::vector<double>{1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TooFewSamples);
    }
    EXPECT_THROW((void)ks_pvalue(std::vector<double>{1.0, std::nan("")}), Error);
}

TEST(Normality, RunningMean) {
    const HeuristicCurve c = normality_curve_from_pvalues(std::vector<double>{0.8, 0.2, 0.5});
    ASSERT_EQ(c.size(), 3u);
    EXPECT_NEAR(c.values[0], 0.8, 1e-15);
    EXPECT_NEAR(c.values[1], 0.5, 1e-15);
    EXPECT_NEAR(c.values[2], 0.5, 1e-15);
    EXPECT_EQ(c.method, CurveMethod::Normality);
}

TEST(Normality, IdenticalAxesGiveConstantCurve) {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd col = oracle::standard_normal(rng, 80, 1);
    const HeuristicCurve c = normality_curve(wrap(col.replicate(1, 6)));
    for (double v : c.values) EXPECT_EQ(v, c.values[0]);
}

TEST(Normality, NullTrainingSet) {
    std::mt19937_64 rng(32);
    double true_model = 0.0, in_sample = 0.0;
    const int reps = 20;
    GaussianModel truth;
    truth.mu = Eigen::VectorXd::Zero(32);
    truth.sigma = Eigen::MatrixXd::Identity(32, 32);
    truth.n_fit = 2000;
    const SpectralModel known = spectral_decompose(truth);
    for (int r = 0; r < reps; ++r) {
        const Eigen::MatrixXd train = oracle::standard_normal(rng, 400, 32);
        const SpectralModel s = spectral_decompose(fit_gaussian(train));
        const WhitenedMatrix w = whiten(s, train);
        const HeuristicCurve c = normality_curve(w);
        std::vector<double> col(w.data.col(0).data(), w.data.col(0).data() + w.rows());
        EXPECT_EQ(c.values[0], ks_pvalue(col));
        for (double v : c.values) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        in_sample += c.values.back();
        true_model += normality_curve(whiten(known, train)).values.back();
    }
    EXPECT_NEAR(true_model / reps, 0.5, 0.05);
    // self-fitted standardization makes the known-parameter test conservative
    EXPECT_GT(in_sample / reps, true_model / reps);
}

TEST(RelativeDistance, ProportionalRows) {
    const WhitenedMatrix n = wrap(Eigen::RowVector2d(1, 1));
    const WhitenedMatrix s = wrap(Eigen::RowVector2d(2, 2));
    const HeuristicCurve c = relative_distance_curve(n, s);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NEAR(c.values[0], 4.0, 1e-10);
    EXPECT_NEAR(c.values[1], 4.0, 1e-10);
    const HeuristicCurve d = differential_curve(c);
    EXPECT_NEAR(d.values[0], 4.0, 1e-10);
    EXPECT_NEAR(d.values[1], 0.0, 1e-10);
    EXPECT_EQ(d.method, CurveMethod::Differential);
}

TEST(RelativeDistance, MatchesBruteForceWithPairing) {
    std::mt19937_64 rng(70);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 3 + trial, d = 1 + trial % 8;
        WhitenedMatrix wn = wrap(oracle::standard_normal(rng, n, d));
        WhitenedMatrix ws = wrap(oracle::standard_normal(rng, n, d) * 2.0);
        for (Index i = 0; i < n; ++i) ws.image_ids[static_cast<std::size_t>(i)] = "s" + std::to_string(i);
        // synthetic row i pairs with normal row (i + 1) mod n
        Pairing p;
        Eigen::MatrixXd aligned(n, d);
        for (Index i = 0; i < n; ++i) {
            const Index j = (i + 1) % n;
            p.push_back({wn.image_ids[static_cast<std::size_t>(j)], ws.image_ids[static_cast<std::size_t>(i)]});
            aligned.row(j) = ws.data.row(i);
        }
        const HeuristicCurve c = relative_distance_curve(wn, ws, p);
        const std::vector<double> want = oracle::relative_distance(wn.data, aligned);
        for (std::size_t k = 0; k < want.size(); ++k) EXPECT_NEAR(c.values[k], want[k], 1e-12 * want[k]);
    }
}

TEST(RelativeDistance, IdenticalInputsGiveN) {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 2 + trial, d = 1 + trial % 10;
        // magnitudes bounded away from zero keep the epsilon guard below 1e-11 per row
        std::uniform_real_distribution<double> mag(0.5, 2.0);
        Eigen::MatrixXd x(n, d);
        for (Index i = 0; i < x.size(); ++i) x.data()[i] = (i % 3 ? 1.0 : -1.0) * mag(rng);
        const WhitenedMatrix w = wrap(x);
        for (double v : relative_distance_curve(w, w).values) EXPECT_NEAR(v, static_cast<double>(n), 1e-10);
    }
}

TEST(RelativeDistance, Errors) {
    WhitenedMatrix a = wrap(Eigen::MatrixXd::Ones(2, 2));
    WhitenedMatrix b = wrap(Eigen::MatrixXd::Ones(2, 2));
    b.model_fingerprint = 7;
    EXPECT_THROW((void)relative_distance_curve(a, b), Error);
    try {
        (void)relative_distance_curve(wrap(Eigen::MatrixXd::Zero(3, 2)), wrap(Eigen::MatrixXd::Ones(3, 2)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroNormalScore);
    }
    try {
        (void)relative_distance_curve(a, wrap(Eigen::MatrixXd::Ones(2, 2)), Pairing{{"r0", "zz"}, {"r1", "r1"}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PairingMismatch);
    }
}

TEST(Differential, LinearAndReconstruction) {
    const HeuristicCurve lin = curve_of({3, 5, 7, 9, 11});
    const HeuristicCurve d = differential_curve(lin);
    EXPECT_EQ(d.values[0], 3.0);
    for (std::size_t i = 1; i < d.size(); ++i) EXPECT_EQ(d.values[i], 2.0);
    EXPECT_EQ(d.ks, lin.ks);
    EXPECT_THROW((void)differential_curve(curve_of({1})), Error);

    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> u(-1000, 1000);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(2 + trial % 20);
        for (double& x : v) x = u(rng) / 8.0;
        const HeuristicCurve dd = differential_curve(curve_of(v));
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            acc += dd.values[i];
            EXPECT_EQ(acc, v[i]);
        }
    }
}

TEST(SelectArgmax, TieRules) {
    EXPECT_EQ(select_k_argmax(curve_of({2, 1.5, 10, 1.03})).k_tilde, 3);
    EXPECT_EQ(select_k_argmax(curve_of({4, 4, 4})).k_tilde, 1);
    EXPECT_EQ(select_k_argmax(curve_of({1, 9, 3, 9, 2})).k_tilde, 2);
}

TEST(SelectTolerance, WalkThroughOne) {
    const Selection s = select_k_tolerance(curve_of({9, 1, 2, 5, 5.04, 5.05}));
    EXPECT_EQ(s.k_tilde, 4);
    EXPECT_TRUE(s.discarded_first_point);
    EXPECT_FALSE(s.no_local_minimum);
    ASSERT_TRUE(s.first_local_minimum.has_value());
    EXPECT_EQ(*s.first_local_minimum, 2);
}

TEST(SelectTolerance, WalkThroughTwo) {
    const Selection s = select_k_tolerance(curve_of({0.5, 0.2, 0.9, 1.0, 0.99}));
    EXPECT_EQ(s.k_tilde, 4);
    EXPECT_FALSE(s.discarded_first_point);
    EXPECT_EQ(*s.first_local_minimum, 2);
}

TEST(SelectTolerance, MonotoneFallsBackToArgmax) {
    const Selection s = select_k_tolerance(curve_of({1, 2, 3, 4, 5}));
    EXPECT_TRUE(s.no_local_minimum);
    EXPECT_EQ(s.k_tilde, 5);
    EXPECT_THROW((void)select_k_tolerance(curve_of({1, 2})), Error);
}

TEST(SelectTolerance, LastPointIsOneSidedMinimum) {
    const Selection s = select_k_tolerance(curve_of({3, 4, 5, 2}));
    ASSERT_TRUE(s.first_local_minimum.has_value());
    EXPECT_EQ(*s.first_local_minimum, 4);
    EXPECT_EQ(s.k_tilde, 4);
}

TEST(HeuristicProperty, ZeroToleranceIsArgmaxAfterMinimum) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> v(3 + trial % 15);
        for (double& x : v) x = u(rng);
        const HeuristicCurve c = curve_of(v);
        const Selection s = select_k_tolerance(c, 0.0);
        if (s.no_local_minimum) continue;
        const std::size_t m0 = static_cast<std::size_t>(*s.first_local_minimum - 1);
        std::size_t best = m0;
        for (std::size_t i = m0; i < v.size(); ++i) {
            if (v[i] > v[best]) best = i;
        }
        EXPECT_EQ(s.k_tilde, static_cast<Index>(best + 1));
        const Selection loose = select_k_tolerance(c, 0.2);
        EXPECT_LE(loose.k_tilde, s.k_tilde);
        EXPECT_GE(loose.k_tilde, *s.first_local_minimum);
    }
}

TEST(Curves, SerializationRoundTrip) {
    HeuristicCurve c = curve_of({0.25, 0.5, 0.125});
    c.meta = {"screw", 2};
    const HeuristicCurve back = curve_from_json(curve_to_json(c));
    EXPECT_EQ(back.values, c.values);
    EXPECT_EQ(back.ks, c.ks);
    EXPECT_EQ(back.method, c.method);
    EXPECT_EQ(back.meta.category, "screw");
    EXPECT_EQ(curve_to_csv(c), "method,k,value\nnormality,1,0.25\nnormality,2,0.5\nnormality,3,0.125\n");
    const Selection s = select_k_tolerance(curve_of({9, 1, 2, 5, 5.04, 5.05}));
    const Selection sb = selection_from_json(selection_to_json(s));
    EXPECT_EQ(sb.k_tilde, s.k_tilde);
    EXPECT_EQ(sb.discarded_first_point, s.discarded_first_point);
    EXPECT_EQ(sb.first_local_minimum, s.first_local_minimum);
}
