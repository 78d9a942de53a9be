#include <cmath>

#include <gtest/gtest.h>

#include "adnpca/error.hpp"
#include "adnpca/eval.hpp"
#include "adnpca/gaussian.hpp"
#include "adnpca/heuristics.hpp"
#include "adnpca/io.hpp"
#include "adnpca/synthgen.hpp"
#include "oracles.hpp"

using namespace adnpca;

TEST(SplitMix64, ReferenceStream) {
    // first outputs for seed 0 from the published reference implementation
    SplitMix64 rng(0);
    EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ULL);
    EXPECT_EQ(rng.next(), 0x06c45d188009454fULL);
}

TEST(SplitMix64, NormalMoments) {
    SplitMix64 rng(42);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Synthgen, SpecValidation) {
    BenchmarkSpec s;
    s.k_true = s.d;
    EXPECT_THROW(validate(s), Error);
    s = {};
    s.gap = 1.0;
    EXPECT_THROW(validate(s), Error);
    s = {};
    s.offset = -1;
    EXPECT_THROW(validate(s), Error);
    s = {};
    s.k_true = 0;
    try {
        validate(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidSpec);
    }
    EXPECT_NO_THROW(validate(BenchmarkSpec{}));
}

TEST(Synthgen, PlantedSpectrum) {
    BenchmarkSpec s;
    s.d = 5;
    s.k_true = 2;
    const Eigen::VectorXd l = planted_spectrum(s);
    EXPECT_EQ(l[0], 1.0);
    EXPECT_EQ(l[1], 1.0);
    EXPECT_EQ(l[2], 10.0);
    EXPECT_NEAR(l[3], 11.0, 1e-12);
    EXPECT_NEAR(l[4], 12.1, 1e-12);
}

TEST(Synthgen, DeterministicAndShaped) {
    BenchmarkSpec s;
    s.seed = 9;
    s.n_train = 100;
    s.n_test = 30;
    s.d = 6;
    s.k_true = 2;
    const Benchmark a = generate_benchmark(s);
    const Benchmark b = generate_benchmark(s);
    EXPECT_EQ(a.train.data, b.train.data);
    EXPECT_EQ(a.synthetic.data, b.synthetic.data);
    EXPECT_EQ(a.test_anomalous.data, b.test_anomalous.data);
    EXPECT_EQ(a.train.rows(), 100);
    EXPECT_EQ(a.test_normal.rows(), 30);
    EXPECT_EQ(a.pairing.size(), 30u);
    EXPECT_EQ(a.pairing[4].normal_id, a.test_normal.image_ids[4]);
    EXPECT_EQ(a.pairing[4].synth_id, a.synthetic.image_ids[4]);
    const Eigen::MatrixXd& q = a.basis;
    EXPECT_LT((q.transpose() * q - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
    s.seed = 10;
    EXPECT_NE(generate_benchmark(s).train.data, a.train.data);
}

TEST(Synthgen, SyntheticRowsAreDisplacedPairs) {
    BenchmarkSpec s;
    s.n_train = 50;
    s.n_test = 40;
    s.d = 8;
    s.k_true = 3;
    s.offset = 2.5;
    const Benchmark b = generate_benchmark(s);
    const Eigen::MatrixXd delta = b.synthetic.data - b.test_normal.data;
    for (Index i = 0; i < delta.rows(); ++i) {
        EXPECT_NEAR(delta.row(i).norm(), 2.5, 1e-12);
        // displacement has no component outside the planted block
        const Eigen::VectorXd coords = b.basis.transpose() * delta.row(i).transpose();
        EXPECT_LT(coords.tail(5).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Synthgen, AxisAlignedSingleCoordinate) {
    BenchmarkSpec s;
    s.rotate = false;
    s.k_true = 1;
    s.offset = 50;
    s.d = 6;
    s.n_train = 20;
    s.n_test = 10;
    const Benchmark b = generate_benchmark(s);
    const Eigen::MatrixXd delta = b.synthetic.data - b.test_normal.data;
    EXPECT_LT(delta.rightCols(5).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(delta.col(0).cwiseAbs().minCoeff(), 50.0, 1e-12);
}

TEST(Synthgen, ZeroOffsetGivesChanceAuroc) {
    BenchmarkSpec s;
    s.offset = 0.0;
    s.seed = 4;
    s.n_test = 2000;
    s.d = 10;
    s.k_true = 3;
    const Benchmark b = generate_benchmark(s);
    const SpectralModel m = spectral_decompose(fit_gaussian(b.train));
    const SweepResult r = sweep_k(whiten(m, b.test_normal), whiten(m, b.test_anomalous));
    for (double v : r.auroc_per_k) EXPECT_NEAR(v, 0.5, 0.04);
}

TEST(Synthgen, FittedSpectrumTracksPlanted) {
    BenchmarkSpec s;
    s.rotate = false;
    s.seed = 77;
    s.n_train = 4000;
    const Benchmark b = generate_benchmark(s);
    const SpectralModel m = spectral_decompose(fit_gaussian(b.train, 0.0));
    // eigenvalues of a sample covariance fluctuate by about sqrt(2/n) relative
    const double se = std::sqrt(2.0 / static_cast<double>(s.n_train));
    for (Index i = 0; i < s.d; ++i) {
        EXPECT_LE(std::abs(m.eigenvalues[i] - b.spectrum[i]) / b.spectrum[i], 5 * se + 0.25 * (i < s.k_true)) << i;
    }
    EXPECT_EQ(select_k_argmax(eigenvalue_ratio_curve(m)).k_tilde, s.k_true);
}

TEST(Synthgen, WriteBenchmarkIsByteIdentical) {
    oracle::TempDir a("syn"), b("syn");
    BenchmarkSpec s;
    s.n_train = 40;
    s.n_test = 12;
    s.d = 5;
    s.k_true = 2;
    s.seed = 123;
    write_benchmark(generate_benchmark(s), s, a.path());
    write_benchmark(generate_benchmark(s), s, b.path());
    int files = 0;
    for (const auto& e : std::filesystem::directory_iterator(a.path())) {
        const auto name = e.path().filename().string();
        EXPECT_EQ(io::read_file(e.path()), io::read_file(b / name)) << name;
        ++files;
    }
    EXPECT_EQ(files, 9);  // four matrices, four sidecars, one manifest
    const DatasetManifest m = read_manifest(a / "manifest.json");
    EXPECT_NO_THROW(validate_manifest(m));
    EXPECT_EQ(m.truth.at("k_true").get<int>(), 2);
    EXPECT_EQ(m.truth.at("rng").get<std::string>(), "splitmix64+box-muller");
    EXPECT_EQ(m.truth.at("seed").get<std::uint64_t>(), 123u);
}
