#include "adnpca/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/QR>

#include "adnpca/error.hpp"

namespace adnpca {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t SplitMix64::next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

void validate(const BenchmarkSpec& spec) {
    auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidSpec, why); };
    if (spec.d < 2) fail("d must be at least 2");
    if (spec.k_true < 1 || spec.k_true >= spec.d) {
        fail("k_true must satisfy 1 <= k_true < d (k_true = " + std::to_string(spec.k_true) +
             ", d = " + std::to_string(spec.d) + ")");
    }
    if (!(spec.gap > 1.0)) fail("gap must exceed 1");
    if (!(spec.offset >= 0.0) || !std::isfinite(spec.offset)) fail("offset must be finite and non-negative");
    if (!(spec.ramp >= 1.0) || !std::isfinite(spec.ramp)) fail("ramp must be finite and at least 1");
    if (spec.n_train < 2 || spec.n_test < 2) fail("n_train and n_test must be at least 2");
}

Eigen::VectorXd planted_spectrum(const BenchmarkSpec& spec) {
    validate(spec);
    Eigen::VectorXd lambda(spec.d);
    for (Index i = 0; i < spec.d; ++i) {
        lambda[i] = i < spec.k_true ? 1.0 : spec.gap * std::pow(spec.ramp, static_cast<double>(i - spec.k_true));
    }
    return lambda;
}

namespace {

Eigen::MatrixXd random_orthogonal(SplitMix64& rng, Index d) {
    Eigen::MatrixXd g(d, d);
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < d; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

Eigen::MatrixXd draw_normal_rows(SplitMix64& rng, Index n, const Eigen::MatrixXd& loading) {
    const Index d = loading.rows();
    Eigen::MatrixXd z(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) z(i, j) = rng.normal();
    }
    return z * loading.transpose();
}

// One displacement per row, expressed in feature coordinates.
Eigen::MatrixXd draw_displacements(SplitMix64& rng, Index n, const BenchmarkSpec& spec,
                                   const Eigen::MatrixXd& basis) {
    Eigen::MatrixXd out(n, spec.d);
    const auto planted = basis.leftCols(spec.k_true);
    Eigen::VectorXd u(spec.k_true);
    for (Index i = 0; i < n; ++i) {
        if (spec.fixed_direction) {
            u.setZero();
            u[0] = 1.0;
        } else {
            do {
                for (Index c = 0; c < spec.k_true; ++c) u[c] = rng.normal();
            } while (u.norm() == 0.0);
            u.normalize();
        }
        out.row(i) = (spec.offset * (planted * u)).transpose();
    }
    return out;
}

std::vector<std::string> make_ids(std::string_view prefix, Index n) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(n));
    char buf[64];
    for (Index i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "%.*s_%06lld", static_cast<int>(prefix.size()), prefix.data(),
                      static_cast<long long>(i));
        ids.emplace_back(buf);
    }
    return ids;
}

}  // namespace

Benchmark generate_benchmark(const BenchmarkSpec& spec) {
    validate(spec);
    SplitMix64 rng(spec.seed);

    Benchmark b;
    b.seed = spec.seed;
    b.k_true = spec.k_true;
    b.spectrum = planted_spectrum(spec);
    b.basis = spec.rotate ? random_orthogonal(rng, spec.d) : Eigen::MatrixXd::Identity(spec.d, spec.d);
    const Eigen::MatrixXd loading = b.basis * b.spectrum.cwiseSqrt().asDiagonal();

    Eigen::MatrixXd train = draw_normal_rows(rng, spec.n_train, loading);
    Eigen::MatrixXd test_normal = draw_normal_rows(rng, spec.n_test, loading);
    Eigen::MatrixXd test_anom = draw_normal_rows(rng, spec.n_test, loading);
    test_anom += draw_displacements(rng, spec.n_test, spec, b.basis);
    Eigen::MatrixXd synthetic = test_normal + draw_displacements(rng, spec.n_test, spec, b.basis);

    auto normal_ids = make_ids("test_normal", spec.n_test);
    auto synth_ids = make_ids("synthetic", spec.n_test);
    for (std::size_t i = 0; i < normal_ids.size(); ++i) b.pairing.push_back({normal_ids[i], synth_ids[i]});

    b.train = make_feature_matrix(std::move(train), spec.category, spec.stage, Split::Train,
                                  make_ids("train", spec.n_train));
    b.test_normal = make_feature_matrix(std::move(test_normal), spec.category, spec.stage, Split::TestNormal,
                                        std::move(normal_ids));
    b.test_anomalous = make_feature_matrix(std::move(test_anom), spec.category, spec.stage, Split::TestAnomalous,
                                           make_ids("test_anomalous", spec.n_test));
    b.synthetic = make_feature_matrix(std::move(synthetic), spec.category, spec.stage, Split::Synthetic,
                                      std::move(synth_ids));
    return b;
}

json truth_json(const Benchmark& b, const BenchmarkSpec& spec) {
    return {{"k_true", b.k_true},
            {"spectrum", std::vector<double>(b.spectrum.data(), b.spectrum.data() + b.spectrum.size())},
            {"seed", b.seed},
            {"rng", std::string(SplitMix64::kAlgorithm)},
            {"d", spec.d},
            {"n_train", spec.n_train},
            {"n_test", spec.n_test},
            {"gap", spec.gap},
            {"offset", spec.offset},
            {"ramp", spec.ramp},
            {"rotate", spec.rotate},
            {"fixed_direction", spec.fixed_direction}};
}

fs::path write_benchmark(const Benchmark& b, const BenchmarkSpec& spec, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create '" + dir.string() + "'");

    DatasetManifest manifest;
    manifest.category = spec.category;
    manifest.pairing = b.pairing;
    manifest.truth = truth_json(b, spec);
    const std::string tag = "stage" + std::to_string(spec.stage);
    auto emit = [&](const FeatureMatrix& m, const std::optional<Pairing>& pairing) {
        const fs::path file = dir / (std::string(to_string(m.split)) + "_" + tag + ".featmat");
        write_feature_matrix(m, file, pairing);
        manifest.stages.push_back({m.stage, file, m.split});
    };
    emit(b.train, std::nullopt);
    emit(b.test_normal, std::nullopt);
    emit(b.test_anomalous, std::nullopt);
    emit(b.synthetic, b.pairing);

    const fs::path manifest_path = dir / "manifest.json";
    write_manifest(manifest, manifest_path);
    return manifest_path;
}

}  // namespace adnpca
