#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "adnpca/featstore.hpp"

namespace adnpca {

/// SplitMix64 counter stream with Box-Muller normals. Pure integer arithmetic
/// plus libm log/cos/sin, so a seed reproduces the same sequence anywhere.
class SplitMix64 {
public:
    static constexpr std::string_view kAlgorithm = "splitmix64+box-muller";

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    double normal() noexcept;

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct BenchmarkSpec {
    std::uint64_t seed = 0;
    Index n_train = 2000;
    Index n_test = 500;
    Index d = 32;
    Index k_true = 8;
    double gap = 10.0;      // smallest noise-floor eigenvalue / largest signal-block eigenvalue
    double offset = 4.0;    // anomaly displacement in whitened sigma units
    double ramp = 1.1;      // geometric factor between consecutive noise-floor eigenvalues
    bool rotate = true;     // random orthogonal basis change
    bool fixed_direction = false;  // displace along the first planted axis only
    std::string category = "synthetic";
    int stage = 0;
};

/// Throws InvalidSpec unless 1 <= k_true < d, gap > 1, offset >= 0, ramp >= 1
/// and both sample counts are at least 2.
void validate(const BenchmarkSpec& spec);

/// Ascending planted spectrum: k_true ones, then gap * ramp^i.
Eigen::VectorXd planted_spectrum(const BenchmarkSpec& spec);

struct Benchmark {
    FeatureMatrix train;
    FeatureMatrix test_normal;
    FeatureMatrix test_anomalous;
    FeatureMatrix synthetic;  // row j is test_normal row j displaced
    Pairing pairing;          // test_normal id -> synthetic id
    Index k_true = 0;
    Eigen::VectorXd spectrum;
    Eigen::MatrixXd basis;    // columns are the planted eigenvectors
    std::uint64_t seed = 0;
};

/// Normal rows ~ N(0, basis * diag(spectrum) * basis^T); anomalous and paired
/// synthetic rows add `offset` times a direction drawn uniformly on the unit
/// sphere of the k_true smallest-variance axes.
Benchmark generate_benchmark(const BenchmarkSpec& spec);

nlohmann::json truth_json(const Benchmark& b, const BenchmarkSpec& spec);

/// Writes the four FEATMAT1 files and `manifest.json` into `dir`.
std::filesystem::path write_benchmark(const Benchmark& b, const BenchmarkSpec& spec,
                                      const std::filesystem::path& dir);

}  // namespace adnpca
