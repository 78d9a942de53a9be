#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "adnpca/featstore.hpp"

namespace adnpca {

inline constexpr double kDefaultShrinkage = 1e-6;

/// Multivariate Gaussian fitted to normal training features.
///
/// `sigma = (1 - shrinkage) * S + shrinkage * (trace(S) / d) * I`, with S the
/// unbiased sample covariance. A non-zero shrinkage makes sigma strictly
/// positive definite whenever trace(S) > 0.
struct GaussianModel {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    double shrinkage = 0.0;
    Index n_fit = 0;
    // Some training column was constant. Only fatal when whitening with shrinkage 0.
    bool has_constant_column = false;
    std::string category;
    int stage = 0;

    Index dim() const noexcept { return mu.size(); }
    /// Rank of the sample covariance, at most n_fit - 1.
    Index effective_rank() const noexcept { return std::min<Index>(n_fit - 1, dim()); }
    bool rank_deficient() const noexcept { return n_fit - 1 < dim(); }
};

/// Fits rows of `rows` (n x d). Throws TooFewSamples for n < 2 and
/// InvalidArgument for shrinkage outside [0, 1).
GaussianModel fit_gaussian(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                           double shrinkage = kDefaultShrinkage);

/// As above, but requires a train split and carries category/stage over.
GaussianModel fit_gaussian(const FeatureMatrix& train, double shrinkage = kDefaultShrinkage);

/// Human-readable warnings about the fit (rank deficiency, constant columns).
std::vector<std::string> fit_warnings(const GaussianModel& model);

/// Eigendecomposition of a GaussianModel with ascending eigenvalues.
///
/// Column i of `eigenvectors` pairs with `eigenvalues[i]`. Each column's
/// largest-magnitude entry is positive (lowest index wins a tie), which makes
/// the basis reproducible across runs.
struct SpectralModel {
    GaussianModel source;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    std::uint64_t fingerprint = 0;

    Index dim() const noexcept { return eigenvalues.size(); }
    const Eigen::VectorXd& mu() const noexcept { return source.mu; }
};

SpectralModel spectral_decompose(const GaussianModel& model);

/// Features in the whitened eigenbasis: column i is v_i^T (x - mu) / sqrt(lambda_i),
/// columns ordered by ascending eigenvalue.
struct WhitenedMatrix {
    Eigen::MatrixXd data;
    std::vector<std::string> image_ids;
    Split split = Split::Train;
    std::uint64_t model_fingerprint = 0;

    Index rows() const noexcept { return data.rows(); }
    Index cols() const noexcept { return data.cols(); }
};

Eigen::VectorXd whiten_vector(const SpectralModel& spectral,
                              const Eigen::Ref<const Eigen::VectorXd>& x);

WhitenedMatrix whiten(const SpectralModel& spectral, const Eigen::Ref<const Eigen::MatrixXd>& rows);
WhitenedMatrix whiten(const SpectralModel& spectral, const FeatureMatrix& m);

/// sqrt((x - mu)^T Sigma^-1 (x - mu)), evaluated as the norm of the whitened vector.
double mahalanobis(const SpectralModel& spectral, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Log density of the fitted Gaussian; log det from the eigenvalues.
double gaussian_logpdf(const SpectralModel& spectral, const Eigen::Ref<const Eigen::VectorXd>& x);
double gaussian_logpdf(const GaussianModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

// Model files. With `include_sigma == false` sigma is rebuilt from the eigenpairs on load.
inline constexpr Index kSigmaInlineLimit = 256;
nlohmann::json spectral_to_json(const SpectralModel& spectral, bool include_sigma);
SpectralModel spectral_from_json(const nlohmann::json& j);
void save_model(const SpectralModel& spectral, const std::filesystem::path& path,
                bool force_sigma = false);
SpectralModel load_model(const std::filesystem::path& path);

}  // namespace adnpca
