#include "adnpca/gaussian.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "adnpca/error.hpp"
#include "adnpca/io.hpp"

namespace adnpca {

using nlohmann::json;

GaussianModel fit_gaussian(const Eigen::Ref<const Eigen::MatrixXd>& rows, double shrinkage) {
    const Index n = rows.rows();
    const Index d = rows.cols();
    if (n < 2) {
        throw Error(ErrorKind::TooFewSamples, "need at least 2 training rows, got " + std::to_string(n));
    }
    if (d < 1) {
        throw Error(ErrorKind::DimensionMismatch, "training matrix has no columns");
    }
    if (!(shrinkage >= 0.0 && shrinkage < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "shrinkage must lie in [0, 1), got " + io::format_double(shrinkage));
    }
    if (!rows.allFinite()) {
        throw Error(ErrorKind::NonFiniteEntry, "training matrix contains NaN or Inf");
    }

    GaussianModel model;
    model.n_fit = n;
    model.shrinkage = shrinkage;
    model.mu = rows.colwise().mean().transpose();

    for (Index j = 0; j < d; ++j) {
        if (rows.col(j).maxCoeff() == rows.col(j).minCoeff()) {
            model.has_constant_column = true;
            break;
        }
    }

    const Eigen::MatrixXd centered = rows.rowwise() - model.mu.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    cov = 0.5 * (cov + cov.transpose()).eval();

    if (shrinkage > 0.0) {
        const double target = cov.trace() / static_cast<double>(d);
        cov *= (1.0 - shrinkage);
        cov.diagonal().array() += shrinkage * target;
    }
    model.sigma = std::move(cov);
    return model;
}

GaussianModel fit_gaussian(const FeatureMatrix& train, double shrinkage) {
    if (train.split != Split::Train) {
        throw Error(ErrorKind::InvalidArgument,
                    "fit requires a train split, got " + std::string(to_string(train.split)));
    }
    GaussianModel model = fit_gaussian(train.data, shrinkage);
    model.category = train.category;
    model.stage = train.stage;
    return model;
}

std::vector<std::string> fit_warnings(const GaussianModel& model) {
    std::vector<std::string> out;
    if (model.rank_deficient()) {
        out.push_back("n-1 = " + std::to_string(model.n_fit - 1) + " < d = " + std::to_string(model.dim()) +
                      ": effective rank " + std::to_string(model.effective_rank()) +
                      ", k above it is numerically unreliable");
    }
    if (model.has_constant_column) {
        out.push_back(model.shrinkage > 0.0
                          ? "training data has a constant column; shrinkage keeps the covariance invertible"
                          : "training data has a constant column and shrinkage is 0; whitening will fail");
    }
    return out;
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, const double* data, Index count) {
    for (Index i = 0; i < count; ++i) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(data[i]);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xFFu;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::uint64_t fingerprint_of(const SpectralModel& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, s.source.mu.data(), s.source.mu.size());
    h = fnv1a(h, s.eigenvalues.data(), s.eigenvalues.size());
    h = fnv1a(h, s.eigenvectors.data(), s.eigenvectors.size());
    return h;
}

void fix_signs(Eigen::MatrixXd& v) {
    for (Index c = 0; c < v.cols(); ++c) {
        Index best = 0;
        double best_abs = -1.0;
        for (Index r = 0; r < v.rows(); ++r) {
            const double a = std::abs(v(r, c));
            if (a > best_abs) {
                best_abs = a;
                best = r;
            }
        }
        if (v(best, c) < 0.0) v.col(c) = -v.col(c);
    }
}

void require_whitenable(const SpectralModel& spectral) {
    const GaussianModel& src = spectral.source;
    if (src.has_constant_column && src.shrinkage == 0.0) {
        throw Error(ErrorKind::DegenerateInput, "constant training column with shrinkage 0; covariance is singular");
    }
    const double lmin = spectral.eigenvalues.minCoeff();
    const double lmax = spectral.eigenvalues.maxCoeff();
    const double floor = lmax * static_cast<double>(spectral.dim()) * std::numeric_limits<double>::epsilon();
    if (!(lmin > floor)) {
        throw Error(ErrorKind::DegenerateInput, "smallest eigenvalue " + io::format_double(lmin) +
                                                    " is not positive; raise the shrinkage");
    }
}

void require_dim(const SpectralModel& spectral, Index d) {
    if (d != spectral.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "expected dimension " + std::to_string(spectral.dim()) +
                                                      ", got " + std::to_string(d));
    }
}

}  // namespace

SpectralModel spectral_decompose(const GaussianModel& model) {
    if (model.sigma.rows() != model.dim() || model.sigma.cols() != model.dim() || model.dim() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "covariance shape does not match the mean");
    }
    if (!model.sigma.allFinite()) {
        throw Error(ErrorKind::NumericalFailure, "covariance contains NaN or Inf");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.sigma);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::NumericalFailure, "symmetric eigensolver did not converge");
    }
    SpectralModel out;
    out.source = model;
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
    fix_signs(out.eigenvectors);
    out.fingerprint = fingerprint_of(out);
    return out;
}

Eigen::VectorXd whiten_vector(const SpectralModel& spectral, const Eigen::Ref<const Eigen::VectorXd>& x) {
    require_dim(spectral, x.size());
    require_whitenable(spectral);
    Eigen::VectorXd proj = spectral.eigenvectors.transpose() * (x - spectral.mu());
    return proj.array() / spectral.eigenvalues.array().sqrt();
}

WhitenedMatrix whiten(const SpectralModel& spectral, const Eigen::Ref<const Eigen::MatrixXd>& rows) {
    require_dim(spectral, rows.cols());
    require_whitenable(spectral);
    WhitenedMatrix out;
    out.data = (rows.rowwise() - spectral.mu().transpose()) * spectral.eigenvectors;
    const Eigen::RowVectorXd inv_sd = spectral.eigenvalues.array().sqrt().inverse().matrix().transpose();
    out.data.array().rowwise() *= inv_sd.array();
    out.model_fingerprint = spectral.fingerprint;
    out.image_ids.reserve(static_cast<std::size_t>(rows.rows()));
    for (Index i = 0; i < rows.rows(); ++i) out.image_ids.push_back(std::to_string(i));
    return out;
}

WhitenedMatrix whiten(const SpectralModel& spectral, const FeatureMatrix& m) {
    WhitenedMatrix out = whiten(spectral, Eigen::Ref<const Eigen::MatrixXd>(m.data));
    out.image_ids = m.image_ids;
    out.split = m.split;
    return out;
}

double mahalanobis(const SpectralModel& spectral, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return whiten_vector(spectral, x).norm();
}

double gaussian_logpdf(const SpectralModel& spectral, const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double m = mahalanobis(spectral, x);
    const double d = static_cast<double>(spectral.dim());
    const double log_det = spectral.eigenvalues.array().log().sum();
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det + m * m);
}

double gaussian_logpdf(const GaussianModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return gaussian_logpdf(spectral_decompose(model), x);
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Index rows, Index cols, const char* what) {
    if (static_cast<Index>(j.size()) != rows) {
        throw Error(ErrorKind::MalformedFile, std::string(what) + " has the wrong number of rows");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Index>(row.size()) != cols) {
            throw Error(ErrorKind::MalformedFile, std::string(what) + " has a ragged row");
        }
        for (Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

Eigen::VectorXd vector_from_json(const json& j, Index size, const char* what) {
    if (static_cast<Index>(j.size()) != size) {
        throw Error(ErrorKind::MalformedFile, std::string(what) + " has the wrong length");
    }
    Eigen::VectorXd v(size);
    for (Index i = 0; i < size; ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

}  // namespace

json spectral_to_json(const SpectralModel& spectral, bool include_sigma) {
    const GaussianModel& g = spectral.source;
    json j;
    j["format"] = "adnpca-model/1";
    j["category"] = g.category;
    j["stage"] = g.stage;
    j["dim"] = spectral.dim();
    j["n_fit"] = g.n_fit;
    j["shrinkage"] = g.shrinkage;
    j["has_constant_column"] = g.has_constant_column;
    j["effective_rank"] = g.effective_rank();
    j["mu"] = std::vector<double>(g.mu.data(), g.mu.data() + g.mu.size());
    j["eigenvalues"] =
        std::vector<double>(spectral.eigenvalues.data(), spectral.eigenvalues.data() + spectral.dim());
    j["eigenvectors"] = matrix_to_json(spectral.eigenvectors);
    j["sigma"] = include_sigma ? matrix_to_json(g.sigma) : json(nullptr);
    return j;
}

SpectralModel spectral_from_json(const json& j) {
    try {
        if (j.value("format", std::string{}) != "adnpca-model/1") {
            throw Error(ErrorKind::MalformedFile, "not an adnpca model file");
        }
        const Index d = j.at("dim").get<Index>();
        SpectralModel s;
        GaussianModel& g = s.source;
        g.category = j.value("category", std::string{});
        g.stage = j.value("stage", 0);
        g.n_fit = j.at("n_fit").get<Index>();
        g.shrinkage = j.at("shrinkage").get<double>();
        g.has_constant_column = j.value("has_constant_column", false);
        g.mu = vector_from_json(j.at("mu"), d, "mu");
        s.eigenvalues = vector_from_json(j.at("eigenvalues"), d, "eigenvalues");
        s.eigenvectors = matrix_from_json(j.at("eigenvectors"), d, d, "eigenvectors");
        if (j.contains("sigma") && !j.at("sigma").is_null()) {
            g.sigma = matrix_from_json(j.at("sigma"), d, d, "sigma");
        } else {
            g.sigma = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
        }
        s.fingerprint = fingerprint_of(s);
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedFile, std::string("bad model json: ") + e.what());
    }
}

void save_model(const SpectralModel& spectral, const std::filesystem::path& path, bool force_sigma) {
    const bool include_sigma = force_sigma || spectral.dim() <= kSigmaInlineLimit;
    io::write_file_atomic(path, spectral_to_json(spectral, include_sigma).dump() + "\n");
}

SpectralModel load_model(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::IoFailure, "no such model file '" + path.string() + "'");
    }
    try {
        return spectral_from_json(json::parse(io::read_file(path)));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedFile, "bad model file '" + path.string() + "': " + e.what());
    }
}

}  // namespace adnpca
