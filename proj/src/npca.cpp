#include "adnpca/npca.hpp"

#include <cmath>

#include "adnpca/error.hpp"

namespace adnpca {

namespace {

void require_k(Index k, Index d) {
    if (k < 1 || k > d) {
        throw Error(ErrorKind::KOutOfRange, "k = " + std::to_string(k) + " outside 1.." + std::to_string(d));
    }
}

// Sums accumulate left to right so every consumer sees identical bits.
Eigen::MatrixXd running_sums(const Eigen::MatrixXd& data) {
    Eigen::MatrixXd sums(data.rows(), data.cols());
    for (Index i = 0; i < data.rows(); ++i) {
        double acc = 0.0;
        for (Index c = 0; c < data.cols(); ++c) {
            acc += data(i, c) * data(i, c);
            sums(i, c) = acc;
        }
    }
    return sums;
}

}  // namespace

Eigen::MatrixXd npca_project(const WhitenedMatrix& w, Index k) {
    require_k(k, w.cols());
    return w.data.leftCols(k);
}

NpcaScores npca_score(const WhitenedMatrix& w, Index k) {
    require_k(k, w.cols());
    NpcaScores out;
    out.k = k;
    out.mean_sq.resize(w.rows());
    out.euclid.resize(w.rows());
    for (Index i = 0; i < w.rows(); ++i) {
        double acc = 0.0;
        for (Index c = 0; c < k; ++c) acc += w.data(i, c) * w.data(i, c);
        out.mean_sq[i] = acc / static_cast<double>(k);
        out.euclid[i] = std::sqrt(acc);
    }
    return out;
}

CumulativeEnergy::CumulativeEnergy(const WhitenedMatrix& w) : sums_(running_sums(w.data)) {}

Eigen::VectorXd CumulativeEnergy::sum_sq(Index k) const {
    require_k(k, max_k());
    return sums_.col(k - 1);
}

Eigen::VectorXd CumulativeEnergy::mean_sq(Index k) const {
    return sum_sq(k) / static_cast<double>(k);
}

}  // namespace adnpca
