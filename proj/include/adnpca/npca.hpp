#pragma once

#include <Eigen/Core>

#include "adnpca/gaussian.hpp"

namespace adnpca {

/// Per-image NPCA scores over the k smallest-eigenvalue whitened axes.
/// Higher is more anomalous.
struct NpcaScores {
    Index k = 0;
    Eigen::VectorXd mean_sq;  // (1/k) * sum of squared coordinates
    Eigen::VectorXd euclid;   // sqrt of the same sum
};

/// First k columns of the whitened matrix (ascending-eigenvalue order).
Eigen::MatrixXd npca_project(const WhitenedMatrix& w, Index k);

NpcaScores npca_score(const WhitenedMatrix& w, Index k);

/// Row-wise running sums of squared whitened coordinates, so scores for every
/// k come out of one O(n*d) pass. Column k-1 holds the sum over the first k axes.
class CumulativeEnergy {
public:
    explicit CumulativeEnergy(const WhitenedMatrix& w);

    Index rows() const noexcept { return sums_.rows(); }
    Index max_k() const noexcept { return sums_.cols(); }

    Eigen::VectorXd sum_sq(Index k) const;
    Eigen::VectorXd mean_sq(Index k) const;

private:
    Eigen::MatrixXd sums_;
};

}  // namespace adnpca
