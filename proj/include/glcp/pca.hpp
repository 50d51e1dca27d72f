#pragma once

#include <Eigen/Dense>

#include "glcp/types.hpp"

namespace glcp {

/// Principal subspace of a set of embedding rows.
///
/// Invariants: components has orthonormal columns; eigenvalues are
/// non-negative and sorted descending; each component's largest-magnitude
/// entry is positive (first index wins ties), which pins an otherwise
/// arbitrary sign.
struct PcaModel {
  Eigen::VectorXd mean;         // input dimension
  Eigen::MatrixXd components;   // input dimension x retained dimension
  Eigen::VectorXd eigenvalues;  // retained dimension

  int input_dim() const { return static_cast<int>(mean.size()); }
  int retained_dim() const { return static_cast<int>(eigenvalues.size()); }
};

/// Fits the top-c principal subspace of rows (one observation per row) using
/// the 1/n covariance convention. Requires at least two rows and
/// 1 <= c <= min(rows-1, cols). Uses a dense eigendecomposition for input
/// dimension up to 512 and a thin SVD beyond that.
PcaModel fit_pca(const Eigen::MatrixXd& rows, int c);

/// Centers by the fitted mean and projects onto the retained components.
Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd pca_project_rows(const PcaModel& model, const Eigen::MatrixXd& rows);

}  // namespace glcp
