#include "glcp/pca.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace glcp {
namespace {

constexpr int kDenseEigLimit = 512;

void fix_component_signs(Eigen::MatrixXd& components) {
  for (int j = 0; j < components.cols(); ++j) {
    int best = 0;
    double best_abs = std::abs(components(0, j));
    for (int i = 1; i < components.rows(); ++i) {
      double a = std::abs(components(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (components(best, j) < 0.0) components.col(j) = -components.col(j);
  }
}

}  // namespace

PcaModel fit_pca(const Eigen::MatrixXd& rows, int c) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  if (n < 2) throw input_error("pca: need at least two rows");
  if (d < 1) throw input_error("pca: need at least one column");
  if (!rows.allFinite()) throw input_error("pca: non-finite embedding entry");
  const Eigen::Index max_c = std::min(n - 1, d);
  if (c < 1 || c > max_c) throw param_error("pca: retained dimension out of range");

  PcaModel model;
  model.mean = rows.colwise().mean();
  Eigen::MatrixXd centered = rows.rowwise() - model.mean.transpose();

  if (d <= kDenseEigLimit) {
    Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw input_error("pca: eigendecomposition failed");
    // Eigen returns ascending order; take the top c reversed.
    model.components.resize(d, c);
    model.eigenvalues.resize(c);
    for (int j = 0; j < c; ++j) {
      Eigen::Index src = d - 1 - j;
      model.components.col(j) = eig.eigenvectors().col(src);
      model.eigenvalues(j) = std::max(0.0, eig.eigenvalues()(src));
    }
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    model.components = svd.matrixV().leftCols(c);
    model.eigenvalues.resize(c);
    for (int j = 0; j < c; ++j) {
      double s = svd.singularValues()(j);
      model.eigenvalues(j) = s * s / static_cast<double>(n);
    }
  }
  fix_component_signs(model.components);
  return model;
}

Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.mean.size()) throw input_error("pca: projection dimension mismatch");
  return model.components.transpose() * (x - model.mean);
}

Eigen::MatrixXd pca_project_rows(const PcaModel& model, const Eigen::MatrixXd& rows) {
  if (rows.cols() != model.mean.size()) throw input_error("pca: projection dimension mismatch");
  return (rows.rowwise() - model.mean.transpose()) * model.components;
}

}  // namespace glcp
