#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "glcp/rng.hpp"
#include "glcp/types.hpp"

namespace glcp {

/// Unnormalized Gaussian similarity on projected embeddings with per-dimension
/// variance h^2 * eigenvalue. Values lie in (0, 1], equal to 1 exactly at zero
/// offset. Zero variances are floored at 1e-12 relative to the largest
/// eigenvalue (absolute 1e-12 when all eigenvalues vanish) so the kernel stays
/// finite on degenerate subspaces.
class AnisotropicKernel {
 public:
  AnisotropicKernel(double h, const Eigen::VectorXd& eigenvalues) {
    if (!(h > 0.0) || !std::isfinite(h)) throw param_error("kernel: bandwidth must be positive");
    if (eigenvalues.size() < 1) throw param_error("kernel: empty eigenvalue vector");
    double lam_max = 0.0;
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
      if (!(eigenvalues(k) >= 0.0)) throw param_error("kernel: eigenvalues must be non-negative");
      lam_max = std::max(lam_max, eigenvalues(k));
    }
    double floor = lam_max > 0.0 ? 1e-12 * lam_max : 1e-12;
    scale_.resize(eigenvalues.size());
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k)
      scale_(k) = h * h * std::max(eigenvalues(k), floor);
  }

  int dim() const { return static_cast<int>(scale_.size()); }
  const Eigen::VectorXd& scale() const { return scale_; }

  /// Scaled squared distance, accumulated in dimension order. Callers that
  /// shortcut the sum must reproduce this order to stay bit-identical.
  double sq_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    check_dim(a);
    check_dim(b);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < scale_.size(); ++k) {
      double dz = a(k) - b(k);
      acc += dz * dz / scale_(k);
    }
    return acc;
  }

  double value(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return std::exp(-0.5 * sq_distance(a, b));
  }

  double log_value(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return -0.5 * sq_distance(a, b);
  }

  /// Draw from the kernel's own Gaussian, for anchor perturbations.
  Eigen::VectorXd sample_offset(RngStream& rng) const {
    Eigen::VectorXd out(scale_.size());
    for (Eigen::Index k = 0; k < scale_.size(); ++k)
      out(k) = std::sqrt(scale_(k)) * rng.normal();
    return out;
  }

 private:
  void check_dim(const Eigen::VectorXd& v) const {
    if (v.size() != scale_.size()) throw input_error("kernel: dimension mismatch");
  }

  Eigen::VectorXd scale_;
};

/// Normalized isotropic Gaussian density with bandwidth h; underflows to 0 at
/// extreme distances, so weight normalization should go through the log form.
inline double isotropic_kernel_value(double h, const Eigen::VectorXd& a,
                                     const Eigen::VectorXd& b) {
  if (!(h > 0.0) || !std::isfinite(h)) throw param_error("kernel: bandwidth must be positive");
  if (a.size() != b.size()) throw input_error("kernel: dimension mismatch");
  const double d = static_cast<double>(a.size());
  double sq = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    double dz = a(k) - b(k);
    sq += dz * dz;
  }
  const double two_pi = 2.0 * 3.14159265358979323846;
  return std::pow(two_pi * h * h, -0.5 * d) * std::exp(-sq / (2.0 * h * h));
}

/// Log of the isotropic density up to its constant factor, for stable softmax
/// normalization over a candidate set.
inline double isotropic_log_kernel(double h, const Eigen::VectorXd& a,
                                   const Eigen::VectorXd& b) {
  if (!(h > 0.0) || !std::isfinite(h)) throw param_error("kernel: bandwidth must be positive");
  if (a.size() != b.size()) throw input_error("kernel: dimension mismatch");
  double sq = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    double dz = a(k) - b(k);
    sq += dz * dz;
  }
  return -sq / (2.0 * h * h);
}

}  // namespace glcp
