#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "adasamp/forward_model.hpp"
#include "adasamp/image.hpp"

namespace adasamp {

/// Linear-Gaussian model with the periodic roughness prior: posterior
/// precision A'A/sigma^2 + lambda T'T + ridge I. Dense, so grids are capped
/// at 4096 pixels.
struct GaussianProblem {
  SensingOperator op;
  double lambda = 1.0;
  double noise_sigma = 0.1;
  double ridge = 0.0;

  // ridge defaults to 1e-8 * lambda (T'T has the constants in its nullspace).
  static GaussianProblem make(SensingOperator op, double lambda, double noise_sigma,
                              std::optional<double> ridge = std::nullopt);
  void validate() const;
};

constexpr std::size_t kMaxOraclePixels = 4096;

struct PosteriorMoments {
  ComplexImage mean;
  Eigen::MatrixXcd covariance;
};

// Dense matrix of apply_forward; rows are coil-major flat k-space indices.
Eigen::MatrixXcd dense_forward_matrix(const SensingOperator &op);
// Dense T'T for the periodic roughness transform on `shape`.
Eigen::MatrixXcd dense_roughness_gram(Shape shape);

Eigen::MatrixXcd posterior_precision(const GaussianProblem &prob);

PosteriorMoments posterior_moments(const GaussianProblem &prob,
                                   const MeasurementSet &y);

// Covariance only (it does not depend on the data).
Eigen::MatrixXcd posterior_covariance(const GaussianProblem &prob);

// diag(A_full Sigma A_full') + sigma^2, summed over coils.
RealGrid measurement_variance(const GaussianProblem &prob,
                              const Eigen::MatrixXcd &covariance);

// Exact greedy design: argmax of measurement_variance over unmeasured points,
// values within 1e-9 relative of the maximum count as ties (lowest index).
std::vector<std::size_t> greedy_oracle_selection(const GaussianProblem &prob,
                                                 const SamplingMask &initial_mask,
                                                 std::size_t n_add);

Eigen::VectorXcd to_vector(const ComplexImage &x);
ComplexImage to_image(const Eigen::VectorXcd &v, Shape shape);

} // namespace adasamp
