#include "adasamp/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "adasamp/priors.hpp"

namespace adasamp {

GaussianProblem GaussianProblem::make(SensingOperator op, double lambda,
                                      double noise_sigma,
                                      std::optional<double> ridge) {
  GaussianProblem p{std::move(op), lambda, noise_sigma, ridge.value_or(1e-8 * lambda)};
  p.validate();
  return p;
}

void GaussianProblem::validate() const {
  if (op.shape().size() > kMaxOraclePixels)
    throw ArgumentError("GaussianProblem: grid too large for dense oracle");
  if (!(lambda >= 0.0)) throw ArgumentError("GaussianProblem: lambda must be >= 0");
  if (!(noise_sigma > 0.0)) throw ArgumentError("GaussianProblem: noise_sigma must be > 0");
  if (!(ridge >= 0.0)) throw ArgumentError("GaussianProblem: ridge must be >= 0");
}

Eigen::VectorXcd to_vector(const ComplexImage &x) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = x[i];
  return v;
}

ComplexImage to_image(const Eigen::VectorXcd &v, Shape shape) {
  if (static_cast<std::size_t>(v.size()) != shape.size())
    throw DimensionError("to_image: length mismatch");
  ComplexImage x(shape);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = v(static_cast<Eigen::Index>(i));
  return x;
}

Eigen::MatrixXcd dense_forward_matrix(const SensingOperator &op) {
  const Shape s = op.shape();
  const auto N = static_cast<Eigen::Index>(s.size());
  const auto C = static_cast<Eigen::Index>(op.num_coils());
  Eigen::MatrixXcd A(C * N, N);
  ComplexImage e(s);
  for (Eigen::Index j = 0; j < N; ++j) {
    e[static_cast<std::size_t>(j)] = 1.0;
    const MeasurementSet col = apply_forward(e, op);
    for (Eigen::Index c = 0; c < C; ++c)
      for (Eigen::Index n = 0; n < N; ++n)
        A(c * N + n, j) = col.coils[static_cast<std::size_t>(c)][static_cast<std::size_t>(n)];
    e[static_cast<std::size_t>(j)] = 0.0;
  }
  return A;
}

Eigen::MatrixXcd dense_roughness_gram(Shape shape) {
  const RoughnessTransform T(shape);
  const auto N = static_cast<Eigen::Index>(shape.size());
  Eigen::MatrixXcd G(N, N);
  ComplexImage e(shape);
  for (Eigen::Index j = 0; j < N; ++j) {
    e[static_cast<std::size_t>(j)] = 1.0;
    G.col(j) = to_vector(T.apply_gram(e));
    e[static_cast<std::size_t>(j)] = 0.0;
  }
  return G;
}

Eigen::MatrixXcd posterior_precision(const GaussianProblem &prob) {
  prob.validate();
  const Eigen::MatrixXcd A = dense_forward_matrix(prob.op);
  const auto N = A.cols();
  Eigen::MatrixXcd H = (A.adjoint() * A) / (prob.noise_sigma * prob.noise_sigma);
  H += prob.lambda * dense_roughness_gram(prob.op.shape());
  H += prob.ridge * Eigen::MatrixXcd::Identity(N, N);
  return H;
}

namespace {

Eigen::LLT<Eigen::MatrixXcd> factor(const GaussianProblem &prob) {
  const Eigen::MatrixXcd H = posterior_precision(prob);
  Eigen::LLT<Eigen::MatrixXcd> llt(H);
  const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal().real();
  const double scale = H.diagonal().real().maxCoeff();
  if (llt.info() != Eigen::Success || d.minCoeff() * d.minCoeff() < 1e-13 * scale)
    throw NumericalError("posterior precision is singular; use a ridge epsilon > 0 "
                         "or include the DC sample");
  return llt;
}

} // namespace

Eigen::MatrixXcd posterior_covariance(const GaussianProblem &prob) {
  const auto llt = factor(prob);
  const auto N = static_cast<Eigen::Index>(prob.op.shape().size());
  return llt.solve(Eigen::MatrixXcd::Identity(N, N));
}

PosteriorMoments posterior_moments(const GaussianProblem &prob,
                                   const MeasurementSet &y) {
  const auto llt = factor(prob);
  const auto N = static_cast<Eigen::Index>(prob.op.shape().size());
  const Eigen::VectorXcd b =
      to_vector(apply_adjoint(y, prob.op)) / (prob.noise_sigma * prob.noise_sigma);
  return {to_image(llt.solve(b), prob.op.shape()),
          llt.solve(Eigen::MatrixXcd::Identity(N, N))};
}

RealGrid measurement_variance(const GaussianProblem &prob,
                              const Eigen::MatrixXcd &covariance) {
  const Shape s = prob.op.shape();
  const auto N = static_cast<Eigen::Index>(s.size());
  if (covariance.rows() != N || covariance.cols() != N)
    throw DimensionError("measurement_variance: covariance size mismatch");
  const Eigen::MatrixXcd A = dense_forward_matrix(prob.op.full_grid());
  // diag(A S A') row by row: sum_j (A S)_{nj} conj(A_{nj})
  const Eigen::VectorXd d = (A * covariance).cwiseProduct(A.conjugate()).rowwise().sum().real();
  RealGrid out(s);
  const double s2 = prob.noise_sigma * prob.noise_sigma;
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(prob.op.num_coils()); ++c)
    for (Eigen::Index n = 0; n < N; ++n)
      out[static_cast<std::size_t>(n)] += d(c * N + n) + s2;
  return out;
}

std::vector<std::size_t> greedy_oracle_selection(const GaussianProblem &prob,
                                                 const SamplingMask &initial_mask,
                                                 std::size_t n_add) {
  require_same_shape(initial_mask.shape(), prob.op.shape(), "greedy_oracle_selection");
  GaussianProblem p = prob;
  p.op = prob.op.with_mask(initial_mask);
  std::vector<std::size_t> picks;
  for (std::size_t k = 0; k < n_add; ++k) {
    const RealGrid var = measurement_variance(p, posterior_covariance(p));
    double vmax = -1.0;
    for (std::size_t n = 0; n < var.values.size(); ++n)
      if (!p.op.mask().contains(n)) vmax = std::max(vmax, var[n]);
    if (vmax < 0.0) throw ExhaustionError("greedy_oracle_selection: no unmeasured points");
    const double tie = 1e-9 * std::abs(vmax);
    std::size_t pick = 0;
    for (std::size_t n = 0; n < var.values.size(); ++n)
      if (!p.op.mask().contains(n) && var[n] >= vmax - tie) {
        pick = n;
        break;
      }
    const std::size_t one[] = {pick};
    SamplingMask grown = p.op.mask();
    grown.add(one);
    p.op = p.op.with_mask(std::move(grown));
    picks.push_back(pick);
  }
  return picks;
}

} // namespace adasamp
