#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <variant>
#include <vector>

#include "adasamp/forward_model.hpp"
#include "adasamp/image.hpp"

namespace adasamp {

// Periodic first-order finite differences. For a (rows, cols) grid the output
// stacks the row-direction differences on top of the column-direction ones,
// giving shape (2*rows, cols); 1D grids give a single (rows, 1) field.
class RoughnessTransform {
public:
  explicit RoughnessTransform(Shape shape) : shape_(shape) {}

  const Shape &shape() const { return shape_; }
  Shape output_shape() const;

  ComplexImage apply(const ComplexImage &x) const;
  ComplexImage apply_adjoint(const ComplexImage &d) const;
  // T'T x, without materializing Tx.
  ComplexImage apply_gram(const ComplexImage &x) const;

private:
  Shape shape_;
};

ComplexImage apply_T(const ComplexImage &x);

struct PatchDataset {
  std::vector<ComplexImage> patches;

  PatchDataset() = default;
  explicit PatchDataset(std::vector<ComplexImage> p);
  const Shape &shape() const { return patches.front().shape(); }
};

struct RoughnessPrior {
  double lambda;
};

// Gaussian-kernel density estimate on the training patches:
//   p(x) ~ sum_j exp(-||x - mu_j||^2 / (2 h^2))
struct EmpiricalPrior {
  PatchDataset data;
  double bandwidth;
};

enum class PriorKind { roughness, empirical };
PriorKind parse_prior_kind(std::string_view s);
std::string_view to_string(PriorKind k);

/// Score function grad log p(x), immutable once built.
///
/// Scores are gradients with respect to the real and imaginary parts taken as
/// independent real coordinates, returned as (d/dRe + i d/dIm). The
/// log-density they differentiate is `log_prior`.
class ScoreFunction {
public:
  explicit ScoreFunction(RoughnessPrior p);
  explicit ScoreFunction(EmpiricalPrior p);

  PriorKind kind() const;
  const RoughnessPrior *roughness() const { return std::get_if<RoughnessPrior>(&impl_); }
  const EmpiricalPrior *empirical() const { return std::get_if<EmpiricalPrior>(&impl_); }

  ComplexImage operator()(const ComplexImage &x) const;
  // Unnormalized log-density (up to an additive constant).
  double log_prior(const ComplexImage &x) const;

private:
  std::variant<RoughnessPrior, EmpiricalPrior> impl_;
};

// -lambda T'T x
ComplexImage score_roughness(const ComplexImage &x, double lambda);

ScoreFunction fit_empirical_score(PatchDataset data, double bandwidth);

ComplexImage eval_score(const ScoreFunction &f, const ComplexImage &x);

// Synthetic training set: the given phantom with random circular shifts of a
// few pixels and amplitude jitter of +-20%.
PatchDataset make_training_set(PhantomKind kind, Shape shape, std::size_t count,
                               std::uint64_t seed);

// `<stem>.json` header {kind, bandwidth, num_patches, patch_shape} plus the
// patches stacked row-wise in `<stem>_patches` (repo array format).
void save_empirical_prior(const std::filesystem::path &stem,
                          const EmpiricalPrior &p);
EmpiricalPrior load_empirical_prior(const std::filesystem::path &stem);

} // namespace adasamp
