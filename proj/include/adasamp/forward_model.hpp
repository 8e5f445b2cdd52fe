#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adasamp/image.hpp"

namespace adasamp {

enum class SamplingMode { pointwise, line };

SamplingMode parse_sampling_mode(std::string_view s);
std::string_view to_string(SamplingMode m);

/// Append-only set of acquired k-space indices (unshifted layout, DC at 0).
///
/// In line mode the acquired set is always a union of complete columns
/// (phase-encode lines); `add` rejects index lists that would break this.
class SamplingMask {
public:
  SamplingMask() = default;
  SamplingMask(Shape shape, SamplingMode mode = SamplingMode::pointwise);

  static SamplingMask full(Shape shape);

  const Shape &shape() const { return shape_; }
  SamplingMode mode() const { return mode_; }
  std::size_t count() const { return order_.size(); }
  bool empty() const { return order_.empty(); }
  bool contains(std::size_t n) const { return member_[n] != 0; }

  // Indices in acquisition order.
  const std::vector<std::size_t> &acquired() const { return order_; }
  std::span<const std::uint8_t> membership() const { return member_; }

  // Throws ArgumentError on out-of-range, duplicate or already-acquired
  // indices, or (line mode) incomplete columns. Strong guarantee.
  void add(std::span<const std::size_t> indices);

  std::vector<std::size_t> column_indices(std::size_t col) const;
  bool column_acquired(std::size_t col) const;
  std::size_t lines_acquired() const;

private:
  Shape shape_;
  SamplingMode mode_ = SamplingMode::pointwise;
  std::vector<std::size_t> order_;
  std::vector<std::uint8_t> member_;
};

struct CoilSensitivities {
  std::vector<ComplexImage> maps;

  CoilSensitivities() = default;
  explicit CoilSensitivities(std::vector<ComplexImage> maps);

  std::size_t num_coils() const { return maps.size(); }
  const Shape &shape() const { return maps.front().shape(); }
};

/// Masked, coil-weighted orthonormal Fourier operator A plus its noise level.
class SensingOperator {
public:
  SensingOperator(SamplingMask mask, CoilSensitivities coils,
                  double noise_sigma);

  const SamplingMask &mask() const { return mask_; }
  const CoilSensitivities &coils() const { return coils_; }
  double noise_sigma() const { return noise_sigma_; }
  const Shape &shape() const { return mask_.shape(); }
  std::size_t num_coils() const { return coils_.num_coils(); }

  SensingOperator with_mask(SamplingMask mask) const;
  // Same coils and noise, all-ones mask.
  SensingOperator full_grid() const;

private:
  SamplingMask mask_;
  CoilSensitivities coils_;
  double noise_sigma_;
};

/// Per-coil k-space grids, dense on the full grid.
struct MeasurementSet {
  std::vector<ComplexImage> coils;

  MeasurementSet() = default;
  MeasurementSet(Shape shape, std::size_t num_coils)
      : coils(num_coils, ComplexImage(shape)) {}

  std::size_t num_coils() const { return coils.size(); }
  const Shape &shape() const { return coils.front().shape(); }
  friend bool operator==(const MeasurementSet &, const MeasurementSet &) = default;
};

cplx inner(const MeasurementSet &a, const MeasurementSet &b);
double norm(const MeasurementSet &y);

// y_c = Mask . FFT(S_c . x)
MeasurementSet apply_forward(const ComplexImage &x, const SensingOperator &op);
// sum_c conj(S_c) . IFFT(Mask . y_c)
ComplexImage apply_adjoint(const MeasurementSet &y, const SensingOperator &op);
// A'(Ax - y), the negated Gaussian log-likelihood gradient for unit weight.
ComplexImage apply_residual_adjoint(const ComplexImage &x,
                                    const MeasurementSet &y,
                                    const SensingOperator &op);

// Adds circular complex Gaussian noise (E|e|^2 = sigma^2) at on-mask entries.
MeasurementSet add_noise(MeasurementSet y, const SamplingMask &mask,
                         double sigma, std::uint64_t seed);

enum class PhantomKind { shepp_logan_like, smooth_bumps, piecewise_constant_1d };
PhantomKind parse_phantom_kind(std::string_view s);
std::string_view to_string(PhantomKind k);

ComplexImage make_phantom(PhantomKind kind, Shape shape);

enum class CoilProfile { uniform, gaussian_lobes };
CoilProfile parse_coil_profile(std::string_view s);
std::string_view to_string(CoilProfile p);

CoilSensitivities make_coil_maps(int num_coils, Shape shape, CoilProfile profile);

} // namespace adasamp
