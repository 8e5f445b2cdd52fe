#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "adasamp/forward_model.hpp"
#include "adasamp/priors.hpp"
#include "adasamp/sgld.hpp"

namespace adasamp {

struct HistoryEntry {
  std::size_t iteration = 0;
  std::vector<std::size_t> selected;
  std::vector<double> variance_at_selection; // NaN when not selected by variance
  std::optional<RealGrid> variance_map;
};

struct AcquisitionState {
  SamplingMask mask;
  MeasurementSet measurements;
  std::vector<HistoryEntry> history;
};

struct SelectionPolicy {
  std::size_t batch_size = 1; // points, or lines in line mode
  SamplingMode mode = SamplingMode::pointwise;
};

// Per-index population variance of the ensemble projections, summed over
// coils: mean_i |y_i[n] - mean[n]|^2.
RealGrid compute_variance_map(const PosteriorEnsemble &ens);

// Top-B unmeasured points (or columns, by summed variance) in descending
// variance order, ties to the lowest flat index / column. Line mode returns
// every index of the chosen columns.
std::vector<std::size_t> select_next(const RealGrid &var_map,
                                     const SamplingMask &mask,
                                     const SelectionPolicy &policy);

// Measures `ground_truth` at `mask` under op_template's coils and noise.
AcquisitionState initial_state(const ComplexImage &ground_truth,
                               const SensingOperator &op_template,
                               SamplingMask mask, std::uint64_t noise_seed);

// Simulates measurements at `indices` with fresh noise, appends them to the
// state and records a history entry (variance values taken from var_map when
// given).
AcquisitionState acquire(AcquisitionState state, const ComplexImage &ground_truth,
                         const SensingOperator &op_template,
                         std::span<const std::size_t> indices,
                         std::uint64_t noise_seed,
                         const RealGrid *var_map = nullptr);

struct AdaptiveOptions {
  std::uint64_t seed = 0;         // governs measurement noise and chains
  unsigned threads = 1;
  bool keep_variance_maps = false;
};

struct AdaptiveResult {
  AcquisitionState state;
  PosteriorEnsemble ensemble; // drawn under the final mask
};

// Outer loop: ensemble -> variance map -> select -> acquire, n_add times,
// then one more ensemble on the final mask.
AdaptiveResult run_adaptive_acquisition(const ComplexImage &ground_truth,
                                        const SensingOperator &op_template,
                                        const ScoreFunction &score,
                                        const SGLDConfig &sgld_cfg,
                                        const SelectionPolicy &policy,
                                        std::size_t n_add,
                                        const SamplingMask &initial_mask,
                                        const AdaptiveOptions &opts = {});

enum class BaselineKind { uniform_random, poisson_disk, low_frequency, variable_density };
BaselineKind parse_baseline_kind(std::string_view s);
std::string_view to_string(BaselineKind k);

struct PoissonDiskMask {
  SamplingMask mask;
  double radius; // minimum pairwise distance, in k-space grid units
};

// Dart throwing in centered frequency coordinates with the radius bisected
// to the largest value yielding >= target_count samples, truncated to exactly
// target_count. Line mode works on columns.
PoissonDiskMask poisson_disk_mask(Shape shape, std::size_t target_count,
                                  std::uint64_t seed,
                                  SamplingMode mode = SamplingMode::pointwise);

// Every kind includes DC. In line mode target_count counts columns.
SamplingMask make_baseline_mask(BaselineKind kind, Shape shape,
                                std::size_t target_count, std::uint64_t seed,
                                SamplingMode mode = SamplingMode::pointwise);

} // namespace adasamp
