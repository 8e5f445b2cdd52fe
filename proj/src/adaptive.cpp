#include "adasamp/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "adasamp/fft.hpp"
#include "adasamp/rng.hpp"

namespace adasamp {

RealGrid compute_variance_map(const PosteriorEnsemble &ens) {
  const std::size_t m = ens.projections.size();
  if (m < 2) throw ArgumentError("compute_variance_map: need >= 2 ensemble members");
  const Shape shape = ens.projections.front().shape();
  const std::size_t nc = ens.projections.front().num_coils();
  for (const auto &p : ens.projections) {
    require_same_shape(p.shape(), shape, "compute_variance_map");
    if (p.num_coils() != nc) throw DimensionError("compute_variance_map: coil mismatch");
  }
  RealGrid var(shape);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t n = 0; n < shape.size(); ++n) {
      // shifted by the first member: exact zero for identical members
      const cplx ref = ens.projections.front().coils[c][n];
      cplx mean{0.0, 0.0};
      for (const auto &p : ens.projections) mean += p.coils[c][n] - ref;
      mean *= inv_m;
      double acc = 0.0;
      for (const auto &p : ens.projections) acc += std::norm(p.coils[c][n] - ref - mean);
      var[n] += acc * inv_m;
    }
  return var;
}

std::vector<std::size_t> select_next(const RealGrid &var_map,
                                     const SamplingMask &mask,
                                     const SelectionPolicy &policy) {
  require_same_shape(var_map.shape, mask.shape(), "select_next");
  if (policy.batch_size < 1) throw ArgumentError("select_next: batch size must be >= 1");
  const std::size_t B = policy.batch_size;
  const Shape shape = mask.shape();

  struct Candidate {
    double score;
    std::size_t id;
  };
  std::vector<Candidate> cands;
  if (policy.mode == SamplingMode::pointwise) {
    for (std::size_t n = 0; n < shape.size(); ++n)
      if (!mask.contains(n)) cands.push_back({var_map[n], n});
  } else {
    for (std::size_t c = 0; c < shape.cols; ++c) {
      if (mask.column_acquired(c)) continue;
      double s = 0.0;
      for (std::size_t r = 0; r < shape.rows; ++r) s += var_map[r * shape.cols + c];
      cands.push_back({s, c});
    }
  }
  if (cands.size() < B)
    throw ExhaustionError("select_next: only " + std::to_string(cands.size()) +
                          " unmeasured candidates for a batch of " + std::to_string(B));

  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(B),
                    cands.end(), [](const Candidate &a, const Candidate &b) {
                      return a.score > b.score || (a.score == b.score && a.id < b.id);
                    });

  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < B; ++k) {
    if (policy.mode == SamplingMode::pointwise) {
      out.push_back(cands[k].id);
    } else {
      for (std::size_t r = 0; r < shape.rows; ++r)
        out.push_back(r * shape.cols + cands[k].id);
    }
  }
  return out;
}

AcquisitionState initial_state(const ComplexImage &ground_truth,
                               const SensingOperator &op_template,
                               SamplingMask mask, std::uint64_t noise_seed) {
  const SensingOperator op = op_template.with_mask(mask);
  AcquisitionState s{std::move(mask), {}, {}};
  s.measurements = add_noise(apply_forward(ground_truth, op), s.mask,
                             op.noise_sigma(), noise_seed);
  return s;
}

AcquisitionState acquire(AcquisitionState state, const ComplexImage &ground_truth,
                         const SensingOperator &op_template,
                         std::span<const std::size_t> indices,
                         std::uint64_t noise_seed, const RealGrid *var_map) {
  SamplingMask fresh(state.mask.shape(), state.mask.mode());
  fresh.add(indices); // duplicates within `indices`
  for (std::size_t n : indices)
    if (state.mask.contains(n))
      throw ArgumentError("acquire: index " + std::to_string(n) + " already acquired");

  const SensingOperator op = op_template.with_mask(fresh);
  const MeasurementSet y_new = add_noise(apply_forward(ground_truth, op), fresh,
                                         op.noise_sigma(), noise_seed);
  state.mask.add(indices);
  for (std::size_t c = 0; c < y_new.num_coils(); ++c)
    for (std::size_t n : indices) state.measurements.coils[c][n] = y_new.coils[c][n];

  HistoryEntry h;
  h.iteration = state.history.size() + 1;
  h.selected.assign(indices.begin(), indices.end());
  for (std::size_t n : indices)
    h.variance_at_selection.push_back(var_map ? (*var_map)[n]
                                              : std::numeric_limits<double>::quiet_NaN());
  state.history.push_back(std::move(h));
  return state;
}

AdaptiveResult run_adaptive_acquisition(const ComplexImage &ground_truth,
                                        const SensingOperator &op_template,
                                        const ScoreFunction &score,
                                        const SGLDConfig &sgld_cfg,
                                        const SelectionPolicy &policy,
                                        std::size_t n_add,
                                        const SamplingMask &initial_mask,
                                        const AdaptiveOptions &opts) {
  if (initial_mask.empty())
    throw ArgumentError("run_adaptive_acquisition: initial mask must be non-empty");
  require_same_shape(ground_truth.shape(), op_template.shape(), "run_adaptive_acquisition");
  sgld_cfg.validate();

  AcquisitionState state = initial_state(ground_truth, op_template, initial_mask,
                                         derive_seed(opts.seed, "acquire", 0));
  auto ensemble_at = [&](std::size_t k) {
    SGLDConfig cfg = sgld_cfg;
    cfg.rng_seed = derive_seed(sgld_cfg.rng_seed ^ opts.seed, "iteration", k);
    return sample_posterior_ensemble(state.measurements,
                                     op_template.with_mask(state.mask), score, cfg,
                                     opts.threads);
  };

  for (std::size_t k = 1; k <= n_add; ++k) {
    const PosteriorEnsemble ens = ensemble_at(k);
    RealGrid var = compute_variance_map(ens);
    const auto picks = select_next(var, state.mask, policy);
    state = acquire(std::move(state), ground_truth, op_template, picks,
                    derive_seed(opts.seed, "acquire", k), &var);
    if (opts.keep_variance_maps) state.history.back().variance_map = std::move(var);
  }
  PosteriorEnsemble final_ens = ensemble_at(n_add + 1);
  return {std::move(state), std::move(final_ens)};
}

// ---------------------------------------------------------------- baselines

BaselineKind parse_baseline_kind(std::string_view s) {
  if (s == "uniform_random") return BaselineKind::uniform_random;
  if (s == "poisson_disk") return BaselineKind::poisson_disk;
  if (s == "low_frequency") return BaselineKind::low_frequency;
  if (s == "variable_density") return BaselineKind::variable_density;
  throw ArgumentError("unknown baseline kind: " + std::string(s));
}

std::string_view to_string(BaselineKind k) {
  switch (k) {
  case BaselineKind::uniform_random: return "uniform_random";
  case BaselineKind::poisson_disk: return "poisson_disk";
  case BaselineKind::low_frequency: return "low_frequency";
  case BaselineKind::variable_density: return "variable_density";
  }
  return "?";
}

namespace {

// A sampling unit: a point, or a whole column in line mode.
struct Unit {
  std::size_t id;
  double fr, fc; // signed frequency coordinates
};

std::vector<Unit> sampling_units(Shape shape, SamplingMode mode) {
  std::vector<Unit> units;
  if (mode == SamplingMode::line) {
    for (std::size_t c = 0; c < shape.cols; ++c)
      units.push_back({c, 0.0, static_cast<double>(signed_frequency(c, shape.cols))});
  } else {
    for (std::size_t r = 0; r < shape.rows; ++r)
      for (std::size_t c = 0; c < shape.cols; ++c)
        units.push_back({r * shape.cols + c,
                         static_cast<double>(signed_frequency(r, shape.rows)),
                         static_cast<double>(signed_frequency(c, shape.cols))});
  }
  return units;
}

SamplingMask mask_from_units(Shape shape, SamplingMode mode,
                             const std::vector<std::size_t> &ids) {
  SamplingMask m(shape, mode);
  if (mode == SamplingMode::pointwise) {
    m.add(ids);
  } else {
    for (std::size_t c : ids) m.add(m.column_indices(c));
  }
  return m;
}

std::size_t check_target(Shape shape, SamplingMode mode, std::size_t target) {
  const std::size_t avail = mode == SamplingMode::line ? shape.cols : shape.size();
  if (target < 1 || target > avail)
    throw ArgumentError("baseline mask: infeasible target_count " +
                        std::to_string(target) + " (available " +
                        std::to_string(avail) + ")");
  return avail;
}

// Units in random order with DC (id 0) first.
std::vector<std::size_t> shuffled_order(std::size_t n, Rng &rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin() + 1, order.end(), rng);
  return order;
}

std::vector<std::size_t> dart_throw(const std::vector<Unit> &units,
                                    const std::vector<std::size_t> &order,
                                    double radius) {
  const double r2 = radius * radius;
  std::vector<std::size_t> accepted;
  for (std::size_t u : order) {
    bool ok = true;
    for (std::size_t a : accepted) {
      const double dr = units[u].fr - units[a].fr, dc = units[u].fc - units[a].fc;
      if (dr * dr + dc * dc < r2) {
        ok = false;
        break;
      }
    }
    if (ok) accepted.push_back(u);
  }
  return accepted;
}

} // namespace

PoissonDiskMask poisson_disk_mask(Shape shape, std::size_t target_count,
                                  std::uint64_t seed, SamplingMode mode) {
  check_target(shape, mode, target_count);
  const auto units = sampling_units(shape, mode);
  Rng rng = make_rng(seed);
  const auto order = shuffled_order(units.size(), rng);

  double lo = 0.0;
  double hi = std::hypot(static_cast<double>(shape.rows), static_cast<double>(shape.cols)) + 1.0;
  std::vector<std::size_t> best = dart_throw(units, order, lo);
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto acc = dart_throw(units, order, mid);
    if (acc.size() >= target_count) {
      lo = mid;
      best = std::move(acc);
    } else {
      hi = mid;
    }
  }
  best.resize(target_count); // acceptance order; keeps DC and the distance bound
  std::vector<std::size_t> ids;
  for (std::size_t u : best) ids.push_back(units[u].id);
  return {mask_from_units(shape, mode, ids), lo};
}

SamplingMask make_baseline_mask(BaselineKind kind, Shape shape,
                                std::size_t target_count, std::uint64_t seed,
                                SamplingMode mode) {
  const std::size_t avail = check_target(shape, mode, target_count);
  const auto units = sampling_units(shape, mode);
  std::vector<std::size_t> chosen; // unit positions

  switch (kind) {
  case BaselineKind::poisson_disk:
    return poisson_disk_mask(shape, target_count, seed, mode).mask;

  case BaselineKind::low_frequency: {
    std::vector<std::size_t> order(avail);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ra = units[a].fr * units[a].fr + units[a].fc * units[a].fc;
      const double rb = units[b].fr * units[b].fr + units[b].fc * units[b].fc;
      return ra < rb;
    });
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(target_count));
    break;
  }

  case BaselineKind::uniform_random: {
    Rng rng = make_rng(seed);
    auto order = shuffled_order(avail, rng);
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(target_count));
    break;
  }

  case BaselineKind::variable_density: {
    // Weighted sampling without replacement (Efraimidis-Spirakis keys), weight
    // decaying with normalized radius.
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double half_r = std::max(1.0, static_cast<double>(shape.rows) / 2.0);
    const double half_c = std::max(1.0, static_cast<double>(shape.cols) / 2.0);
    std::vector<std::pair<double, std::size_t>> keys;
    for (std::size_t u = 1; u < avail; ++u) {
      const double rad = std::hypot(units[u].fr / half_r, units[u].fc / half_c);
      const double w = std::pow(1.0 + 8.0 * rad, -2.0);
      keys.emplace_back(std::log(u01(rng)) / w, u);
    }
    std::stable_sort(keys.begin(), keys.end(),
                     [](const auto &a, const auto &b) { return a.first > b.first; });
    chosen.push_back(0);
    for (std::size_t k = 0; k + 1 < target_count; ++k) chosen.push_back(keys[k].second);
    break;
  }
  }

  std::vector<std::size_t> ids;
  for (std::size_t u : chosen) ids.push_back(units[u].id);
  return mask_from_units(shape, mode, ids);
}

} // namespace adasamp
