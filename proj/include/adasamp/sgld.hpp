#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "adasamp/forward_model.hpp"
#include "adasamp/priors.hpp"
#include "adasamp/rng.hpp"

namespace adasamp {

struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string &msg, long step, long chain = -1)
      : std::runtime_error(msg), step(step), chain(chain) {}
  long step;
  long chain;
};

using Schedule = std::vector<double>;

enum class ScheduleKind { constant, geometric };
ScheduleKind parse_schedule_kind(std::string_view s);
std::string_view to_string(ScheduleKind k);

// constant: n copies of start; geometric: log-linear from start to end,
// both endpoints included.
Schedule make_schedule(ScheduleKind kind, std::size_t n_steps, double start,
                       double end);

enum class InitKind { adjoint, adjoint_plus_noise };
InitKind parse_init_kind(std::string_view s);
std::string_view to_string(InitKind k);

struct SGLDConfig {
  std::size_t n_steps = 0;
  std::size_t n_samples = 1;
  Schedule mu;  // prior / noise step size per step
  Schedule eta; // likelihood weight per step
  InitKind init = InitKind::adjoint_plus_noise;
  // Std of the complex Gaussian added to A'y; default 0.01 * max|A'y|.
  std::optional<double> init_noise_std;
  std::uint64_t rng_seed = 0;

  // Iterates after this many steps enter the chain's running mean;
  // default n_steps / 2.
  std::optional<std::size_t> average_after;

  // Dump every k-th iterate as `chain<i>_step<t>` arrays; 0 disables.
  std::size_t trace_every = 0;
  std::filesystem::path trace_dir;

  // Test hook: false removes the injected Langevin noise (pure gradient ascent).
  bool inject_noise = true;

  void validate() const;
};

struct ChainResult {
  ComplexImage final_state;
  ComplexImage running_mean; // mean of iterates after `average_after`
};

struct PosteriorEnsemble {
  std::vector<ComplexImage> images;          // x_i, by chain index
  std::vector<MeasurementSet> projections;   // A_full x_i + e
  std::vector<ComplexImage> chain_means;     // per-chain time averages

  std::size_t size() const { return images.size(); }
};

/// One Langevin update:
///   x + mu*score(x) - mu*eta*A'(Ax - y) + sqrt(2 mu) g,   g ~ CN(0, I).
/// `rng == nullptr` drops the noise term. Throws DivergenceError (tagged with
/// `step_index`) when the new state is non-finite or exceeds 1e6 in magnitude.
ComplexImage sgld_step(const ComplexImage &x, const MeasurementSet &y,
                       const SensingOperator &op, const ScoreFunction &score,
                       double mu, double eta, Rng *rng, long step_index = -1);

// log p(x) + log p(y|x) in the score convention: log_prior(x) - eta/2 ||Ax-y||^2.
double log_posterior(const ComplexImage &x, const MeasurementSet &y,
                     const SensingOperator &op, const ScoreFunction &score,
                     double eta);

ChainResult run_chain_detailed(const MeasurementSet &y, const SensingOperator &op,
                               const ScoreFunction &score, const SGLDConfig &cfg,
                               std::size_t chain_index);

ComplexImage run_chain(const MeasurementSet &y, const SensingOperator &op,
                       const ScoreFunction &score, const SGLDConfig &cfg,
                       std::size_t chain_index);

// Runs cfg.n_samples chains (on up to `threads` workers) and projects each
// result through the full-grid operator with fresh noise of std
// op.noise_sigma(). Output is independent of `threads`.
PosteriorEnsemble sample_posterior_ensemble(const MeasurementSet &y,
                                            const SensingOperator &op,
                                            const ScoreFunction &score,
                                            const SGLDConfig &cfg,
                                            unsigned threads = 1);

} // namespace adasamp
