#include "adasamp/sgld.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "adasamp/array_io.hpp"

namespace adasamp {

ScheduleKind parse_schedule_kind(std::string_view s) {
  if (s == "constant") return ScheduleKind::constant;
  if (s == "geometric") return ScheduleKind::geometric;
  throw ArgumentError("unknown schedule kind: " + std::string(s));
}

std::string_view to_string(ScheduleKind k) {
  return k == ScheduleKind::constant ? "constant" : "geometric";
}

Schedule make_schedule(ScheduleKind kind, std::size_t n_steps, double start,
                       double end) {
  if (!(start > 0.0) || !(end > 0.0))
    throw ArgumentError("make_schedule: start and end must be > 0");
  if (kind == ScheduleKind::constant) return Schedule(n_steps, start);
  if (n_steps < 2) throw ArgumentError("make_schedule: geometric needs n_steps >= 2");
  Schedule s(n_steps);
  const double la = std::log(start), lb = std::log(end);
  for (std::size_t t = 0; t < n_steps; ++t) {
    const double f = static_cast<double>(t) / static_cast<double>(n_steps - 1);
    s[t] = std::exp(la + f * (lb - la));
  }
  s.front() = start;
  s.back() = end;
  return s;
}

InitKind parse_init_kind(std::string_view s) {
  if (s == "adjoint") return InitKind::adjoint;
  if (s == "adjoint_plus_noise") return InitKind::adjoint_plus_noise;
  throw ArgumentError("unknown init kind: " + std::string(s));
}

std::string_view to_string(InitKind k) {
  return k == InitKind::adjoint ? "adjoint" : "adjoint_plus_noise";
}

void SGLDConfig::validate() const {
  if (n_samples < 1) throw ArgumentError("SGLDConfig: n_samples must be >= 1");
  if (mu.size() != n_steps || eta.size() != n_steps)
    throw ArgumentError("SGLDConfig: schedule lengths must equal n_steps");
  for (std::size_t t = 0; t < n_steps; ++t)
    if (!(mu[t] > 0.0) || !(eta[t] > 0.0))
      throw ArgumentError("SGLDConfig: schedule values must be > 0 (step " +
                          std::to_string(t) + ")");
  if (init_noise_std && !(*init_noise_std >= 0.0))
    throw ArgumentError("SGLDConfig: init_noise_std must be >= 0");
}

namespace {

constexpr double kDivergenceBound = 1e6;

void check_state(const ComplexImage &x, long step) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const cplx v = x[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) ||
        std::abs(v) > kDivergenceBound)
      throw DivergenceError("SGLD diverged at step " + std::to_string(step) +
                                " (pixel " + std::to_string(i) + ")",
                            step);
  }
}

} // namespace

ComplexImage sgld_step(const ComplexImage &x, const MeasurementSet &y,
                       const SensingOperator &op, const ScoreFunction &score,
                       double mu, double eta, Rng *rng, long step_index) {
  if (!(mu > 0.0) || !(eta > 0.0))
    throw ArgumentError("sgld_step: mu and eta must be > 0");
  const ComplexImage prior = score(x);
  const ComplexImage resid = apply_residual_adjoint(x, y, op);
  ComplexImage next(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    next[i] = x[i] + mu * prior[i] - mu * eta * resid[i];
  if (rng) {
    // sqrt(2 mu) * CN(0,1): each real coordinate has std sqrt(mu).
    std::normal_distribution<double> n(0.0, std::sqrt(mu));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double re = n(*rng);
      const double im = n(*rng);
      next[i] += cplx{re, im};
    }
  }
  check_state(next, step_index);
  return next;
}

double log_posterior(const ComplexImage &x, const MeasurementSet &y,
                     const SensingOperator &op, const ScoreFunction &score,
                     double eta) {
  MeasurementSet r = apply_forward(x, op);
  for (std::size_t c = 0; c < r.num_coils(); ++c) r.coils[c] -= y.coils[c];
  const double n = norm(r);
  return score.log_prior(x) - 0.5 * eta * n * n;
}

ChainResult run_chain_detailed(const MeasurementSet &y, const SensingOperator &op,
                               const ScoreFunction &score, const SGLDConfig &cfg,
                               std::size_t chain_index) {
  cfg.validate();
  Rng rng = make_rng(derive_seed(cfg.rng_seed, "chain", chain_index));

  ComplexImage x = apply_adjoint(y, op);
  if (cfg.init == InitKind::adjoint_plus_noise) {
    const double std = cfg.init_noise_std.value_or(0.01 * x.max_abs());
    if (std > 0.0)
      for (auto &v : x.values()) v += complex_gaussian(rng, std * std);
  }

  const std::size_t avg_after = std::min(cfg.average_after.value_or(cfg.n_steps / 2),
                                         cfg.n_steps);
  ComplexImage mean(x.shape());
  std::size_t n_avg = 0;
  Rng *noise = cfg.inject_noise ? &rng : nullptr;

  for (std::size_t t = 0; t < cfg.n_steps; ++t) {
    x = sgld_step(x, y, op, score, cfg.mu[t], cfg.eta[t], noise,
                  static_cast<long>(t));
    if (t + 1 > avg_after) {
      mean += x;
      ++n_avg;
    }
    if (cfg.trace_every > 0 && !cfg.trace_dir.empty() &&
        (t + 1) % cfg.trace_every == 0)
      io::write_array(cfg.trace_dir / ("chain" + std::to_string(chain_index) +
                                       "_step" + std::to_string(t + 1)),
                      x);
  }
  if (n_avg == 0)
    mean = x;
  else
    mean *= 1.0 / static_cast<double>(n_avg);
  return {std::move(x), std::move(mean)};
}

ComplexImage run_chain(const MeasurementSet &y, const SensingOperator &op,
                       const ScoreFunction &score, const SGLDConfig &cfg,
                       std::size_t chain_index) {
  return run_chain_detailed(y, op, score, cfg, chain_index).final_state;
}

PosteriorEnsemble sample_posterior_ensemble(const MeasurementSet &y,
                                            const SensingOperator &op,
                                            const ScoreFunction &score,
                                            const SGLDConfig &cfg,
                                            unsigned threads) {
  cfg.validate();
  const std::size_t n = cfg.n_samples;
  const SensingOperator full = op.full_grid();
  const SamplingMask &full_mask = full.mask();

  PosteriorEnsemble ens;
  ens.images.resize(n);
  ens.projections.resize(n);
  ens.chain_means.resize(n);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t i) {
    try {
      auto chain = run_chain_detailed(y, op, score, cfg, i);
      ens.projections[i] =
          add_noise(apply_forward(chain.final_state, full), full_mask,
                    op.noise_sigma(), derive_seed(cfg.rng_seed, "projection", i));
      ens.images[i] = std::move(chain.final_state);
      ens.chain_means[i] = std::move(chain.running_mean);
    } catch (const DivergenceError &e) {
      errors[i] = std::make_exception_ptr(DivergenceError(
          std::string("chain ") + std::to_string(i) + ": " + e.what(), e.step,
          static_cast<long>(i)));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
      });
  }

  for (const auto &e : errors)
    if (e) std::rethrow_exception(e);
  return ens;
}

} // namespace adasamp
