// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "adasamp/adaptive.hpp"
#include "adasamp/harness.hpp"
#include "adasamp/oracle.hpp"
#include "adasamp/priors.hpp"
#include "adasamp/sgld.hpp"
#include "test_util.hpp"

using namespace adasamp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok;
  std::string detail;
};

std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

SensingOperator uniform_op(SamplingMask mask, double sigma) {
  const Shape s = mask.shape();
  return SensingOperator(std::move(mask), make_coil_maps(1, s, CoilProfile::uniform), sigma);
}

SGLDConfig constant_config(std::size_t steps, std::size_t chains, double mu, double eta,
                           std::uint64_t seed) {
  SGLDConfig cfg;
  cfg.n_steps = steps;
  cfg.n_samples = chains;
  cfg.mu = make_schedule(ScheduleKind::constant, steps, mu, mu);
  cfg.eta = make_schedule(ScheduleKind::constant, steps, eta, eta);
  cfg.rng_seed = seed;
  return cfg;
}

double pearson(const std::vector<double> &a, const std::vector<double> &b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= a.size();
  mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// 1. Adjoint identity <Ax, y> = <x, A'y>.
Outcome adjoint_exactness() {
  std::mt19937_64 rng(101);
  const Shape shapes[] = {{16, 1}, {33, 1}, {8, 8}, {12, 20}, {31, 17}};
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Shape s = shapes[t % 5];
    const int coils = 1 + t % 4;
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    const SensingOperator op(testutil::random_mask(s, frac(rng), rng),
                             make_coil_maps(coils, s, t % 3 ? CoilProfile::gaussian_lobes
                                                            : CoilProfile::uniform),
                             0.0);
    const auto x = testutil::random_image(s, rng);
    const auto y = testutil::random_measurements(s, static_cast<std::size_t>(coils), rng);
    const auto Ax = apply_forward(x, op);
    const auto Aty = apply_adjoint(y, op);
    const double err = std::abs(inner(Ax, y) - inner(x.data(), Aty.data())) / (norm(Ax) * norm(y));
    worst = std::max(worst, err);
  }
  return {worst < 1e-10, fmt("max relative error %.2e over 100 instances", worst)};
}

// 2. Scores against central differences of independent log-density loops.
Outcome score_correctness() {
  std::mt19937_64 rng(202);
  const Shape s{6, 5};
  const double lambda = 2.5, h = 1.2;
  std::vector<ComplexImage> mus;
  for (int j = 0; j < 6; ++j) mus.push_back(testutil::random_image(s, rng));
  const ScoreFunction rough(RoughnessPrior{lambda});
  const ScoreFunction emp = fit_empirical_score(PatchDataset(mus), h);
  double worst_r = 0, worst_e = 0;
  for (int t = 0; t < 10; ++t) {
    const auto x = testutil::random_image(s, rng);
    const auto fd_r = testutil::fd_gradient(
        [&](const ComplexImage &z) { return -0.5 * lambda * testutil::roughness_energy_loop(z); },
        x, 1e-5);
    const auto fd_e = testutil::fd_gradient(
        [&](const ComplexImage &z) { return testutil::mixture_log_density(mus, h, z); }, x, 1e-5);
    worst_r = std::max(worst_r, testutil::rel_diff(eval_score(rough, x), fd_r));
    worst_e = std::max(worst_e, testutil::rel_diff(eval_score(emp, x), fd_e));
  }
  return {worst_r < 1e-4 && worst_e < 1e-4,
          fmt("max relative error roughness %.2e, empirical %.2e", worst_r, worst_e)};
}

struct GaussianCase {
  SensingOperator op;
  GaussianProblem prob;
  ComplexImage truth;
};

GaussianCase gaussian_case(std::size_t n, std::size_t initial, double lambda, double sigma) {
  const Shape s{n, 1};
  auto op = uniform_op(make_baseline_mask(BaselineKind::low_frequency, s, initial, 0), sigma);
  auto prob = GaussianProblem::make(op, lambda, sigma);
  return {std::move(op), std::move(prob), make_phantom(PhantomKind::piecewise_constant_1d, s)};
}

// 3. SGLD ensemble vs the closed-form Gaussian posterior.
Outcome sgld_oracle_agreement() {
  const double lambda = 1.0, sigma = 0.1;
  const auto g = gaussian_case(16, 8, lambda, sigma);
  const auto y = add_noise(apply_forward(g.truth, g.op), g.op.mask(), sigma, 303);
  const auto exact = posterior_moments(g.prob, y);
  const auto cfg = constant_config(3000, 32, 0.01, 1.0 / (sigma * sigma), 303);
  const auto ens = sample_posterior_ensemble(y, g.op, ScoreFunction(RoughnessPrior{lambda}), cfg);

  // chain mean = per-chain average of the post-burn-in iterates
  ComplexImage mean(g.truth.shape());
  for (const auto &m : ens.chain_means) mean += m;
  mean *= 1.0 / static_cast<double>(ens.size());
  const double err = testutil::rel_diff(mean, exact.mean);
  const double r = pearson(compute_variance_map(ens).values,
                           measurement_variance(g.prob, exact.covariance).values);
  return {err < 0.05 && r > 0.9, fmt("mean relative L2 %.4f (< 0.05), variance-map Pearson r %.4f (> 0.9)", err, r)};
}

// 4. First 5 adaptive picks vs the exact greedy design.
Outcome greedy_agreement() {
  const double lambda = 1.0, sigma = 0.1;
  const auto g = gaussian_case(16, 4, lambda, sigma);
  const auto oracle = greedy_oracle_selection(g.prob, g.op.mask(), 5);
  const std::set<std::size_t> want(oracle.begin(), oracle.end());
  const ScoreFunction score(RoughnessPrior{lambda});
  int good = 0;
  std::string overlaps;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    AdaptiveOptions opts;
    opts.seed = 400 + seed;
    const auto r = run_adaptive_acquisition(
        g.truth, g.op, score, constant_config(1500, 16, 0.01, 1.0 / (sigma * sigma), seed),
        {1, SamplingMode::pointwise}, 5, g.op.mask(), opts);
    const auto &order = r.state.mask.acquired();
    std::size_t overlap = 0;
    for (std::size_t k = g.op.mask().count(); k < order.size(); ++k) overlap += want.count(order[k]);
    overlaps += (overlaps.empty() ? "" : ",") + std::to_string(overlap);
    if (overlap >= 3) ++good;
  }
  return {good >= 4, "overlap per seed [" + overlaps + "] of 5; seeds with >= 3: " +
                         std::to_string(good) + "/5"};
}

// 5. Variance map and selection vs loop / sort oracles.
Outcome unit_oracles() {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> coarse(0, 6);
  double worst = 0.0;
  int mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    const bool line = t % 2 == 1;
    const Shape s{4 + static_cast<std::size_t>(t % 5), 3 + static_cast<std::size_t>(t % 7)};
    PosteriorEnsemble e;
    const std::size_t members = 2 + static_cast<std::size_t>(t % 9);
    for (std::size_t i = 0; i < members; ++i)
      e.projections.push_back(testutil::random_measurements(s, 1 + t % 3, rng));
    const auto v = compute_variance_map(e);
    const auto o = testutil::loop_variance(e);
    for (std::size_t n = 0; n < o.size(); ++n) worst = std::max(worst, std::abs(v[n] - o[n]));

    RealGrid quantized(s); // coarse values force ties
    for (auto &x : quantized.values) x = coarse(rng) * 0.25;
    SamplingMask m(s, line ? SamplingMode::line : SamplingMode::pointwise);
    if (line) {
      for (std::size_t c = 0; c < s.cols; ++c)
        if (coarse(rng) < 2) m.add(m.column_indices(c));
    } else {
      m = testutil::random_mask(s, 0.3, rng);
    }
    const std::size_t avail = line ? s.cols - m.lines_acquired() : s.size() - m.count();
    if (avail == 0) continue;
    const SelectionPolicy p{1 + static_cast<std::size_t>(t) % std::min<std::size_t>(avail, 3),
                            line ? SamplingMode::line : SamplingMode::pointwise};
    for (const RealGrid *map : {static_cast<const RealGrid *>(&quantized), &v})
      if (select_next(*map, m, p) != testutil::sort_oracle(*map, m, p)) ++mismatches;
  }
  return {worst <= 1e-12 && mismatches == 0,
          fmt("max variance deviation %.2e, selection mismatches %.0f", worst, mismatches)};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const fs::path kRunDir = fs::temp_directory_path() / "adasamp_acceptance";

// 6. End-to-end comparison at 64x64, 10x.
Outcome end_to_end() {
  ExperimentConfig c; // defaults are the criterion-6 setting
  double sa = 0, su = 0, sp = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    c.seed = seed;
    c.output_dir = seed == 0 ? kRunDir / "run_a" : fs::path{};
    const auto r = run_experiment(c);
    const double a = r.method("adaptive").psnr_db, u = r.method("uniform_random").psnr_db,
                 p = r.method("poisson_disk").psnr_db;
    sa += a, su += u, sp += p;
    per_seed += fmt(" [%.2f/%.2f/%.2f]", a, u, p);
  }
  sa /= 5, su /= 5, sp /= 5;
  return {sa >= su + 1.0 && sa >= sp,
          fmt("mean PSNR adaptive %.2f, uniform_random %.2f, poisson_disk %.2f dB (gain %.2f);", sa,
              su, sp, sa - su) +
              " per seed adaptive/uniform/poisson" + per_seed};
}

// 7. Frozen pilot mask on a perturbed second frame.
Outcome pilot_transfer() {
  ExperimentConfig c;
  c.pilot_frames = 2;
  c.baselines = {BaselineKind::uniform_random};
  double gain = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    c.seed = seed;
    const auto r = run_pilot_transfer(c, make_pilot_frames(c));
    const double d = r.method("adaptive_frozen", 2).psnr_db - r.method("uniform_random", 2).psnr_db;
    gain += d;
    per_seed += fmt(" %.2f", d);
  }
  gain /= 5;
  return {gain >= 0.5, fmt("frame-2 gain over uniform_random %.2f dB (>= 0.5); per seed", gain) +
                           per_seed};
}

// 8. Re-run criterion 6 seed 0 (with more threads) and compare artifacts.
Outcome determinism() {
  ExperimentConfig c;
  c.seed = 0;
  c.threads = 2;
  c.output_dir = kRunDir / "run_b";
  run_experiment(c);
  std::size_t files = 0, differ = 0;
  for (const auto &e : fs::directory_iterator(kRunDir / "run_a")) {
    const auto name = e.path().filename();
    if (name == "timings.json") continue; // wall-clock only
    ++files;
    if (!fs::exists(c.output_dir / name) || slurp(e.path()) != slurp(c.output_dir / name)) ++differ;
  }
  std::size_t other = 0;
  for ([[maybe_unused]] const auto &e : fs::directory_iterator(c.output_dir)) ++other;
  const bool ok = differ == 0 && files > 0 && other == files + 1;
  return {ok, std::to_string(files) + " files compared (report.json and arrays), " +
                  std::to_string(differ) + " differ"};
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char *name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "adjoint exactness", 5, adjoint_exactness},
      {2, "score correctness", 5, score_correctness},
      {3, "SGLD vs analytic posterior", 60, sgld_oracle_agreement},
      {4, "greedy selection agreement", 180, greedy_agreement},
      {5, "variance/selection oracles", 5, unit_oracles},
      {6, "adaptive vs fixed patterns (64x64, 10x)", 600, end_to_end},
      {7, "pilot transfer", 600, pilot_transfer},
      {8, "determinism", 600, determinism},
  };
  fs::remove_all(kRunDir);
  int failed = 0;
  for (const auto &c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.ok && dt < c.limit_s;
    failed += !ok;
    std::printf("[%s] %d %s: %s; %.1f s (limit %.0f s)\n", ok ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), dt, c.limit_s);
    std::fflush(stdout);
  }
  fs::remove_all(kRunDir);
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed ? 1 : 0;
}
