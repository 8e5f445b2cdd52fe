// adasamp: command-line front end for phantoms, masks, experiments and
// exact-posterior fixtures.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "adasamp/adaptive.hpp"
#include "adasamp/array_io.hpp"
#include "adasamp/harness.hpp"
#include "adasamp/oracle.hpp"

using namespace adasamp;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  unsigned threads = 1;
};

void add_common(CLI::App *cmd, Common &c, bool with_config) {
  if (with_config) cmd->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "root seed (overrides the config)");
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--threads", c.threads, "worker threads for SGLD chains")->capture_default_str();
}

ExperimentConfig resolve(const Common &c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  cfg.threads = c.threads;
  cfg.output_dir = c.out;
  return cfg;
}

void print_metrics(const ExperimentReport &r) {
  std::printf("%-18s %5s %10s %8s\n", "method", "frame", "psnr_db", "samples");
  for (const auto &m : r.methods)
    std::printf("%-18s %5zu %10.3f %8zu\n", m.name.c_str(), m.frame, m.psnr_db, m.mask.count());
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Adaptive k-space sampling with Langevin posterior ensembles"};
  app.require_subcommand(1);

  // phantom
  std::string ph_kind = "shepp_logan_like";
  std::size_t rows = 64, cols = 64;
  Common ph;
  auto *phantom = app.add_subcommand("phantom", "write a synthetic phantom");
  phantom->add_option("--kind", ph_kind, "shepp_logan_like | smooth_bumps | piecewise_constant_1d")
      ->capture_default_str();
  phantom->add_option("--rows", rows)->capture_default_str();
  phantom->add_option("--cols", cols)->capture_default_str();
  phantom->add_option("--out", ph.out)->capture_default_str();

  // mask
  std::string mk_kind = "poisson_disk", mk_mode = "pointwise";
  std::optional<std::size_t> count;
  double ratio = 10.0;
  Common mk;
  auto *mask = app.add_subcommand("mask", "write a fixed baseline mask");
  mask->add_option("--kind", mk_kind, "uniform_random | poisson_disk | low_frequency | variable_density")
      ->capture_default_str();
  mask->add_option("--rows", rows)->capture_default_str();
  mask->add_option("--cols", cols)->capture_default_str();
  mask->add_option("--count", count, "samples (lines in line mode); default from --ratio");
  mask->add_option("--ratio", ratio, "undersampling ratio")->capture_default_str();
  mask->add_option("--mode", mk_mode, "pointwise | line")->capture_default_str();
  add_common(mask, mk, false);

  // run / pilot
  Common rn, pl;
  auto *run = app.add_subcommand("run", "adaptive vs fixed-pattern experiment");
  add_common(run, rn, true);
  auto *pilot = app.add_subcommand("pilot", "design on frame 1, reuse the mask on later frames");
  add_common(pilot, pl, true);

  // oracle
  std::size_t on = 16, o_initial = 4, o_add = 5;
  double o_lambda = 1.0, o_sigma = 0.1;
  Common oc;
  auto *oracle = app.add_subcommand("oracle", "exact Gaussian posterior fixtures on a 1D grid");
  oracle->add_option("--n", on, "grid length")->capture_default_str();
  oracle->add_option("--initial", o_initial, "low-frequency samples measured up front")->capture_default_str();
  oracle->add_option("--n-add", o_add, "greedy picks")->capture_default_str();
  oracle->add_option("--lambda", o_lambda)->capture_default_str();
  oracle->add_option("--sigma", o_sigma)->capture_default_str();
  add_common(oracle, oc, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*phantom) {
      const Shape s{rows, cols};
      const auto x = make_phantom(parse_phantom_kind(ph_kind), s);
      fs::create_directories(ph.out);
      io::write_array(fs::path(ph.out) / "phantom", x, {{"kind", ph_kind}});
      io::write_pgm(fs::path(ph.out) / "phantom.pgm", magnitude(x));
      std::cout << "wrote " << (fs::path(ph.out) / "phantom") << '\n';
    } else if (*mask) {
      const Shape s{rows, cols};
      const auto mode = parse_sampling_mode(mk_mode);
      const std::size_t units = mode == SamplingMode::line ? cols : s.size();
      const std::size_t n = count.value_or(
          std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(units / ratio))));
      const auto m = make_baseline_mask(parse_baseline_kind(mk_kind), s, n, mk.seed.value_or(0), mode);
      fs::create_directories(mk.out);
      const auto stem = fs::path(mk.out) / ("mask_" + mk_kind);
      io::write_mask(stem, m);
      RealGrid g(s);
      for (std::size_t i : m.acquired()) g[i] = 1.0;
      io::write_pgm(stem.string() + ".pgm", g);
      std::cout << "wrote " << stem << " (" << m.count() << " samples)\n";
    } else if (*run) {
      const auto r = run_experiment(resolve(rn));
      print_metrics(r);
    } else if (*pilot) {
      const auto cfg = resolve(pl);
      const auto r = run_pilot_transfer(cfg, make_pilot_frames(cfg));
      print_metrics(r);
    } else if (*oracle) {
      const Shape s{on, 1};
      const auto init = make_baseline_mask(BaselineKind::low_frequency, s, o_initial, 0);
      const SensingOperator op(init, make_coil_maps(1, s, CoilProfile::uniform), o_sigma);
      const auto prob = GaussianProblem::make(op, o_lambda, o_sigma);
      const auto truth = make_phantom(PhantomKind::piecewise_constant_1d, s);
      const auto y = add_noise(apply_forward(truth, op), init, o_sigma, oc.seed.value_or(0));
      const auto moments = posterior_moments(prob, y);
      const auto picks = greedy_oracle_selection(prob, init, o_add);

      const fs::path dir(oc.out);
      fs::create_directories(dir);
      io::write_array(dir / "oracle_truth", truth);
      io::write_mask(dir / "oracle_initial_mask", init);
      io::write_array(dir / "oracle_mean", moments.mean);
      io::write_array(dir / "oracle_variance", measurement_variance(prob, moments.covariance));
      std::ofstream csv(dir / "oracle_greedy.csv");
      csv << "step,index\n";
      for (std::size_t k = 0; k < picks.size(); ++k) csv << k + 1 << ',' << picks[k] << '\n';
      std::cout << "greedy picks:";
      for (auto p : picks) std::cout << ' ' << p;
      std::cout << '\n';
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
